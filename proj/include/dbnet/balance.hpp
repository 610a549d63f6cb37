// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbnet/numerics.hpp"

namespace dbnet {

struct DbReport {
    bool satisfied = false;
    StatePair worst_pair{-1, -1};
    double worst_residual = 0;
    std::map<StatePair, double> residuals;
};

/// Detailed balance at the steady state: A_{ij}N_j = A_{ji}N_i for every pair
/// with at least one positive rate. One-way edges score residual 1 (maximal
/// violation), not an error.
inline DbReport check_detailed_balance(const Generator& gen, const SteadyState& n) {
    DbReport rep;
    rep.satisfied = true;
    for (int a = 0; a < gen.dim; ++a)
        for (int b = a + 1; b < gen.dim; ++b) {
            double fwd = gen.rate(a, b), bwd = gen.rate(b, a);
            if (fwd <= 0 && bwd <= 0) continue;
            double r = db_residual(fwd, bwd, n.values[a], n.values[b]);
            rep.residuals[{a, b}] = r;
            if (r > rep.worst_residual) {
                rep.worst_residual = r;
                rep.worst_pair = {a, b};
            }
        }
    rep.satisfied = rep.worst_residual <= tol::db;
    return rep;
}

struct SymmetrizedGenerator {
    Mat<double> matrix;           // B = S^{-1} A S with S = diag(sqrt(N))
    std::vector<double> scaling;  // sqrt(N_j)
    double asymmetry = 0;         // ||B - B^T||_inf (max entry deviation)
};

/// B_{ij} = A_{ij} sqrt(N_j / N_i); symmetric iff detailed balance holds.
inline SymmetrizedGenerator symmetrize(const Generator& gen, const SteadyState& n) {
    SymmetrizedGenerator out;
    out.scaling.resize(gen.dim);
    for (int i = 0; i < gen.dim; ++i) {
        if (!(n.values[i] > 0)) throw ValidationError("symmetrize needs a strictly positive steady state");
        out.scaling[i] = std::sqrt(n.values[i]);
    }
    out.matrix = Mat<double>(gen.dim);
    for (int r = 0; r < gen.dim; ++r)
        for (int c = 0; c < gen.dim; ++c)
            out.matrix(r, c) = gen.a(r, c) * out.scaling[c] / out.scaling[r];
    for (int r = 0; r < gen.dim; ++r)
        for (int c = r + 1; c < gen.dim; ++c)
            out.asymmetry = std::max(out.asymmetry, std::fabs(out.matrix(r, c) - out.matrix(c, r)));
    return out;
}

using TreeEdges = std::vector<StatePair>;

struct EnergyVector {
    TreeEdges tree;
    std::vector<double> values;
    std::optional<std::vector<Rational>> exact;
};

namespace detail {

inline void require_spanning_tree(int n, const TreeEdges& tree) {
    if (static_cast<int>(tree.size()) != n - 1)
        throw ValidationError("edge set is not a spanning tree (wrong edge count)");
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [a, b] : tree) {
        int ra = find(a), rb = find(b);
        if (ra == rb) throw ValidationError("edge set is not a spanning tree (cycle)");
        parent[ra] = rb;
    }
}

}  // namespace detail

/// Energy vector of a spanning tree: mu_root = 1 at the lowest-index vertex,
/// mu_child = mu_parent * A(child,parent)/A(parent,child), then l1-normalized.
/// Every tree edge must carry positive rates in both directions.
inline EnergyVector spanning_tree_energy(const Generator& gen, const TreeEdges& tree) {
    const int n = gen.dim;
    detail::require_spanning_tree(n, tree);
    for (const auto& [a, b] : tree)
        if (!(gen.rate(a, b) > 0) || !(gen.rate(b, a) > 0))
            throw ValidationError("tree edge with a zero-rate direction");

    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : tree) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());

    EnergyVector out;
    out.tree = tree;
    out.values.assign(n, 0.0);
    std::vector<Rational> mu_exact;
    const bool exact = gen.exact.has_value();
    if (exact) mu_exact.assign(n, Rational(0));

    std::vector<int> order{0};
    std::vector<bool> seen(n, false);
    seen[0] = true;
    out.values[0] = 1.0;
    if (exact) mu_exact[0] = 1;
    for (std::size_t h = 0; h < order.size(); ++h) {
        int p = order[h];
        for (int c : adj[p])
            if (!seen[c]) {
                seen[c] = true;
                out.values[c] = out.values[p] * gen.a(c, p) / gen.a(p, c);
                if (exact) mu_exact[c] = mu_exact[p] * (*gen.exact)(c, p) / (*gen.exact)(p, c);
                order.push_back(c);
            }
    }
    double sum = 0;
    for (double x : out.values) sum += x;
    for (double& x : out.values) x /= sum;
    if (exact) {
        Rational s(0);
        for (const auto& x : mu_exact) s += x;
        for (auto& x : mu_exact) x /= s;
        out.exact = std::move(mu_exact);
    }
    return out;
}

struct TreeDbReport {
    bool equivalent_to_db = false;
    std::optional<TreeEdges> mismatching_tree;
};

namespace detail {

/// BFS spanning tree from vertex 0 over the symmetric support, neighbors in
/// ascending order.
inline TreeEdges bfs_tree(const Generator& gen, std::vector<std::vector<int>>& adj_out) {
    const int n = gen.dim;
    std::vector<std::vector<int>> adj(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b && gen.a(b, a) > 0) {
                if (!(gen.a(a, b) > 0))
                    throw ValidationError("support graph is not symmetric");
                if (a < b) {
                    adj[a].push_back(b);
                    adj[b].push_back(a);
                }
            }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    TreeEdges tree;
    std::vector<bool> seen(n, false);
    std::vector<int> order{0};
    seen[0] = true;
    for (std::size_t h = 0; h < order.size(); ++h)
        for (int w : adj[order[h]])
            if (!seen[w]) {
                seen[w] = true;
                tree.push_back(unordered(order[h], w));
                order.push_back(w);
            }
    if (static_cast<int>(order.size()) != n)
        throw ValidationError("support graph is not connected");
    adj_out = std::move(adj);
    return tree;
}

}  // namespace detail

/// Detailed balance via a fundamental family of spanning trees: one BFS tree
/// plus, for each non-tree edge, the tree obtained by swapping that edge in
/// (dropping the first edge of its fundamental cycle). Every support edge is
/// covered by some sampled tree, so "all sampled energy vectors equal N"
/// is equivalent to detailed balance.
inline TreeDbReport db_via_trees(const Generator& gen, const SteadyState& n,
                                 const std::optional<std::vector<TreeEdges>>& trees = std::nullopt) {
    std::vector<TreeEdges> family;
    if (trees) {
        family = *trees;
    } else {
        std::vector<std::vector<int>> adj;
        TreeEdges base = detail::bfs_tree(gen, adj);
        family.push_back(base);
        std::set<StatePair> in_tree(base.begin(), base.end());
        // tree adjacency for path lookup
        const int L = gen.dim;
        std::vector<std::vector<int>> tadj(L);
        for (const auto& [a, b] : base) {
            tadj[a].push_back(b);
            tadj[b].push_back(a);
        }
        for (auto& row : tadj) std::sort(row.begin(), row.end());
        for (int a = 0; a < L; ++a)
            for (int b : adj[a]) {
                if (a >= b || in_tree.count({a, b})) continue;
                // fundamental cycle: tree path a..b; drop its first edge
                std::vector<int> prev(L, -1);
                std::vector<int> order{a};
                prev[a] = a;
                for (std::size_t h = 0; h < order.size() && prev[b] == -1; ++h)
                    for (int w : tadj[order[h]])
                        if (prev[w] == -1) {
                            prev[w] = order[h];
                            order.push_back(w);
                        }
                std::vector<int> path{b};
                while (path.back() != a) path.push_back(prev[path.back()]);
                std::reverse(path.begin(), path.end());  // a ... b
                StatePair drop = unordered(path[0], path[1]);
                TreeEdges swapped;
                for (const auto& e : base)
                    if (e != drop) swapped.push_back(e);
                swapped.push_back(unordered(a, b));
                family.push_back(std::move(swapped));
            }
    }

    TreeDbReport rep;
    rep.equivalent_to_db = true;
    for (const auto& tree : family) {
        EnergyVector mu = spanning_tree_energy(gen, tree);
        for (int i = 0; i < gen.dim; ++i) {
            double dev = std::fabs(mu.values[i] - n.values[i]) /
                         std::max({n.values[i], mu.values[i], tol::eps_floor});
            if (dev > tol::db) {
                rep.equivalent_to_db = false;
                if (!rep.mismatching_tree) rep.mismatching_tree = tree;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Open networks (sources and sinks).
// ---------------------------------------------------------------------------

namespace detail {

/// E_beta: within-block dynamics with a block-Markovian diagonal.
inline Mat<Rational> interior_block(const Generator& gen, const std::vector<int>& block) {
    if (!gen.exact) throw ValidationError("interior block extraction needs an exact generator");
    const int m = static_cast<int>(block.size());
    Mat<Rational> e(m);
    for (int i = 0; i < m; ++i) {
        Rational exit(0);
        for (int j = 0; j < m; ++j)
            if (i != j) {
                e(j, i) = (*gen.exact)(block[j], block[i]);
                exit += e(j, i);
            }
        e(i, i) = -exit;
    }
    return e;
}

/// E_alpha - C_alpha equals the raw alpha x alpha sub-block of A (the original
/// diagonal already accounts for losses to the sinks).
inline Mat<double> open_block(const Generator& gen, const std::vector<int>& block) {
    const int m = static_cast<int>(block.size());
    Mat<double> b(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) b(i, j) = gen.a(block[i], block[j]);
    return b;
}

}  // namespace detail

struct ExtendedDbReport {
    bool satisfied = false;
    std::vector<double> interior_steady;
    DbReport detail;
};

/// Extended detailed balance: the interior block E_alpha is detailed balanced
/// with respect to its own kernel vector.
inline ExtendedDbReport check_extended_db(const Network& net) {
    if (!net.compartments) throw ValidationError("network has no compartment spec");
    auto comp = check_compartments(net);
    if (!comp.pass) throw ValidationError("compartment block conditions fail");
    Generator gen = build_generator(net);
    const auto& block = net.compartments->interior;
    Mat<Rational> e_alpha = detail::interior_block(gen, block);

    Generator sub;
    sub.dim = static_cast<int>(block.size());
    sub.a = to_double(e_alpha);
    sub.exact = std::move(e_alpha);
    auto erg = check_ergodic(sub);
    if (!erg.ergodic) throw ValidationError("interior block is not ergodic");
    SteadyState n = steady_state(sub);

    ExtendedDbReport rep;
    rep.interior_steady = n.values;
    rep.detail = check_detailed_balance(sub, n);
    rep.satisfied = rep.detail.satisfied;
    return rep;
}

struct ResponseSeries {
    std::vector<double> times;
    std::vector<double> values;
};

/// CSV form: header "t,value", one row per sample, 17 significant digits.
inline std::string to_csv(const ResponseSeries& series) {
    std::string out = "t,value\n";
    char buf[80];
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", series.times[k], series.values[k]);
        out += buf;
    }
    return out;
}

/// Open-network response R_ij(t) = <e_j, e^{t(E_alpha - C_alpha)} e_i> for
/// interior states i, j; the propagator is sub-Markovian (columns sum <= 1).
inline ResponseSeries open_response(const Network& net, int i, int j,
                                    const std::vector<double>& ts) {
    if (!net.compartments) throw ValidationError("network has no compartment spec");
    const auto& block = net.compartments->interior;
    auto pos = [&](int s) {
        auto it = std::find(block.begin(), block.end(), s);
        if (it == block.end()) throw ValidationError("state is outside the interior compartment");
        return static_cast<int>(it - block.begin());
    };
    int bi = pos(i), bj = pos(j);
    Generator gen = build_generator(net);
    Mat<double> m = detail::open_block(gen, block);
    ResponseSeries out;
    for (double t : ts) {
        auto prop = expm_uniformized(m, t);
        out.times.push_back(t);
        out.values.push_back(prop.matrix(bj, bi));
    }
    return out;
}

}  // namespace dbnet
