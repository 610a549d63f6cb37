// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures, random-instance constructions and independent oracles for
// the test suites. Oracles here never call the production code path they
// check.
#pragma once

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dbnet/dbnet.hpp"

namespace helpers {

using dbnet::Generator;
using dbnet::Mat;
using dbnet::Network;
using dbnet::Rational;
using dbnet::RngStream;
using dbnet::StatePair;

// ---------------------------------------------------------------------------
// Paper fixtures.
// ---------------------------------------------------------------------------

/// The 4x4 complete-graph example: all rates 1 except rate(s4->s3) = 2.
inline Network example4_network() {
    Network net;
    net.states = {"s1", "s2", "s3", "s4"};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) net.rates[{i, j}] = Rational(1);
    net.rates[{3, 2}] = Rational(2);
    return net;
}

/// The 5x5 cut-vertex example: the 4x4 block plus a pendant state s5 on s4.
inline Network remark5_network() {
    Network net;
    net.states = {"s1", "s2", "s3", "s4", "s5"};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) net.rates[{i, j}] = Rational(1);
    net.rates[{3, 2}] = Rational(2);
    net.rates[{3, 4}] = Rational(1);
    net.rates[{4, 3}] = Rational(1);
    return net;
}

/// Two triangles {s1,s2,s3} and {s3,s4,s5} glued at s3; the far triangle
/// circulates (rates 2 forward, 1 backward), the near one is balanced.
/// Uniform steady state; class: near pairs balanced, cross pairs forbidden.
inline Network stable_class5_network() {
    Network net;
    net.states = {"s1", "s2", "s3", "s4", "s5"};
    auto set2 = [&](int a, int b, int f, int g) {
        net.rates[{a, b}] = Rational(f);
        net.rates[{b, a}] = Rational(g);
    };
    set2(0, 1, 1, 1);
    set2(0, 2, 1, 1);
    set2(1, 2, 1, 1);
    set2(2, 3, 2, 1);
    set2(3, 4, 2, 1);
    set2(4, 2, 2, 1);
    dbnet::ClassAnnotation ann;
    ann.balanced = {{0, 1}, {0, 2}, {1, 2}};
    ann.forbidden = {{0, 3}, {0, 4}, {1, 3}, {1, 4}};
    net.class_annotation = ann;
    return net;
}

inline Mat<double> example4_matrix() { return dbnet::build_generator(example4_network()).a; }

// ---------------------------------------------------------------------------
// Random instances.
// ---------------------------------------------------------------------------

inline Rational random_rational(RngStream& rng, long num_max = 24, long den_max = 4) {
    Rational q(1 + static_cast<long>(rng.below(num_max)),
               1 + static_cast<long>(rng.below(den_max)));
    q.canonicalize();  // the two-argument constructor does not reduce
    return q;
}

/// Random connected undirected edge set: a random spanning tree plus extras.
inline std::vector<StatePair> random_connected_edges(int n, RngStream& rng,
                                                     double extra_prob = 0.35) {
    std::vector<StatePair> edges;
    for (int v = 1; v < n; ++v)
        edges.push_back(dbnet::unordered(v, static_cast<int>(rng.below(v))));
    std::set<StatePair> have(edges.begin(), edges.end());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (!have.count({a, b}) && rng.next_open() < extra_prob) {
                edges.push_back({a, b});
                have.insert({a, b});
            }
    return edges;
}

/// Random ergodic generator with symmetric support and free rates.
inline Generator random_generator(int n, RngStream& rng, bool complete = false) {
    std::map<std::pair<int, int>, double> rates;
    auto edges = complete ? std::vector<StatePair>{} : random_connected_edges(n, rng);
    if (complete)
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) edges.push_back({a, b});
    for (const auto& [a, b] : edges) {
        rates[{a, b}] = rng.uniform(0.3, 2.0);
        rates[{b, a}] = rng.uniform(0.3, 2.0);
    }
    return dbnet::generator_from_rates(n, rates);
}

/// Random generator satisfying detailed balance exactly (up to rounding):
/// pick a positive target N and symmetric edge fluxes s, so that
/// rate(a->b) = s/N_a gives equal directed fluxes.
inline Generator random_db_generator(int n, RngStream& rng, bool complete = true) {
    std::vector<double> target(n);
    for (auto& x : target) x = rng.uniform(0.2, 1.0);
    std::map<std::pair<int, int>, double> rates;
    auto edges = complete ? std::vector<StatePair>{} : random_connected_edges(n, rng);
    if (complete)
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) edges.push_back({a, b});
    for (const auto& [a, b] : edges) {
        double s = rng.uniform(0.3, 1.5);
        rates[{a, b}] = s / target[a];
        rates[{b, a}] = s / target[b];
    }
    return dbnet::generator_from_rates(n, rates);
}

/// Random symmetric-support cycle generator 0-1-...-0. db=true balances the
/// cycle through a potential; db=false adds a net circulation.
inline Generator random_cycle_generator(int n, RngStream& rng, bool db) {
    std::map<std::pair<int, int>, double> rates;
    if (db) {
        std::vector<double> target(n);
        for (auto& x : target) x = rng.uniform(0.2, 1.0);
        for (int v = 0; v < n; ++v) {
            int w = (v + 1) % n;
            double s = rng.uniform(0.3, 1.5);
            rates[{v, w}] = s / target[v];
            rates[{w, v}] = s / target[w];
        }
    } else {
        for (int v = 0; v < n; ++v) {
            int w = (v + 1) % n;
            rates[{v, w}] = rng.uniform(1.2, 2.5);
            rates[{w, v}] = rng.uniform(0.2, 0.8);
        }
    }
    return dbnet::generator_from_rates(n, rates);
}

/// Random member of a cut-vertex stability class, built exactly: near block on
/// {0..near-1}, far block on {near-1..near+far-2}, glued at X = near-1. Far
/// rates are free (a circulating cycle plus chords); near rates are detailed
/// balanced against the global steady state by construction. The annotation
/// marks near pairs balanced and absent pairs forbidden.
inline Network random_cut_class_network(int near, int far, RngStream& rng) {
    const int x = near - 1;
    const int total = near + far - 1;
    Network net;
    for (int v = 0; v < total; ++v) net.states.push_back("s" + std::to_string(v + 1));

    std::vector<int> far_vs{x};
    for (int v = near; v < total; ++v) far_vs.push_back(v);
    const int f = static_cast<int>(far_vs.size());
    for (int k = 0; k < f; ++k) {
        int a = far_vs[k], b = far_vs[(k + 1) % f];
        net.rates[{a, b}] = random_rational(rng) + Rational(1);
        net.rates[{b, a}] = random_rational(rng);
    }
    for (int k = 0; k < f; ++k)
        for (int l = k + 2; l < f; ++l) {
            if ((k == 0 && l == f - 1) || rng.next_open() > 0.3) continue;
            net.rates[{far_vs[k], far_vs[l]}] = random_rational(rng);
            net.rates[{far_vs[l], far_vs[k]}] = random_rational(rng);
        }

    // exact steady state of the far sub-network
    Mat<Rational> far_mat(f);
    for (int k = 0; k < f; ++k)
        for (int l = 0; l < f; ++l)
            if (k != l) {
                auto it = net.rates.find({far_vs[l], far_vs[k]});
                if (it != net.rates.end()) far_mat(k, l) = it->second;
            }
    for (int c = 0; c < f; ++c) {
        Rational s(0);
        for (int r = 0; r < f; ++r)
            if (r != c) s += far_mat(r, c);
        far_mat(c, c) = -s;
    }
    auto nu = dbnet::steady_state_exact(far_mat);

    // global steady-state targets: far block from nu, near block free
    std::vector<Rational> target(total, Rational(0));
    for (int k = 0; k < f; ++k) target[far_vs[k]] = nu[k];
    for (int v = 0; v < near - 1; ++v) target[v] = target[x] * random_rational(rng, 8, 4);

    dbnet::ClassAnnotation ann;
    auto near_edges = random_connected_edges(near, rng, 0.5);
    for (const auto& [a, b] : near_edges) {
        Rational s = random_rational(rng);
        net.rates[{a, b}] = s / target[a];
        net.rates[{b, a}] = s / target[b];
        ann.balanced.insert(dbnet::unordered(a, b));
    }
    for (int a = 0; a < total; ++a)
        for (int b = a + 1; b < total; ++b)
            if (!net.rates.count({a, b}) && !net.rates.count({b, a}))
                ann.forbidden.insert({a, b});
    net.class_annotation = ann;
    return net;
}

/// Random rational network that satisfies (0,1)-pathwise detailed balance
/// without detailed balance: swapping states 0 and 1 is a rate-preserving
/// automorphism (so <e0, A^n e1> = <e1, A^n e0> and N_0 = N_1 exactly), while
/// the far block carries an asymmetric circulation. The support contains
/// K_{2,n-2} plus the far cycle, hence is 2-connected.
inline Network exchange_symmetric_pdb_network(int n, RngStream& rng) {
    Network net;
    for (int v = 0; v < n; ++v) net.states.push_back("s" + std::to_string(v + 1));
    Rational r01 = random_rational(rng);
    net.rates[{0, 1}] = r01;
    net.rates[{1, 0}] = r01;
    for (int k = 2; k < n; ++k) {
        Rational out = random_rational(rng), in = random_rational(rng);
        net.rates[{0, k}] = out;
        net.rates[{1, k}] = out;
        net.rates[{k, 0}] = in;
        net.rates[{k, 1}] = in;
    }
    if (n >= 5) {
        for (int k = 2; k < n; ++k) {
            int next = k + 1 < n ? k + 1 : 2;
            net.rates[{k, next}] = random_rational(rng) + Rational(1);
            net.rates[{next, k}] = random_rational(rng);
        }
    } else if (n == 4) {
        net.rates[{2, 3}] = random_rational(rng) + Rational(1);
        net.rates[{3, 2}] = random_rational(rng);
    }
    return net;
}

// ---------------------------------------------------------------------------
// Independent oracles.
// ---------------------------------------------------------------------------

/// Connectivity after deleting one vertex (brute-force articulation oracle).
inline bool connected_without(const dbnet::SupportGraph& g, int x) {
    int start = x == 0 ? 1 : 0;
    std::vector<bool> seen(g.n, false);
    std::vector<int> order{start};
    seen[start] = true;
    for (std::size_t h = 0; h < order.size(); ++h)
        for (int w : g.adj[order[h]])
            if (w != x && !seen[w]) {
                seen[w] = true;
                order.push_back(w);
            }
    for (int v = 0; v < g.n; ++v)
        if (v != x && !seen[v]) return false;
    return true;
}

/// Exact monomial coefficients of the polynomial through (xs, ys) (Lagrange).
inline std::vector<Rational> poly_coeffs(const std::vector<Rational>& xs,
                                         const std::vector<Rational>& ys) {
    const std::size_t n = xs.size();
    std::vector<Rational> coeffs(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Rational> basis{Rational(1)};
        Rational den(1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            std::vector<Rational> nb(basis.size() + 1, Rational(0));
            for (std::size_t k = 0; k < basis.size(); ++k) {
                nb[k + 1] += basis[k];
                nb[k] -= xs[j] * basis[k];
            }
            basis = std::move(nb);
            den *= xs[i] - xs[j];
        }
        for (std::size_t k = 0; k < basis.size(); ++k) coeffs[k] += ys[i] * basis[k] / den;
    }
    return coeffs;
}

/// Exact rational D(e) mirroring the production construction.
inline Mat<Rational> exact_edge_perturbation(const std::vector<Rational>& n_exact, int e1, int e2) {
    Mat<Rational> d(static_cast<int>(n_exact.size()));
    Rational ratio = n_exact[e1] / n_exact[e2];
    d(e2, e1) = 1;
    d(e1, e2) = ratio;
    d(e1, e1) = -1;
    d(e2, e2) = -ratio;
    return d;
}

/// Exact mixed multilinear coefficient of prod_e eps(e) in
/// Delta_n(A + sum eps(e) D(e)), via tensor-grid polynomial interpolation in
/// exact rational arithmetic. Independent of the finite-difference code path.
inline Rational exact_mixed_delta_coeff(const Mat<Rational>& a,
                                        const std::vector<Rational>& n_exact, int i, int j,
                                        int order_n, const std::vector<Mat<Rational>>& dirs) {
    const int k = static_cast<int>(dirs.size());
    const int deg = order_n;
    std::vector<Rational> nodes;
    for (int t = 0; t <= deg; ++t) nodes.push_back(Rational(t));

    // note the explicit return type: gmpxx expression templates must not
    // escape the lambda, they reference the locals
    auto eval = [&](const std::vector<Rational>& eps) -> Rational {
        Mat<Rational> m = a;
        for (int d = 0; d < k; ++d)
            for (int r = 0; r < a.dim(); ++r)
                for (int c = 0; c < a.dim(); ++c) m(r, c) += eps[d] * dirs[d](r, c);
        std::vector<Rational> ei(a.dim(), Rational(0)), ej(a.dim(), Rational(0));
        ei[i] = 1;
        ej[j] = 1;
        for (int p = 0; p < order_n; ++p) {
            ei = m.apply(ei);
            ej = m.apply(ej);
        }
        return n_exact[i] * ei[j] - n_exact[j] * ej[i];
    };

    std::function<Rational(std::vector<Rational>&, int)> coeff =
        [&](std::vector<Rational>& fixed, int var) -> Rational {
        std::vector<Rational> ys;
        for (int t = 0; t <= deg; ++t) {
            fixed[var] = nodes[t];
            ys.push_back(var + 1 == k ? eval(fixed) : coeff(fixed, var + 1));
        }
        return poly_coeffs(nodes, ys)[1];
    };
    std::vector<Rational> fixed(k, Rational(0));
    return coeff(fixed, 0);
}

// ---------------------------------------------------------------------------
// CLI helpers.
// ---------------------------------------------------------------------------

inline std::string cli_path() {
    if (const char* p = std::getenv("DBNET_CLI")) return p;
    for (const char* guess : {"./dbnet", "../dbnet", "build/dbnet"})
        if (std::ifstream(guess).good()) return guess;
    return "./dbnet";
}

inline std::string networks_dir() {
    if (const char* p = std::getenv("DBNET_NETWORKS")) return p;
    for (const char* guess : {"networks", "../networks", "../../networks"})
        if (std::ifstream(std::string(guess) + "/example4.json").good()) return guess;
    return "networks";
}

struct CliResult {
    int exit_code = -1;
    std::string out;
};

inline CliResult run_cli(const std::string& args) {
    std::string tmp = "cli_out.tmp";
    std::string cmd = cli_path() + " " + args + " > " + tmp + " 2>&1";
    int rc = std::system(cmd.c_str());
    std::ifstream in(tmp, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::remove(tmp.c_str());
    return {rc == -1 ? -1 : WEXITSTATUS(rc), buf.str()};
}

}  // namespace helpers
