// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "dbnet/network.hpp"

namespace dbnet {

/// Undirected/directed view of the positive-rate support of a generator.
struct SupportGraph {
    int n = 0;
    std::set<std::pair<int, int>> directed;  // (from, to)
    std::set<StatePair> undirected;          // (min, max)
    bool symmetric = true;
    std::vector<std::vector<int>> adj;       // undirected adjacency, ascending

    bool has_undirected(int a, int b) const { return undirected.count(unordered(a, b)) > 0; }

    bool connected() const {
        if (n == 0) return false;
        std::vector<bool> seen(n, false);
        std::vector<int> order{0};
        seen[0] = true;
        for (std::size_t h = 0; h < order.size(); ++h)
            for (int w : adj[order[h]])
                if (!seen[w]) {
                    seen[w] = true;
                    order.push_back(w);
                }
        return static_cast<int>(order.size()) == n;
    }
};

inline SupportGraph support_graph(const Generator& gen) {
    SupportGraph g;
    g.n = gen.dim;
    g.adj.assign(g.n, {});
    for (int from = 0; from < g.n; ++from)
        for (int to = 0; to < g.n; ++to)
            if (from != to && gen.rate(from, to) > 0) g.directed.insert({from, to});
    for (const auto& [from, to] : g.directed) {
        if (!g.directed.count({to, from})) g.symmetric = false;
        auto p = unordered(from, to);
        if (g.undirected.insert(p).second) {
            g.adj[p.first].push_back(p.second);
            g.adj[p.second].push_back(p.first);
        }
    }
    for (auto& row : g.adj) std::sort(row.begin(), row.end());
    return g;
}

/// Build from explicit undirected edges (tests, synthetic graphs).
inline SupportGraph graph_from_edges(int n, const std::vector<StatePair>& edges) {
    SupportGraph g;
    g.n = n;
    g.adj.assign(n, {});
    for (const auto& e : edges) {
        auto p = unordered(e.first, e.second);
        g.directed.insert({p.first, p.second});
        g.directed.insert({p.second, p.first});
        if (g.undirected.insert(p).second) {
            g.adj[p.first].push_back(p.second);
            g.adj[p.second].push_back(p.first);
        }
    }
    for (auto& row : g.adj) std::sort(row.begin(), row.end());
    return g;
}

/// Articulation points of the undirected support via one DFS low-link pass.
inline std::set<int> find_cut_vertices(const SupportGraph& g) {
    if (!g.connected()) throw ValidationError("cut-vertex search needs a connected graph");
    std::set<int> cuts;
    std::vector<int> num(g.n, -1), low(g.n, 0), parent(g.n, -1);
    int counter = 0;

    struct Frame { int v; std::size_t child; int tree_children; };
    for (int root = 0; root < g.n; ++root) {
        if (num[root] != -1) continue;
        std::vector<Frame> stack{{root, 0, 0}};
        num[root] = low[root] = counter++;
        while (!stack.empty()) {
            auto& f = stack.back();
            if (f.child < g.adj[f.v].size()) {
                int w = g.adj[f.v][f.child++];
                if (num[w] == -1) {
                    parent[w] = f.v;
                    ++f.tree_children;
                    num[w] = low[w] = counter++;
                    stack.push_back({w, 0, 0});
                } else if (w != parent[f.v]) {
                    low[f.v] = std::min(low[f.v], num[w]);
                }
            } else {
                int v = f.v, children = f.tree_children;
                stack.pop_back();
                if (!stack.empty()) {
                    int p = stack.back().v;
                    low[p] = std::min(low[p], low[v]);
                    if (parent[v] == p && stack.size() > 1 && low[v] >= num[p]) cuts.insert(p);
                } else if (children > 1) {
                    cuts.insert(v);  // root with two DFS subtrees
                }
            }
        }
    }
    return cuts;
}

/// A simple path holding a required edge exactly once.
struct PathCertificate {
    std::vector<int> vertices;     // I ... F
    StatePair through_edge{-1, -1};  // alpha as traversed (P, Q)

    int length() const { return static_cast<int>(vertices.size()) - 1; }

    bool valid(const SupportGraph& g, int from, int to, StatePair alpha) const {
        if (vertices.size() < 2 || vertices.front() != from || vertices.back() != to) return false;
        std::set<int> seen;
        int alpha_uses = 0;
        for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
            int a = vertices[k], b = vertices[k + 1];
            if (!g.has_undirected(a, b)) return false;
            if (!seen.insert(a).second) return false;
            if (unordered(a, b) == unordered(alpha.first, alpha.second)) ++alpha_uses;
        }
        if (!seen.insert(vertices.back()).second) return false;
        return alpha_uses == 1;
    }
};

struct PathResult {
    std::optional<PathCertificate> path;
    std::optional<int> separator;  // cut vertex shielding alpha from {I, F}
};

namespace detail {

/// Unit-capacity max flow (Edmonds-Karp with ascending-index BFS) on the
/// vertex-split transformation of the support graph with the edge alpha
/// subdivided by a midpoint node. Two disjoint augmenting paths from the
/// midpoint to {I, F} exist iff a simple I-F path through alpha exists
/// (Menger fan); their concatenation is the certificate.
struct FlowNet {
    // node ids: 2v (v_in), 2v+1 (v_out) for original vertices, then mid, sink
    int n_nodes;
    std::vector<std::vector<int>> head;  // adjacency: edge indices
    std::vector<int> to;
    std::vector<int> cap;

    void add_edge(int a, int b, int c) {
        head[a].push_back(static_cast<int>(to.size()));
        to.push_back(b);
        cap.push_back(c);
        head[b].push_back(static_cast<int>(to.size()));
        to.push_back(a);
        cap.push_back(0);
    }
};

}  // namespace detail

/// Find a simple path from I to F that traverses the undirected edge alpha
/// exactly once. When none exists, report a single vertex whose removal
/// separates alpha from I and F (always present by the flow min-cut).
inline PathResult path_through_edge(const SupportGraph& g, int from, int to, StatePair alpha) {
    if (from == to) throw ValidationError("path endpoints must differ");
    if (!g.has_undirected(alpha.first, alpha.second))
        throw ValidationError("alpha is not a support edge");
    if (!g.connected()) throw ValidationError("support graph is not connected");

    const int P = alpha.first, Q = alpha.second;
    const int mid = 2 * g.n, sink = 2 * g.n + 1;
    detail::FlowNet net;
    net.n_nodes = 2 * g.n + 2;
    net.head.assign(net.n_nodes, {});
    auto vin = [](int v) { return 2 * v; };
    auto vout = [](int v) { return 2 * v + 1; };

    for (int v = 0; v < g.n; ++v) net.add_edge(vin(v), vout(v), 1);
    for (const auto& [a, b] : g.undirected) {
        if (unordered(a, b) == unordered(P, Q)) continue;  // alpha replaced by mid
        net.add_edge(vout(a), vin(b), 2);
        net.add_edge(vout(b), vin(a), 2);
    }
    net.add_edge(mid, vin(P), 1);
    net.add_edge(mid, vin(Q), 1);
    net.add_edge(vout(from), sink, 1);
    net.add_edge(vout(to), sink, 1);

    auto augment = [&]() -> bool {
        std::vector<int> prev_edge(net.n_nodes, -1);
        std::vector<int> order{mid};
        std::vector<bool> seen(net.n_nodes, false);
        seen[mid] = true;
        for (std::size_t h = 0; h < order.size() && !seen[sink]; ++h) {
            int v = order[h];
            for (int e : net.head[v]) {
                if (net.cap[e] <= 0) continue;
                int w = net.to[e];
                if (seen[w]) continue;
                seen[w] = true;
                prev_edge[w] = e;
                order.push_back(w);
                if (w == sink) break;
            }
        }
        if (!seen[sink]) return false;
        for (int v = sink; v != mid;) {
            int e = prev_edge[v];
            net.cap[e] -= 1;
            net.cap[e ^ 1] += 1;
            v = net.to[e ^ 1];
        }
        return true;
    };

    int flow = 0;
    while (flow < 2 && augment()) ++flow;

    PathResult result;
    if (flow == 2) {
        // Decompose into two edge-disjoint mid -> sink unit paths. Reverse
        // capacities start at zero, so cap[e^1] is the flow carried by the
        // forward edge e; to[e^1] is its tail node.
        std::vector<std::vector<int>> used(net.n_nodes);
        for (std::size_t e = 0; e < net.to.size(); e += 2)
            for (int k = 0; k < net.cap[e + 1]; ++k)
                used[net.to[e + 1]].push_back(static_cast<int>(e));
        auto trace = [&](int start_edge) {
            std::vector<int> verts;
            int e = start_edge;
            while (true) {
                int node = net.to[e];
                if (node == sink) break;
                if (node % 2 == 0 && node < 2 * g.n) verts.push_back(node / 2);
                auto& lst = used[node];
                e = lst.back();
                lst.pop_back();
            }
            return verts;
        };
        std::vector<std::vector<int>> legs;
        for (int e : used[mid]) legs.push_back(trace(e));
        used[mid].clear();

        // legs[k] starts at P or Q and ends at from or to
        auto ends_at = [&](const std::vector<int>& leg, int target) {
            return !leg.empty() && leg.back() == target;
        };
        std::vector<int> to_from, to_final;
        for (auto& leg : legs) {
            if (ends_at(leg, from))
                to_from = leg;
            else if (ends_at(leg, to))
                to_final = leg;
        }
        if (to_from.empty() || to_final.empty())
            throw NumericError("flow decomposition failed");  // unreachable

        PathCertificate cert;
        cert.vertices.assign(to_from.rbegin(), to_from.rend());  // from ... P-or-Q
        cert.through_edge = {to_from.front(), to_final.front()};
        cert.vertices.insert(cert.vertices.end(), to_final.begin(), to_final.end());
        if (!cert.valid(g, from, to, alpha)) throw NumericError("invalid path certificate");
        result.path = std::move(cert);
        return result;
    }

    // No path: exhibit the separating vertex (deterministic lowest index).
    for (int x = 0; x < g.n; ++x) {
        // component of alpha's surviving endpoints in g - x
        std::vector<int> order;
        std::vector<bool> seen(g.n, false);
        auto push = [&](int v) {
            if (v != x && !seen[v]) {
                seen[v] = true;
                order.push_back(v);
            }
        };
        push(P);
        push(Q);
        for (std::size_t h = 0; h < order.size(); ++h)
            for (int w : g.adj[order[h]]) push(w);
        bool touches_from = from != x && seen[from];
        bool touches_to = to != x && seen[to];
        if (!touches_from && !touches_to) {
            result.separator = x;
            return result;
        }
    }
    throw NumericError("no path and no single separator found");  // unreachable
}

struct CutClassReport {
    bool is_cut_class = false;
    std::optional<int> cut_vertex;
    std::optional<std::vector<int>> balanced_side;  // vertex set incl. the cut vertex
};

/// Cut-vertex stability-class shape: some cut vertex X splits the edge set into
/// two parts sharing only X, with every non-balanced support edge confined to
/// one part. Reports X and the fully balanced side's vertices.
inline CutClassReport check_stability_class_shape(const SupportGraph& g,
                                                  const ClassAnnotation& ann) {
    if (!g.connected()) throw ValidationError("stability-class check needs a connected graph");
    CutClassReport rep;
    auto cuts = find_cut_vertices(g);
    for (int x : cuts) {
        // components of g - x
        std::vector<int> comp(g.n, -1);
        int comp_count = 0;
        for (int v = 0; v < g.n; ++v) {
            if (v == x || comp[v] != -1) continue;
            std::vector<int> order{v};
            comp[v] = comp_count;
            for (std::size_t h = 0; h < order.size(); ++h)
                for (int w : g.adj[order[h]])
                    if (w != x && comp[w] == -1) {
                        comp[w] = comp_count;
                        order.push_back(w);
                    }
            ++comp_count;
        }
        if (comp_count < 2) continue;
        // group of an edge: component of its non-x endpoint
        std::set<int> unbalanced_groups;
        for (const auto& e : g.undirected) {
            if (ann.is_balanced(e.first, e.second)) continue;
            int anchor = e.first == x ? e.second : e.first;
            unbalanced_groups.insert(comp[anchor]);
        }
        if (unbalanced_groups.size() <= 1) {
            int far_group = unbalanced_groups.empty() ? comp_count - 1 : *unbalanced_groups.begin();
            std::vector<int> side{x};
            for (int v = 0; v < g.n; ++v)
                if (v != x && comp[v] != far_group) side.push_back(v);
            std::sort(side.begin(), side.end());
            rep.is_cut_class = true;
            rep.cut_vertex = x;
            rep.balanced_side = side;
            return rep;
        }
    }
    return rep;
}

}  // namespace dbnet
