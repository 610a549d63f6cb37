// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dbnet/balance.hpp"
#include "dbnet/numerics.hpp"

namespace dbnet {

/// Delta_n = N_i <e_j, A^n e_i> - N_j <e_i, A^n e_j> for n = 1..L-1. By
/// Cayley-Hamilton, all higher powers are spanned by these, so the finite
/// series decides the pathwise condition. |Delta_n| is compared against
/// tau_pdb * N_i * ||A||_inf^n because the raw values grow geometrically.
struct DeltaSeries {
    StatePair pair{-1, -1};
    std::vector<double> values;  // index n-1 holds Delta_n
    double ratio_constant = 0;   // c = N_j / N_i
    std::vector<double> scales;  // N_i * ||A||_inf^n
    std::optional<std::vector<Rational>> exact;
};

inline DeltaSeries delta_series(const Generator& gen, const SteadyState& n, int i, int j) {
    if (i == j) throw ValidationError("pathwise pair needs two distinct states");
    DeltaSeries out;
    out.pair = {i, j};
    out.ratio_constant = n.values[j] / n.values[i];
    const double norm_a = inf_norm(gen.a);

    std::vector<double> ei(gen.dim, 0.0), ej(gen.dim, 0.0);
    ei[i] = 1.0;
    ej[j] = 1.0;
    double scale = n.values[i];
    for (int p = 1; p <= gen.dim - 1; ++p) {
        ei = gen.a.apply(ei);  // A^p e_i
        ej = gen.a.apply(ej);
        out.values.push_back(n.values[i] * ei[j] - n.values[j] * ej[i]);
        scale *= std::max(norm_a, 1.0);
        out.scales.push_back(scale);
    }

    if (gen.exact && n.exact) {
        std::vector<Rational> xi(gen.dim, Rational(0)), xj(gen.dim, Rational(0));
        xi[i] = 1;
        xj[j] = 1;
        std::vector<Rational> exact;
        for (int p = 1; p <= gen.dim - 1; ++p) {
            xi = gen.exact->apply(xi);
            xj = gen.exact->apply(xj);
            exact.push_back((*n.exact)[i] * xi[j] - (*n.exact)[j] * xj[i]);
        }
        out.exact = std::move(exact);
    }
    return out;
}

struct PdbReport {
    bool holds = false;
    std::optional<int> first_failing_n;
    DeltaSeries series;
};

/// Pathwise detailed balance for the pair (i, j). Exact-rational generators
/// are decided by literal zero; float generators by the scaled tolerance.
inline PdbReport check_pdb(const Generator& gen, const SteadyState& n, int i, int j) {
    PdbReport rep;
    rep.series = delta_series(gen, n, i, j);
    rep.holds = true;
    for (std::size_t k = 0; k < rep.series.values.size(); ++k) {
        bool zero;
        if (rep.series.exact)
            zero = (*rep.series.exact)[k] == 0;
        else
            zero = std::fabs(rep.series.values[k]) <= tol::pdb * rep.series.scales[k];
        if (!zero) {
            rep.holds = false;
            rep.first_failing_n = static_cast<int>(k) + 1;
            break;
        }
    }
    return rep;
}

/// Pathwise symmetry of a (typically symmetrized) matrix B:
/// <e_i, B^n e_j> == <e_j, B^n e_i> for n = 1..L-1.
inline bool check_pathwise_symmetry(const SymmetrizedGenerator& b, int i, int j) {
    const int dim = b.matrix.dim();
    const double norm_b = inf_norm(b.matrix);
    std::vector<double> vi(dim, 0.0), vj(dim, 0.0);
    vi[i] = 1.0;
    vj[j] = 1.0;
    double scale = 1.0;
    for (int p = 1; p <= dim - 1; ++p) {
        vi = b.matrix.apply(vi);
        vj = b.matrix.apply(vj);
        scale *= std::max(norm_b, 1.0);
        if (std::fabs(vi[j] - vj[i]) > tol::pdb * scale) return false;
    }
    return true;
}

struct WalkSum {
    int from = 0, to = 0, length = 0;
    double value = 0;
    std::optional<Rational> exact;
};

/// Brute-force sum over all length-n walks from -> to of the product of step
/// rates (self-loops enter through the diagonal). This is the independent test
/// oracle for matrix powers, guarded to stay at desk scale.
inline WalkSum walk_sum_oracle(const Generator& gen, int from, int to, int n) {
    if (n < 0 || n > 8) throw ValidationError("walk-sum oracle limited to n <= 8");
    double states_pow = std::pow(double(gen.dim), double(n));
    if (states_pow > 1e7) throw ValidationError("walk-sum oracle guard: L^n too large");

    WalkSum out;
    out.from = from;
    out.to = to;
    out.length = n;
    const bool exact = gen.exact.has_value();
    Rational acc_exact(0);
    double acc = 0;

    std::vector<int> walk(n + 1);
    walk[0] = from;
    // depth-first over vertex sequences; steps may use any entry incl. diagonal
    auto step_rate = [&](int u, int v) { return gen.a(v, u); };
    std::vector<double> partial(n + 1, 1.0);
    std::vector<Rational> partial_exact;
    if (exact) partial_exact.assign(n + 1, Rational(1));
    int depth = 0;
    std::vector<int> cursor(n + 1, 0);
    while (depth >= 0) {
        if (depth == n) {
            if (walk[n] == to) {
                acc += partial[n];
                if (exact) acc_exact += partial_exact[n];
            }
            --depth;
            continue;
        }
        int& c = cursor[depth + 1];
        if (c >= gen.dim) {
            c = 0;
            --depth;
            continue;
        }
        int next = c++;
        if (gen.a(next, walk[depth]) == 0) continue;
        walk[depth + 1] = next;
        partial[depth + 1] = partial[depth] * step_rate(walk[depth], next);
        if (exact)
            partial_exact[depth + 1] = partial_exact[depth] * (*gen.exact)(next, walk[depth]);
        ++depth;
    }
    out.value = acc;
    if (exact) out.exact = acc_exact;
    return out;
}

struct RatioReport {
    bool constant = false;
    double fitted_c = 0;       // median of R_ij / R_ji over the grid
    double max_deviation = 0;  // max relative spread around the median
};

/// R_ij(t)/R_ji(t) on a time grid; constant within tau_ratio iff the pair is
/// pathwise balanced, in which case the constant is N_j/N_i.
inline RatioReport response_ratio_test(const Generator& gen, int i, int j,
                                       const std::vector<double>& ts) {
    std::vector<double> grid;
    for (double t : ts)
        if (t > 0) grid.push_back(t);
    if (grid.size() < 2)
        throw ValidationError("response ratio test needs at least two positive times");

    std::vector<double> ratios;
    for (double t : grid) {
        auto prop = propagate(gen, t);
        double rij = prop.matrix(j, i), rji = prop.matrix(i, j);
        if (!(rji > 0)) throw NumericError("vanishing reverse response in ratio test");
        ratios.push_back(rij / rji);
    }
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];

    RatioReport rep;
    rep.fitted_c = median;
    for (double r : ratios)
        rep.max_deviation = std::max(rep.max_deviation,
                                     std::fabs(r - median) / std::max(std::fabs(median), tol::eps_floor));
    rep.constant = rep.max_deviation <= tol::ratio;
    return rep;
}

}  // namespace dbnet
