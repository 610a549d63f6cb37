// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dbnet/network.hpp"

namespace dbnet {

struct SteadyState {
    std::vector<double> values;
    double residual = 0;        // ||A N||_inf
    double norm_deviation = 0;  // | ||N||_1 - 1 |
    std::optional<std::vector<Rational>> exact;
};

namespace detail {

/// Solve M x = e_r with row r of M replaced by the all-ones normalization row.
/// r is the row of largest diagonal magnitude.
template <typename T>
std::vector<T> kernel_solve(const Mat<T>& a) {
    const int n = a.dim();
    int r = 0;
    for (int i = 1; i < n; ++i)
        if (mag(a(i, i)) > mag(a(r, r))) r = i;
    Mat<T> m = a;
    std::vector<T> b(n, T(0));
    for (int c = 0; c < n; ++c) m(r, c) = T(1);
    b[r] = T(1);
    return lu_solve(std::move(m), std::move(b));
}

}  // namespace detail

/// Exact steady state of a rational generator: A N = 0, ||N||_1 = 1.
inline std::vector<Rational> steady_state_exact(const Mat<Rational>& a) {
    auto n = detail::kernel_solve(a);
    for (const auto& x : n)
        if (x <= 0) throw NumericError("steady state has a nonpositive entry (generator not ergodic)");
    auto residual = a.apply(n);
    for (const auto& x : residual)
        if (x != 0) throw NumericError("exact steady-state solve left a nonzero residual");
    return n;
}

/// Normalized strictly positive steady state. Requires an ergodic generator;
/// a nonpositive entry or a large residual reports failure rather than a vector.
inline SteadyState steady_state(const Generator& gen) {
    SteadyState out;
    out.values = detail::kernel_solve(gen.a);
    double sum = 0;
    for (double x : out.values) {
        if (!(x > 0)) throw NumericError("steady state has a nonpositive entry (generator not ergodic)");
        sum += x;
    }
    for (double& x : out.values) x /= sum;
    out.residual = inf_norm(gen.a.apply(out.values));
    double scale = std::max(1.0, inf_norm(gen.a));
    if (out.residual > tol::ss * scale)
        throw NumericError("steady-state residual exceeds tolerance");
    double l1 = 0;
    for (double x : out.values) l1 += x;
    out.norm_deviation = std::fabs(l1 - 1.0);
    if (gen.exact && gen.dim <= 64) {
        auto exact = steady_state_exact(*gen.exact);
        Rational s(0);
        for (const auto& x : exact) s += x;
        for (auto& x : exact) x /= s;
        out.exact = std::move(exact);
    }
    return out;
}

/// A^n v by repeated multiplication.
inline std::vector<double> matrix_power_apply(const Generator& gen, int n,
                                              std::vector<double> v, int n_max = 64) {
    if (n < 0 || n > n_max) throw ValidationError("matrix power order out of range");
    for (int k = 0; k < n; ++k) v = gen.a.apply(v);
    return v;
}

inline std::vector<Rational> matrix_power_apply_exact(const Mat<Rational>& a, int n,
                                                      std::vector<Rational> v, int n_max = 64) {
    if (n < 0 || n > n_max) throw ValidationError("matrix power order out of range");
    for (int k = 0; k < n; ++k) v = a.apply(v);
    return v;
}

struct Propagator {
    double time = 0;
    Mat<double> matrix;
    double truncation_bound = 0;  // Poisson tail mass dropped
};

/// e^{tM} by uniformization for M with nonnegative off-diagonal, nonpositive
/// diagonal and column sums <= 0 (Markovian or sub-Markovian). Writing
/// M = gamma (P - I) with P = I + M/gamma entrywise nonnegative, the series
/// sum_k e^{-gamma t} (gamma t)^k / k! P^k has nonnegative terms only, so the
/// result inherits nonnegativity and column sums <= 1 (== 1 when Markovian).
inline Propagator expm_uniformized(const Mat<double>& m, double t,
                                   double tau_exp = tol::exp_tail, long k_max = 1000000) {
    if (t < 0) throw ValidationError("propagation time must be nonnegative");
    const int n = m.dim();
    Propagator out;
    out.time = t;

    double gamma = 0;
    for (int i = 0; i < n; ++i) gamma = std::max(gamma, std::fabs(m(i, i)));
    const double lambda = gamma * t;
    if (lambda == 0) {
        out.matrix = Mat<double>::identity(n);
        out.truncation_bound = 0;
        return out;
    }

    Mat<double> p = Mat<double>::identity(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) p(r, c) += m(r, c) / gamma;

    // Poisson window [k_lo, k_hi] around the mode. The window is grown until
    // rigorous geometric tail bounds fall under tau_exp; a summed float mass
    // alone cannot certify 1e-12 at large lambda because of lgamma rounding.
    auto logw = [&](long k) { return -lambda + k * std::log(lambda) - std::lgamma(double(k) + 1.0); };
    const long mode = static_cast<long>(lambda);
    long k_lo = mode, k_hi = mode;
    // sum_{m<k} w_m <= w_{k-1} / (1 - (k-1)/lambda); ratios only shrink downward
    auto lower_tail = [&] {
        if (k_lo == 0) return 0.0;
        return std::exp(logw(k_lo - 1)) / (1.0 - double(k_lo - 1) / lambda);
    };
    // sum_{m>k} w_m <= w_{k+1} / (1 - lambda/(k+2)); k_hi >= floor(lambda)
    auto upper_tail = [&] {
        return std::exp(logw(k_hi + 1)) / (1.0 - lambda / double(k_hi + 2));
    };
    double lo_bound = lower_tail(), hi_bound = upper_tail();
    while (lo_bound + hi_bound > tau_exp) {
        if (lo_bound >= hi_bound)
            --k_lo;
        else
            ++k_hi;
        lo_bound = lower_tail();
        hi_bound = upper_tail();
        if (k_hi - k_lo > k_max)
            throw NumericError("uniformization window exceeds k_max; use larger tau_exp or smaller t");
    }

    // P^{k_lo} by binary exponentiation, then accumulate the window.
    Mat<double> pk = Mat<double>::identity(n);
    {
        Mat<double> base = p;
        long e = k_lo;
        while (e > 0) {
            if (e & 1) pk = pk * base;
            base = base * base;
            e >>= 1;
        }
    }
    Mat<double> acc = pk.scaled(std::exp(logw(k_lo)));
    for (long k = k_lo + 1; k <= k_hi; ++k) {
        pk = p * pk;
        acc += pk.scaled(std::exp(logw(k)));
    }
    out.matrix = std::move(acc);
    out.truncation_bound = lo_bound + hi_bound;
    return out;
}

/// e^{tA} for a Markovian generator; entries >= 0, columns sum to 1 within tau_prop.
inline Propagator propagate(const Generator& gen, double t,
                            double tau_exp = tol::exp_tail, long k_max = 1000000) {
    return expm_uniformized(gen.a, t, tau_exp, k_max);
}

/// Response function R_ij(t) = <e_j, e^{tA} e_i>.
inline double response_value(const Propagator& prop, int i, int j) {
    return prop.matrix(j, i);
}

}  // namespace dbnet
