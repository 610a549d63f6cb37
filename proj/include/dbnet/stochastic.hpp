// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "dbnet/numerics.hpp"
#include "dbnet/philox.hpp"

namespace dbnet {

struct Trajectory {
    std::vector<double> jump_times;
    std::vector<int> states;  // visited states; one longer than jump_times
    int initial_state = 0;
    std::uint64_t rng_seed = 0;
};

namespace detail {

/// One jump of the chain from state s: exponential holding time with rate
/// |A_ss|, next state proportional to the off-diagonal column entries.
inline std::pair<double, int> jump(const Generator& gen, int s, RngStream& rng) {
    double exit = -gen.a(s, s);
    if (!(exit > 0)) throw NumericError("trajectory reached a state with zero exit rate");
    double dt = rng.exponential(exit);
    double u = rng.next_open() * exit;
    double acc = 0;
    int next = -1;
    for (int k = 0; k < gen.dim; ++k) {
        if (k == s) continue;
        acc += gen.a(k, s);
        if (u <= acc) {
            next = k;
            break;
        }
    }
    if (next < 0) {  // rounding fell off the end; take the last positive rate
        for (int k = gen.dim - 1; k >= 0; --k)
            if (k != s && gen.a(k, s) > 0) {
                next = k;
                break;
            }
    }
    return {dt, next};
}

}  // namespace detail

/// Jump-chain simulation up to the horizon; byte-identical for a fixed
/// (seed, stream).
inline Trajectory simulate(const Generator& gen, int start, double horizon, std::uint64_t seed,
                           std::uint64_t stream = 0) {
    if (!(horizon > 0)) throw ValidationError("horizon must be positive");
    Trajectory out;
    out.initial_state = start;
    out.rng_seed = seed;
    out.states.push_back(start);
    RngStream rng(seed, stream);
    double t = 0;
    int s = start;
    while (true) {
        auto [dt, next] = detail::jump(gen, s, rng);
        t += dt;
        if (t > horizon) break;
        out.jump_times.push_back(t);
        out.states.push_back(next);
        s = next;
    }
    return out;
}

struct ResponseEstimate {
    std::pair<int, int> pair{0, 0};
    std::vector<double> times;
    std::vector<double> estimates;
    std::vector<double> half_widths;  // 1.96 sqrt(p(1-p)/N)
    long samples = 0;
};

/// Monte Carlo R_ij on a time grid from independent trajectories started in i.
/// Work is partitioned by trajectory index over `workers` threads; counts are
/// integers, so the result is identical for any worker count.
inline ResponseEstimate estimate_response_iid(const Generator& gen, int i, int j,
                                              std::vector<double> times, long samples,
                                              std::uint64_t seed, int workers = 1) {
    if (samples < 100) throw ValidationError("need at least 100 samples");
    std::sort(times.begin(), times.end());
    const std::size_t grid = times.size();

    auto run_range = [&](long lo, long hi, std::vector<long>& counts) {
        counts.assign(grid, 0);
        for (long k = lo; k < hi; ++k) {
            RngStream rng(seed, static_cast<std::uint64_t>(k));
            int s = i;
            double t = 0;
            std::size_t g = 0;
            while (g < grid) {
                auto [dt, next] = detail::jump(gen, s, rng);
                double t_next = t + dt;
                while (g < grid && times[g] < t_next) {
                    if (s == j) ++counts[g];
                    ++g;
                }
                t = t_next;
                s = next;
            }
        }
    };

    workers = std::max(1, workers);
    std::vector<std::vector<long>> partial(workers);
    if (workers == 1) {
        run_range(0, samples, partial[0]);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        long chunk = (samples + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            long lo = w * chunk, hi = std::min(samples, lo + chunk);
            pool.emplace_back([&, lo, hi, w] {
                try {
                    run_range(lo, hi, partial[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    ResponseEstimate out;
    out.pair = {i, j};
    out.times = times;
    out.samples = samples;
    for (std::size_t g = 0; g < grid; ++g) {
        long c = 0;
        for (const auto& p : partial) c += p.empty() ? 0 : p[g];
        double est = static_cast<double>(c) / static_cast<double>(samples);
        out.estimates.push_back(est);
        out.half_widths.push_back(1.96 * std::sqrt(est * (1.0 - est) / static_cast<double>(samples)));
    }
    return out;
}

struct RegenerativeEstimate {
    double r_ij_t1 = 0, r_ij_t2 = 0;
    double r_ji_t1 = 0, r_ji_t2 = 0;
    double ratio_test_p = 1;  // H0: R_ij(t1)/R_ji(t1) == R_ij(t2)/R_ji(t2)
    long cycles = 0;
    // per-cycle indicators, for diagnostics and independence tests
    std::vector<std::uint8_t> ij_t1, ij_t2, ji_t1, ji_t2;
};

namespace detail {

/// Run `cycles` regeneration cycles rooted at `root`, measuring 1{X_t == probe}
/// at t1 and t2 on one evolving realization. Regeneration is the first jump
/// into `root` after t2; if the chain already sits there at t2 the next cycle
/// starts immediately (valid restart by the strong Markov property).
inline void regenerative_cycles(const Generator& gen, int root, int probe, double t1, double t2,
                                long cycles, RngStream& rng, std::vector<std::uint8_t>& b1,
                                std::vector<std::uint8_t>& b2) {
    for (long k = 0; k < cycles; ++k) {
        int s = root;
        double t = 0;
        bool m1 = false, m2 = false;
        while (true) {
            auto [dt, next] = jump(gen, s, rng);
            double t_next = t + dt;
            if (!m1 && t1 < t_next) {
                b1.push_back(s == probe);
                m1 = true;
            }
            if (!m2 && t2 < t_next) {
                b2.push_back(s == probe);
                m2 = true;
            }
            if (m2 && s == root) break;      // already home at t2
            if (m2 && next == root) break;   // first entrance after t2
            t = t_next;
            s = next;
        }
    }
}

/// Wait until the chain first enters `target`, continuing the same stream.
inline void run_until_state(const Generator& gen, int& s, int target, RngStream& rng) {
    while (s != target) {
        auto [dt, next] = jump(gen, s, rng);
        (void)dt;
        s = next;
    }
}

inline double mean01(const std::vector<std::uint8_t>& v) {
    double s = 0;
    for (auto b : v) s += b;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace detail

/// The single-realization protocol: measure at t1, wait to t2 and measure,
/// regenerate at the root state, repeat; then swap the roles of i and j on the
/// same realization. The ratio test is a delta-method z-test on
/// log(p1/q1) - log(p2/q2) with the empirical covariance of the shared-cycle
/// measurements and Anscombe-corrected proportions inside the statistic.
inline RegenerativeEstimate estimate_response_regenerative(const Generator& gen, int i, int j,
                                                           double t1, double t2, long cycles,
                                                           std::uint64_t seed) {
    if (!(0 < t1 && t1 < t2)) throw ValidationError("need 0 < t1 < t2");
    if (cycles < 100) throw ValidationError("need at least 100 cycles");

    RegenerativeEstimate out;
    out.cycles = cycles;
    RngStream rng(seed, 0);
    detail::regenerative_cycles(gen, i, j, t1, t2, cycles, rng, out.ij_t1, out.ij_t2);
    int s = i;
    detail::run_until_state(gen, s, j, rng);
    detail::regenerative_cycles(gen, j, i, t1, t2, cycles, rng, out.ji_t1, out.ji_t2);

    out.r_ij_t1 = detail::mean01(out.ij_t1);
    out.r_ij_t2 = detail::mean01(out.ij_t2);
    out.r_ji_t1 = detail::mean01(out.ji_t1);
    out.r_ji_t2 = detail::mean01(out.ji_t2);

    const double n = static_cast<double>(cycles);
    auto corrected = [&](const std::vector<std::uint8_t>& v) {
        double s01 = 0;
        for (auto b : v) s01 += b;
        return (s01 + 0.5) / (n + 1.0);
    };
    auto cov01 = [&](const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
        double s01 = 0;
        for (long k = 0; k < cycles; ++k) s01 += a[k] && b[k];
        return s01 / n - detail::mean01(a) * detail::mean01(b);
    };
    double p1 = corrected(out.ij_t1), p2 = corrected(out.ij_t2);
    double q1 = corrected(out.ji_t1), q2 = corrected(out.ji_t2);
    double d = std::log(p1) - std::log(q1) - std::log(p2) + std::log(q2);
    double var_p = (p1 * (1 - p1) / (p1 * p1) + p2 * (1 - p2) / (p2 * p2) -
                    2 * cov01(out.ij_t1, out.ij_t2) / (p1 * p2)) / n;
    double var_q = (q1 * (1 - q1) / (q1 * q1) + q2 * (1 - q2) / (q2 * q2) -
                    2 * cov01(out.ji_t1, out.ji_t2) / (q1 * q2)) / n;
    double se = std::sqrt(std::max(var_p + var_q, 1e-300));
    double z = d / se;
    out.ratio_test_p = std::erfc(std::fabs(z) / std::sqrt(2.0));
    return out;
}

}  // namespace dbnet
