// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace dbnet::tol {

inline constexpr double markov = 1e-12;     // per-column generator sum residual
inline constexpr double db = 1e-9;          // relative detailed-balance residual
inline constexpr double ss = 1e-12;         // steady-state residual, relative to ||A||
inline constexpr double norm = 1e-12;       // | ||N||_1 - 1 |
inline constexpr double exp_tail = 1e-12;   // Poisson tail mass kept out of e^{tA}
inline constexpr double prop = 1e-10;       // propagator column-stochasticity
inline constexpr double pdb = 1e-9;         // Delta_n, relative to N_i ||A||^n
inline constexpr double ratio = 1e-7;       // response-ratio constancy
inline constexpr double eps_floor = 1e-300; // guards relative residuals near 0/0

}  // namespace dbnet::tol
