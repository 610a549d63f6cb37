// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dbnet/errors.hpp"
#include "dbnet/rational.hpp"

namespace dbnet {

/// Dense square matrix, row-major. Sized for reaction networks (L up to a few
/// hundred), so no sparsity and no allocation tricks.
template <typename T>
class Mat {
  public:
    Mat() : n_(0) {}
    explicit Mat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, T(0)) {}

    static Mat identity(int n) {
        Mat m(n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    int dim() const { return n_; }

    T& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * n_ + c]; }
    const T& operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * n_ + c]; }

    bool operator==(const Mat& o) const { return n_ == o.n_ && a_ == o.a_; }

    std::vector<T> apply(const std::vector<T>& v) const {
        std::vector<T> out(n_, T(0));
        for (int r = 0; r < n_; ++r) {
            T acc(0);
            for (int c = 0; c < n_; ++c) acc += (*this)(r, c) * v[c];
            out[r] = acc;
        }
        return out;
    }

    Mat operator*(const Mat& o) const {
        Mat out(n_);
        for (int r = 0; r < n_; ++r)
            for (int k = 0; k < n_; ++k) {
                const T& f = (*this)(r, k);
                if (f == T(0)) continue;
                for (int c = 0; c < n_; ++c) out(r, c) += f * o(k, c);
            }
        return out;
    }

    Mat& operator+=(const Mat& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }

    Mat operator+(const Mat& o) const {
        Mat out = *this;
        out += o;
        return out;
    }

    Mat scaled(const T& s) const {
        Mat out = *this;
        for (auto& x : out.a_) x *= s;
        return out;
    }

  private:
    int n_;
    std::vector<T> a_;
};

namespace detail {
inline double mag(double x) { return std::fabs(x); }
inline Rational mag(const Rational& x) { return x < 0 ? Rational(-x) : x; }
}  // namespace detail

/// Max absolute row sum (operator infinity norm).
inline double inf_norm(const Mat<double>& m) {
    double best = 0;
    for (int r = 0; r < m.dim(); ++r) {
        double s = 0;
        for (int c = 0; c < m.dim(); ++c) s += std::fabs(m(r, c));
        best = std::max(best, s);
    }
    return best;
}

inline double inf_norm(const std::vector<double>& v) {
    double best = 0;
    for (double x : v) best = std::max(best, std::fabs(x));
    return best;
}

/// Solve A x = b by Gaussian elimination with partial pivoting. Works for
/// double and for exact rationals (where pivoting by magnitude is merely a
/// deterministic choice, not a stability need).
template <typename T>
std::vector<T> lu_solve(Mat<T> a, std::vector<T> b) {
    const int n = a.dim();
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (detail::mag(a(r, col)) > detail::mag(a(pivot, col))) pivot = r;
        if (a(pivot, col) == T(0)) throw NumericError("singular matrix in linear solve");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
            std::swap(b[pivot], b[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            if (a(r, col) == T(0)) continue;
            T f = a(r, col) / a(col, col);
            a(r, col) = T(0);
            for (int c = col + 1; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<T> x(n, T(0));
    for (int r = n - 1; r >= 0; --r) {
        T acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a(r, c) * x[c];
        x[r] = acc / a(r, r);
    }
    return x;
}

inline Mat<double> to_double(const Mat<Rational>& m) {
    Mat<double> out(m.dim());
    for (int r = 0; r < m.dim(); ++r)
        for (int c = 0; c < m.dim(); ++c) out(r, c) = m(r, c).get_d();
    return out;
}

}  // namespace dbnet
