// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gmpxx.h>

#include <cctype>
#include <string>

#include "dbnet/errors.hpp"

namespace dbnet {

/// Exact rational scalar. Network files carry decimal or p/q literals, both of
/// which convert losslessly; floats enter only in the numeric kernels.
using Rational = mpq_class;

namespace detail {

inline bool is_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace detail

/// Parse "p/q", integer, or decimal ("1.25", "3e-2") text into an exact rational.
inline Rational parse_rational(const std::string& text) {
    std::string s = text;
    if (s.empty()) throw ParseError("empty number literal");
    bool neg = false;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        s = s.substr(1);
    }
    auto fail = [&] { throw ParseError("malformed number literal '" + text + "'"); };

    Rational value;
    if (auto slash = s.find('/'); slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        if (!detail::is_digits(num) || !detail::is_digits(den)) fail();
        // base 10 explicitly: the default base 0 reads leading zeros as octal
        value = Rational(mpz_class(num, 10), mpz_class(den, 10));
        if (value.get_den() == 0) throw ParseError("zero denominator in '" + text + "'");
    } else {
        long exp10 = 0;
        if (auto e = s.find_first_of("eE"); e != std::string::npos) {
            std::string es = s.substr(e + 1);
            s = s.substr(0, e);
            try {
                exp10 = std::stol(es);
            } catch (const std::exception&) {
                fail();
            }
        }
        std::string digits = s;
        if (auto dot = s.find('.'); dot != std::string::npos) {
            digits = s.substr(0, dot) + s.substr(dot + 1);
            exp10 -= static_cast<long>(s.size() - dot - 1);
        }
        if (!detail::is_digits(digits)) fail();
        value = Rational(mpz_class(digits, 10));
        mpz_class pow10;
        mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
        if (exp10 >= 0)
            value *= Rational(pow10);
        else
            value /= Rational(pow10);
    }
    value.canonicalize();
    return neg ? Rational(-value) : value;
}

/// Canonical text form: integer when the denominator is 1, else "p/q".
inline std::string format_rational(const Rational& q) {
    Rational c = q;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace dbnet
