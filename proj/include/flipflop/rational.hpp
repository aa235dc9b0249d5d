#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "flipflop/interval.hpp"

namespace ff {

using Rational = mpq_class;

// Parse "3", "-7/8", "1.05", "2.5e-3" into an exact rational.
Rational parse_rational(std::string_view text);

// Exact decimal double to rational (every finite double is a dyadic rational).
Rational rational_from_double(double v);

// Round to nearest, ties to even.
double nearest_double(const Rational& q);

// Smallest enclosing interval with double endpoints.
Interval enclose(const Rational& q);

std::string to_string(const Rational& q);

inline Rational rabs(const Rational& q) { return q < 0 ? Rational(-q) : q; }
inline Rational rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace ff
