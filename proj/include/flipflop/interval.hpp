#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ff {

// Closed interval with double endpoints. Operations round outward using
// error-free transforms, so results that are exactly representable stay
// point intervals and inexact ones widen by a single ulp on the correct side.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr Interval() = default;
    constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT: implicit point interval
    constexpr Interval(double l, double h) : lo(l), hi(h) {}

    static Interval hull(double a, double b) { return a <= b ? Interval{a, b} : Interval{b, a}; }
    static Interval entire() {
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }

    double width() const { return hi - lo; }
    double mid() const { return lo + 0.5 * (hi - lo); }
    double mag() const { return std::fmax(std::fabs(lo), std::fabs(hi)); }
    bool is_point() const { return lo == hi; }
    bool contains(double v) const { return lo <= v && v <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool subset_of(double a, double b) const { return a <= lo && hi <= b; }
    bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
    bool valid() const { return lo <= hi; }
};

namespace detail {

inline double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }
inline double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }

// Rounded-to-nearest sum s of a+b, widened toward the exact value.
inline void add_bounds(double a, double b, double& lo, double& hi) {
    double s = a + b;
    if (!std::isfinite(s)) {
        lo = std::isnan(s) ? -std::numeric_limits<double>::infinity() : s;
        hi = std::isnan(s) ? std::numeric_limits<double>::infinity() : s;
        return;
    }
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    lo = err < 0 ? down(s) : s;
    hi = err > 0 ? up(s) : s;
}

inline void mul_bounds(double a, double b, double& lo, double& hi) {
    double p = a * b;
    if (!std::isfinite(p) || p == 0.0) {
        // underflow to zero may hide a tiny nonzero product
        if (p == 0.0 && a != 0.0 && b != 0.0) {
            lo = down(0.0);
            hi = up(0.0);
            return;
        }
        lo = hi = p;
        return;
    }
    double err = std::fma(a, b, -p);
    lo = err < 0 ? down(p) : p;
    hi = err > 0 ? up(p) : p;
    if (std::fabs(p) < 1e-290) {
        lo = down(lo);
        hi = up(hi);
    }
}

inline void div_bounds(double a, double b, double& lo, double& hi) {
    double q = a / b;
    if (!std::isfinite(q) || q == 0.0) {
        if (q == 0.0 && a != 0.0) {
            lo = down(0.0);
            hi = up(0.0);
            return;
        }
        lo = hi = q;
        return;
    }
    // a - q*b is exact for normal operands; its sign relative to b fixes the side
    double r = std::fma(-q, b, a);
    double dir = (b > 0) ? r : -r;
    lo = dir < 0 ? down(q) : q;
    hi = dir > 0 ? up(q) : q;
    if (std::fabs(q) < 1e-290) {
        lo = down(lo);
        hi = up(hi);
    }
}

}  // namespace detail

inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator+(const Interval& a, const Interval& b) {
    double l, h, t;
    detail::add_bounds(a.lo, b.lo, l, t);
    detail::add_bounds(a.hi, b.hi, t, h);
    return {l, h};
}

inline Interval operator-(const Interval& a, const Interval& b) { return a + (-b); }

inline Interval operator*(const Interval& a, const Interval& b) {
    double c[4][2];
    detail::mul_bounds(a.lo, b.lo, c[0][0], c[0][1]);
    detail::mul_bounds(a.lo, b.hi, c[1][0], c[1][1]);
    detail::mul_bounds(a.hi, b.lo, c[2][0], c[2][1]);
    detail::mul_bounds(a.hi, b.hi, c[3][0], c[3][1]);
    double l = c[0][0], h = c[0][1];
    for (int i = 1; i < 4; ++i) {
        l = std::fmin(l, c[i][0]);
        h = std::fmax(h, c[i][1]);
    }
    return {l, h};
}

inline Interval operator/(const Interval& a, const Interval& b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) return Interval::entire();
    double c[4][2];
    detail::div_bounds(a.lo, b.lo, c[0][0], c[0][1]);
    detail::div_bounds(a.lo, b.hi, c[1][0], c[1][1]);
    detail::div_bounds(a.hi, b.lo, c[2][0], c[2][1]);
    detail::div_bounds(a.hi, b.hi, c[3][0], c[3][1]);
    double l = c[0][0], h = c[0][1];
    for (int i = 1; i < 4; ++i) {
        l = std::fmin(l, c[i][0]);
        h = std::fmax(h, c[i][1]);
    }
    return {l, h};
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }
inline Interval& operator/=(Interval& a, const Interval& b) { return a = a / b; }

inline bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }

inline Interval hull(const Interval& a, const Interval& b) {
    return {std::fmin(a.lo, b.lo), std::fmax(a.hi, b.hi)};
}

inline Interval abs(const Interval& a) {
    if (a.lo >= 0) return a;
    if (a.hi <= 0) return -a;
    return {0.0, std::fmax(-a.lo, a.hi)};
}

// Widen an approximate libm result by k ulps on each side.
inline Interval widen_ulps(double v, int k) {
    Interval r{v, v};
    for (int i = 0; i < k; ++i) {
        r.lo = detail::down(r.lo);
        r.hi = detail::up(r.hi);
    }
    return r;
}

inline Interval log(const Interval& a) {
    if (a.lo <= 0) throw std::domain_error("log of non-positive interval");
    Interval l = widen_ulps(std::log(a.lo), 2);
    Interval h = widen_ulps(std::log(a.hi), 2);
    return {l.lo, h.hi};
}

inline Interval exp(const Interval& a) {
    Interval l = widen_ulps(std::exp(a.lo), 2);
    Interval h = widen_ulps(std::exp(a.hi), 2);
    return {std::fmax(0.0, l.lo), h.hi};
}

inline Interval sqrt(const Interval& a) {
    if (a.lo < 0) throw std::domain_error("sqrt of negative interval");
    // sqrt is correctly rounded, one ulp suffices
    return {a.lo == 0 ? 0.0 : detail::down(std::sqrt(a.lo)), detail::up(std::sqrt(a.hi))};
}

// x^(-p) for x > 0 and real p > 0, monotone decreasing in x.
inline Interval pow_neg(const Interval& x, double p) {
    if (x.lo <= 0) throw std::domain_error("pow_neg of non-positive interval");
    Interval at_lo = widen_ulps(std::pow(x.lo, -p), 3);
    Interval at_hi = widen_ulps(std::pow(x.hi, -p), 3);
    return {std::fmax(0.0, at_hi.lo), at_lo.hi};
}

// Certified comparisons: true only when every point of the enclosure satisfies the relation.
inline bool certainly_lt(const Interval& a, const Interval& b) { return a.hi < b.lo; }
inline bool certainly_le(const Interval& a, const Interval& b) { return a.hi <= b.lo; }
inline bool certainly_gt(const Interval& a, const Interval& b) { return a.lo > b.hi; }
inline bool certainly_ge(const Interval& a, const Interval& b) { return a.lo >= b.hi; }

inline std::ostream& operator<<(std::ostream& os, const Interval& a) {
    return os << '[' << a.lo << ", " << a.hi << ']';
}

std::string to_string_interval(const Interval& a);

}  // namespace ff
