#include "flipflop/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace ff {

Rational parse_rational(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    s = s.substr(start);
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
        Rational r = num / den;
        r.canonicalize();
        return r;
    }

    size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
        neg = s[i] == '-';
        ++i;
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) ++frac_digits;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw std::invalid_argument("malformed rational literal '" + s + "'");
    long exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw std::invalid_argument("malformed rational literal '" + s + "'");
        ++i;
        size_t used = 0;
        try {
            exponent = std::stol(s.substr(i), &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed exponent in '" + s + "'");
        }
        if (i + used != s.size()) throw std::invalid_argument("malformed rational literal '" + s + "'");
    }
    mpz_class num(digits, 10);
    long e10 = exponent - frac_digits;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(e10 < 0 ? -e10 : e10));
    Rational r = e10 < 0 ? Rational(num, pow10) : Rational(num * pow10);
    r.canonicalize();
    return neg ? Rational(-r) : r;
}

Rational rational_from_double(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value has no rational form");
    Rational r;
    mpq_set_d(r.get_mpq_t(), v);
    return r;
}

Interval enclose(const Rational& q) {
    double d = q.get_d();  // truncates toward zero
    Rational back = rational_from_double(d);
    if (back == q) return {d, d};
    if (back < q) return {d, detail::up(d)};
    return {detail::down(d), d};
}

double nearest_double(const Rational& q) {
    Interval e = enclose(q);
    if (e.is_point()) return e.lo;
    Rational lo_gap = q - rational_from_double(e.lo), hi_gap = rational_from_double(e.hi) - q;
    if (lo_gap != hi_gap) return lo_gap < hi_gap ? e.lo : e.hi;
    // ties go to the even significand
    std::int64_t bits;
    std::memcpy(&bits, &e.lo, sizeof bits);
    return (bits & 1) == 0 ? e.lo : e.hi;
}

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace ff
