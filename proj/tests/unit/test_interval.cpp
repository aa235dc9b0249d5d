#include <mpfr.h>

#include <cmath>

#include "doctest.h"
#include "flipflop/big_interval.hpp"
#include "flipflop/interval.hpp"
#include "flipflop/rational.hpp"
#include "gen.hpp"

using namespace ff;

namespace {

bool encloses(const Interval& a, const Rational& q) {
    return rational_from_double(a.lo) <= q && q <= rational_from_double(a.hi);
}

// log(x) at 256 bits, rounded to nearest; independent of the interval code.
double mpfr_log(double x, mpfr_rnd_t rnd) {
    mpfr_t v;
    mpfr_init2(v, 256);
    mpfr_set_d(v, x, MPFR_RNDN);
    mpfr_log(v, v, rnd);
    double r = mpfr_get_d(v, rnd);
    mpfr_clear(v);
    return r;
}

}  // namespace

TEST_CASE("interval arithmetic encloses the exact rational result") {
    gen::Engine g(11);
    for (int i = 0; i < 5000; ++i) {
        double a = gen::wide_double(g), b = gen::wide_double(g);
        Rational qa = rational_from_double(a), qb = rational_from_double(b);
        CAPTURE(a);
        CAPTURE(b);
        CHECK(encloses(Interval{a} + Interval{b}, qa + qb));
        CHECK(encloses(Interval{a} - Interval{b}, qa - qb));
        CHECK(encloses(Interval{a} * Interval{b}, qa * qb));
        CHECK(encloses(Interval{a} / Interval{b}, qa / qb));
    }
}

TEST_CASE("interval operations on wide operands cover every endpoint combination") {
    gen::Engine g(12);
    for (int i = 0; i < 2000; ++i) {
        Interval a = Interval::hull(gen::wide_double(g), gen::wide_double(g));
        Interval b = Interval::hull(gen::wide_double(g), gen::wide_double(g));
        Interval p = a * b;
        for (double x : {a.lo, a.hi})
            for (double y : {b.lo, b.hi}) CHECK(encloses(p, rational_from_double(x) * rational_from_double(y)));
        if (b.lo > 0 || b.hi < 0) {
            Interval d = a / b;
            for (double x : {a.lo, a.hi})
                for (double y : {b.lo, b.hi}) CHECK(encloses(d, rational_from_double(x) / rational_from_double(y)));
        }
    }
}

TEST_CASE("log and sqrt enclosures contain the correctly rounded values") {
    gen::Engine g(13);
    for (int i = 0; i < 2000; ++i) {
        double x = std::fabs(gen::wide_double(g));
        Interval l = log(Interval{x});
        CHECK(l.lo <= mpfr_log(x, MPFR_RNDD));
        CHECK(mpfr_log(x, MPFR_RNDU) <= l.hi);
        Interval s = sqrt(Interval{x});
        Rational q = rational_from_double(x);
        CHECK(rational_from_double(s.lo) * rational_from_double(s.lo) <= q);
        CHECK(q <= rational_from_double(s.hi) * rational_from_double(s.hi));
    }
}

TEST_CASE("certified comparisons are strict about overlap") {
    CHECK(certainly_lt(Interval{0, 1}, Interval{1.5, 2}));
    CHECK_FALSE(certainly_lt(Interval{0, 1}, Interval{1, 2}));
    CHECK(certainly_le(Interval{0, 1}, Interval{1, 2}));
    CHECK_FALSE(certainly_gt(Interval{0, 3}, Interval{1, 2}));
    CHECK(abs(Interval{-3, 2}) == Interval{0, 3});
    CHECK(to_string_interval(Interval{-0.5, 0.25}) == "[-0.5, 0.25]");
}

TEST_CASE("rational parsing and rounding") {
    CHECK(parse_rational("1.05") == Rational(21, 20));
    CHECK(parse_rational("-7/8") == Rational(-7, 8));
    CHECK(parse_rational("2.5e-3") == Rational(1, 400));
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational("abc"));

    gen::Engine g(14);
    for (int i = 0; i < 5000; ++i) {
        long p = static_cast<long>(gen::integer(g, -1'000'000, 1'000'000));
        long q = static_cast<long>(gen::integer(g, 1, 1'000'000));
        Rational r(p, static_cast<unsigned long>(q));
        r.canonicalize();
        // IEEE division is correctly rounded, ties to even
        CHECK(nearest_double(r) == static_cast<double>(p) / static_cast<double>(q));
        Interval e = enclose(r);
        CHECK(encloses(e, r));
        CHECK((e.is_point() || std::nextafter(e.lo, INFINITY) == e.hi));
    }
}

TEST_CASE("big intervals track affine recurrences exactly enough") {
    gen::Engine g(15);
    for (int i = 0; i < 200; ++i) {
        Rational x = gen::small_rational(g, 100, 97);
        BigInterval b(x, 128);
        for (int step = 0; step < 40; ++step) {
            // contracting and expanding steps alike, magnitude at most 3/2
            Rational a(static_cast<long>(gen::integer(g, -15, 15)), 10UL), c = gen::small_rational(g, 30, 11);
            a.canonicalize();
            x = x * a + c;
            b.affine(a, c);
        }
        CHECK(b.lo_rational() <= x);
        CHECK(x <= b.hi_rational());
        CHECK(b.certainly_ge(x - 1));
        CHECK(b.certainly_le(x + 1));
    }
}
