#pragma once

#include <mpfr.h>

#include "flipflop/interval.hpp"
#include "flipflop/rational.hpp"

namespace ff {

// Interval with MPFR endpoints at a fixed working precision. Used where
// errors are amplified exponentially (the spawner's center offsets under
// repeated expansion by lambda), so double endpoints would lose all meaning.
class BigInterval {
public:
    explicit BigInterval(mpfr_prec_t prec = 128);
    BigInterval(const Rational& q, mpfr_prec_t prec);
    BigInterval(const BigInterval& o);
    BigInterval(BigInterval&& o) noexcept;
    BigInterval& operator=(const BigInterval& o);
    BigInterval& operator=(BigInterval&& o) noexcept;
    ~BigInterval();

    mpfr_prec_t precision() const { return prec_; }

    void set(const Rational& q);
    // this = this * q + r, outward rounded, for rationals q and r
    void affine(const Rational& q, const Rational& r);
    // this = this + o * q
    void add_scaled(const BigInterval& o, const Rational& q);

    // Certified comparisons against rationals.
    bool certainly_ge(const Rational& q) const;
    bool certainly_le(const Rational& q) const;
    bool possibly_ge(const Rational& q) const { return !certainly_lt(q); }
    bool certainly_lt(const Rational& q) const;
    bool certainly_gt(const Rational& q) const;

    // Outward double enclosure.
    Interval to_interval() const;
    // Magnitude upper bound as a double.
    double mag_up() const;
    double width_up() const;

    friend BigInterval operator+(const BigInterval& a, const BigInterval& b);
    friend BigInterval operator-(const BigInterval& a, const BigInterval& b);
    friend BigInterval abs_hull(const BigInterval& a);
    // lo, hi access as rationals (exact conversion of the MPFR endpoints)
    Rational lo_rational() const;
    Rational hi_rational() const;

private:
    mpfr_prec_t prec_;
    mpfr_t lo_;
    mpfr_t hi_;
};

}  // namespace ff
