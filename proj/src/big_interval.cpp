#include "flipflop/big_interval.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace ff {

namespace {

int cmp_q(const mpfr_t x, const Rational& q) { return mpfr_cmp_q(x, q.get_mpq_t()); }

}  // namespace

BigInterval::BigInterval(mpfr_prec_t prec) : prec_(prec) {
    mpfr_init2(lo_, prec_);
    mpfr_init2(hi_, prec_);
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
}

BigInterval::BigInterval(const Rational& q, mpfr_prec_t prec) : BigInterval(prec) { set(q); }

BigInterval::BigInterval(const BigInterval& o) : prec_(o.prec_) {
    mpfr_init2(lo_, prec_);
    mpfr_init2(hi_, prec_);
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
}

BigInterval::BigInterval(BigInterval&& o) noexcept : BigInterval(o) {}

BigInterval& BigInterval::operator=(const BigInterval& o) {
    if (this == &o) return *this;
    if (prec_ != o.prec_) {
        prec_ = o.prec_;
        mpfr_set_prec(lo_, prec_);
        mpfr_set_prec(hi_, prec_);
    }
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
    return *this;
}

BigInterval& BigInterval::operator=(BigInterval&& o) noexcept {
    if (this != &o) {
        mpfr_swap(lo_, o.lo_);
        mpfr_swap(hi_, o.hi_);
        std::swap(prec_, o.prec_);
    }
    return *this;
}

BigInterval::~BigInterval() {
    mpfr_clear(lo_);
    mpfr_clear(hi_);
}

void BigInterval::set(const Rational& q) {
    mpfr_set_q(lo_, q.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(hi_, q.get_mpq_t(), MPFR_RNDU);
}

void BigInterval::affine(const Rational& q, const Rational& r) {
    mpfr_t a, b;
    mpfr_init2(a, prec_);
    mpfr_init2(b, prec_);
    if (q >= 0) {
        mpfr_mul_q(a, lo_, q.get_mpq_t(), MPFR_RNDD);
        mpfr_mul_q(b, hi_, q.get_mpq_t(), MPFR_RNDU);
    } else {
        mpfr_mul_q(a, hi_, q.get_mpq_t(), MPFR_RNDD);
        mpfr_mul_q(b, lo_, q.get_mpq_t(), MPFR_RNDU);
    }
    mpfr_add_q(lo_, a, r.get_mpq_t(), MPFR_RNDD);
    mpfr_add_q(hi_, b, r.get_mpq_t(), MPFR_RNDU);
    mpfr_clear(a);
    mpfr_clear(b);
}

void BigInterval::add_scaled(const BigInterval& o, const Rational& q) {
    mpfr_t a, b;
    mpfr_init2(a, prec_);
    mpfr_init2(b, prec_);
    if (q >= 0) {
        mpfr_mul_q(a, o.lo_, q.get_mpq_t(), MPFR_RNDD);
        mpfr_mul_q(b, o.hi_, q.get_mpq_t(), MPFR_RNDU);
    } else {
        mpfr_mul_q(a, o.hi_, q.get_mpq_t(), MPFR_RNDD);
        mpfr_mul_q(b, o.lo_, q.get_mpq_t(), MPFR_RNDU);
    }
    mpfr_add(lo_, lo_, a, MPFR_RNDD);
    mpfr_add(hi_, hi_, b, MPFR_RNDU);
    mpfr_clear(a);
    mpfr_clear(b);
}

bool BigInterval::certainly_ge(const Rational& q) const { return cmp_q(lo_, q) >= 0; }
bool BigInterval::certainly_le(const Rational& q) const { return cmp_q(hi_, q) <= 0; }
bool BigInterval::certainly_lt(const Rational& q) const { return cmp_q(hi_, q) < 0; }
bool BigInterval::certainly_gt(const Rational& q) const { return cmp_q(lo_, q) > 0; }

Interval BigInterval::to_interval() const {
    return {mpfr_get_d(lo_, MPFR_RNDD), mpfr_get_d(hi_, MPFR_RNDU)};
}

double BigInterval::mag_up() const {
    double a = mpfr_get_d(lo_, MPFR_RNDD);
    double b = mpfr_get_d(hi_, MPFR_RNDU);
    return std::fmax(std::fabs(a), std::fabs(b));
}

double BigInterval::width_up() const {
    mpfr_t w;
    mpfr_init2(w, prec_);
    mpfr_sub(w, hi_, lo_, MPFR_RNDU);
    double d = mpfr_get_d(w, MPFR_RNDU);
    mpfr_clear(w);
    return d;
}

BigInterval operator+(const BigInterval& a, const BigInterval& b) {
    BigInterval r(std::max(a.prec_, b.prec_));
    mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
}

BigInterval operator-(const BigInterval& a, const BigInterval& b) {
    BigInterval r(std::max(a.prec_, b.prec_));
    mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
    mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
    return r;
}

BigInterval abs_hull(const BigInterval& a) {
    BigInterval r(a.prec_);
    if (mpfr_sgn(a.lo_) >= 0) return a;
    if (mpfr_sgn(a.hi_) <= 0) {
        mpfr_neg(r.lo_, a.hi_, MPFR_RNDD);
        mpfr_neg(r.hi_, a.lo_, MPFR_RNDU);
        return r;
    }
    mpfr_set_zero(r.lo_, 1);
    if (mpfr_cmpabs(a.lo_, a.hi_) > 0)
        mpfr_neg(r.hi_, a.lo_, MPFR_RNDU);
    else
        mpfr_set(r.hi_, a.hi_, MPFR_RNDU);
    return r;
}

Rational BigInterval::lo_rational() const {
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), lo_);
    Rational r(m);
    if (e >= 0)
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    else
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    return r;
}

Rational BigInterval::hi_rational() const {
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), hi_);
    Rational r(m);
    if (e >= 0)
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    else
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    return r;
}

}  // namespace ff
