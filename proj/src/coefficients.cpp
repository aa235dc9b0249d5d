#include "flipflop/coefficients.hpp"

#include <algorithm>

#include <cmath>
#include <string>

#include "flipflop/core.hpp"

namespace ff {

PowerLaw::PowerLaw(double amplitude, double exponent) : amplitude_(amplitude), exponent_(exponent) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw Error(ErrorKind::InvalidArgument, "long-range amplitude must be finite and non-negative");
    if (!(exponent > 1.0) || !std::isfinite(exponent))
        throw Error(ErrorKind::InvalidArgument, "long-range exponent must exceed 1 for summable coefficients");
}

Interval PowerLaw::coeff(std::uint64_t n) const {
    if (n == 0) return Interval{0.0};
    return Interval{amplitude_} * pow_neg(Interval{static_cast<double>(n + 1)}, exponent_);
}

Interval PowerLaw::progression_tail(std::uint64_t a, std::uint64_t step, double tol) const {
    if (a == 0 || step == 0) throw Error(ErrorKind::InvalidArgument, "progression must start at n >= 1 with step >= 1");
    if (amplitude_ == 0.0) return Interval{0.0};
    const double p = exponent_;
    const double P = static_cast<double>(step);
    // g(x) = A (b0 + x P)^(-p), b0 = a + 1; |g'''| drives the remainder bound
    const double b0 = static_cast<double>(a + 1);
    double third = amplitude_ * p * (p + 1) * (p + 2) * P * P * P;
    double x_needed = std::pow(0.0056 * third / tol, 1.0 / (p + 3));
    double x_start = std::fmax(std::fmax(x_needed, 16.0 * P), b0);
    double k_explicit = std::ceil((x_start - b0) / P);
    if (k_explicit > 5e7)
        throw Error(ErrorKind::ToleranceUnreachable,
                    "coefficients decay too slowly for tolerance " + std::to_string(tol));
    const std::uint64_t K = static_cast<std::uint64_t>(k_explicit);

    Interval sum{0.0};
    for (std::uint64_t k = 0; k < K; ++k) sum += coeff(a + k * step);

    const Interval A{amplitude_};
    const Interval x{b0 + static_cast<double>(K) * P};  // exact integer
    const Interval PI{P};
    Interval g = A * pow_neg(x, p);
    Interval integral = A * pow_neg(x, p - 1) / (PI * Interval{p - 1});
    Interval g1 = -(A * Interval{p} * PI * pow_neg(x, p + 1));
    Interval g3 = -(Interval{third} * pow_neg(x, p + 3));
    Interval em = integral + g / Interval{2.0} - g1 / Interval{12.0} + g3 / Interval{720.0};
    double rem = detail::up(0.0014 * g3.mag() * (1 + 1e-12));
    em += Interval{-rem, rem};
    return sum + em;
}

CoefficientTable::CoefficientTable(PowerLaw law, double tol) : law_(law) {
    total_ = law_.tail_from(1, tol);
    c_.push_back(Interval{0.0});
    cum_.push_back(Interval{0.0});
    tail_.push_back(total_);
    tail_cum_.push_back(Interval{0.0});
}

void CoefficientTable::ensure(std::uint64_t n) {
    if (n < c_.size()) return;
    std::uint64_t from = c_.size();
    if (n + 1 > c_.capacity()) {
        std::size_t cap = std::max<std::size_t>(n + 1, 2 * c_.capacity());
        c_.reserve(cap);
        cum_.reserve(cap);
        tail_.reserve(cap);
        tail_cum_.reserve(cap);
    }
    for (std::uint64_t m = from; m <= n; ++m) {
        Interval cm = law_.coeff(m);
        c_.push_back(cm);
        cum_.push_back(cum_.back() + cm);
        Interval t = tail_.back() - cm;
        // tails are non-negative; clip the lower end the subtraction may push below zero
        t.lo = std::fmax(t.lo, 0.0);
        tail_.push_back(t);
        tail_cum_.push_back(tail_cum_.back() + t);
    }
}

Interval CoefficientTable::c(std::uint64_t n) {
    ensure(n);
    return c_[n];
}

Interval CoefficientTable::cum(std::uint64_t n) {
    ensure(n);
    return cum_[n];
}

Interval CoefficientTable::tail(std::uint64_t n) {
    ensure(n);
    return tail_[n];
}

Interval CoefficientTable::tail_cum(std::uint64_t n) {
    ensure(n);
    return tail_cum_[n];
}

}  // namespace ff
