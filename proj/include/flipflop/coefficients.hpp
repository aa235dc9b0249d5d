#pragma once

#include <cstdint>
#include <vector>

#include "flipflop/interval.hpp"

namespace ff {

// c_n = amplitude * (n+1)^(-exponent) for n >= 1, exponent > 1.
class PowerLaw {
public:
    PowerLaw(double amplitude, double exponent);

    double amplitude() const { return amplitude_; }
    double exponent() const { return exponent_; }

    Interval coeff(std::uint64_t n) const;
    // sum_{k>=0} c_{a + k*step} for a >= 1, enclosure width about tol.
    // Explicit terms until the Euler-Maclaurin remainder bound drops below tol/4.
    Interval progression_tail(std::uint64_t a, std::uint64_t step, double tol) const;
    Interval tail_from(std::uint64_t n0, double tol) const { return progression_tail(n0, 1, tol); }

private:
    double amplitude_;
    double exponent_;
};

// Lazily grown running tables of a power law: cum(n) = sum_{m<=n} c_m,
// tail(n) = sum_{m>n} c_m and tail_cum(n) = sum_{l=1..n} tail(l).
class CoefficientTable {
public:
    explicit CoefficientTable(PowerLaw law, double tol = 1e-15);

    const PowerLaw& law() const { return law_; }
    Interval total() const { return total_; }
    Interval c(std::uint64_t n);
    Interval cum(std::uint64_t n);
    Interval tail(std::uint64_t n);
    Interval tail_cum(std::uint64_t n);
    void ensure(std::uint64_t n);

private:
    PowerLaw law_;
    Interval total_;
    std::vector<Interval> c_;        // c_[n], c_[0] = 0
    std::vector<Interval> cum_;      // cum_[n]
    std::vector<Interval> tail_;     // tail_[n]
    std::vector<Interval> tail_cum_; // tail_cum_[n]
};

}  // namespace ff
