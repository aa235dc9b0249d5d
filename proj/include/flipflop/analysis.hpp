#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flipflop/construct.hpp"
#include "flipflop/core.hpp"
#include "flipflop/kernels.hpp"

namespace ff {

struct PrefixOptions {
    // explicit long-range window; the remainder up to the periodic tail is bounded
    std::size_t window = 4096;
    const kernels::KernelTable* kernels = nullptr;  // nullptr selects the active table
};

// phi(f^n x) for n < T, as enclosures.
std::vector<Interval> pointwise_values(const CodedPotential& pot, const CodedOrbit& orbit, std::int64_t T,
                                       const PrefixOptions& opt = {});

// Running sums of the lower and upper endpoint values in 2^-60 fixed point.
// Accumulation is exact, so a gap sum carries only the widths inside the gap.
class PrefixSums {
public:
    PrefixSums() = default;
    explicit PrefixSums(const std::vector<Interval>& values);

    std::int64_t length() const { return static_cast<std::int64_t>(lo_.size()) - 1; }
    Interval prefix(std::int64_t n) const { return range(0, n); }
    // sum over [a, b)
    Interval range(std::int64_t a, std::int64_t b) const;

private:
    std::vector<__int128> lo_{0}, hi_{0};
};

PrefixSums prefix_sums(const CodedPotential& pot, const CodedOrbit& orbit, std::int64_t T,
                       const PrefixOptions& opt = {});

// phi_n(x) = sum_{i<n} phi(f^i x) for n = 0..T (entry 0 is exactly zero).
std::vector<Interval> birkhoff_prefix(const CodedPotential& pot, const CodedOrbit& orbit, std::int64_t T,
                                      const PrefixOptions& opt = {});

// Sums over consecutive control-time gaps, re-summed directly from the codes
// by the selected kernel (independent of the prefix machinery). Local potentials only.
std::vector<Interval> gap_sums_resummed(const CodedPotential& pot, const CodedOrbit& orbit,
                                        const std::vector<std::int64_t>& P, const kernels::KernelTable& k);

struct ControlReport {
    int scale = 0;
    double beta = 0.0;
    std::int64_t t = 0;
    std::vector<std::int64_t> control_times;
    std::vector<Interval> gap_averages;
    bool pass = false;
    std::optional<std::pair<std::int64_t, std::int64_t>> failure;  // offending (k, l)
    std::string reason;
};

// sums[n] = phi_n; checks every consecutive gap of P has length <= t and
// average enclosure inside [-beta, beta].
ControlReport verify_gap_control(const std::vector<Interval>& sums, const std::vector<std::int64_t>& P, double beta,
                                 std::int64_t t, int scale = 0);
ControlReport verify_gap_control(const PrefixSums& sums, const std::vector<std::int64_t>& P, double beta,
                                 std::int64_t t, int scale = 0);
// Same check from precomputed gap sums (gap_sums[i] covers P[i]..P[i+1]).
ControlReport verify_gap_sums(const std::vector<Interval>& gap_sums, const std::vector<std::int64_t>& P,
                              double beta, std::int64_t t, std::int64_t T, int scale = 0);

// All scales of a report, from the entrance point's own prefix sums.
std::vector<ControlReport> verify_schedule(const FlipFlopFamily& fam, const ControlledOrbitReport& rep,
                                           const PrefixOptions& opt = {});

struct EnvelopeResult {
    int k = 0;           // deepest scale with t_k <= n (0 if none)
    double bound = 0.0;  // beta_k + t_k beta_1 / n, rounded up
    Interval actual;     // |phi_n| / n
    bool respected = false;
};

double envelope_bound(const ScaleLadder& ladder, int k_max, double beta1, std::int64_t n, int* k_used = nullptr);
EnvelopeResult exponent_envelope(const ControlledOrbitReport& rep, double beta1, const std::vector<Interval>& sums,
                                 std::int64_t n);

// Sign of phi(f^(tau*b + offset) x) for b < blocks, classified against +-alpha.
std::vector<Sign> tau_itinerary(const CodedPotential& pot, const CodedOrbit& orbit, int tau, double alpha,
                                std::size_t blocks, std::int64_t offset = 0, const PrefixOptions& opt = {});
std::vector<Sign> tau_itinerary_from_values(const std::vector<Interval>& values, int tau, double alpha,
                                            std::size_t blocks, std::int64_t offset = 0);

struct Census {
    int L = 0;
    std::uint64_t count = 0;
    bool complete = false;
    double estimate = 0.0;  // log(count) / (tau L)
};

Census word_census(const std::vector<Sign>& itinerary, int L, int tau);

}  // namespace ff
