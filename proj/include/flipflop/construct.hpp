#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flipflop/core.hpp"
#include "flipflop/pattern.hpp"

namespace ff {

// Smallest integer tau > 1 with alpha1 < (-beta1 + alpha (tau - 1)) / tau, certified.
int choose_tau(double beta1, double alpha, double alpha1);
// True when tau satisfies the four-block inequality with certainty.
bool tau_inequality_holds(int tau, double beta1, double alpha, double alpha1);

// Segments of length >= N have entrance-average spread below eta.
// modulus must be non-decreasing and right-continuous.
std::int64_t distortion_horizon(double eta, double lambda, double d0, double beta1,
                                const std::function<double(double)>& modulus);

struct DistortionDetail {
    int n0 = 0;
    double rho = 0.0;  // lambda^-n0 d0; any radius slightly above it works
    std::int64_t N = 0;
};
DistortionDetail distortion_horizon_detail(double eta, double lambda, double d0, double beta1,
                                           const std::function<double(double)>& modulus);

// Interleaved ladder beta_1 > alpha_1 > beta_2 > ... with t_0 = 1, t_1 = tau.
// t_k for k >= 2 is filled by plan_scales.
struct ScaleLadder {
    int tau = 0;
    std::vector<double> beta;   // beta[k-1] = beta_k
    std::vector<double> alpha;  // alpha[k-1] = alpha_k
    std::vector<std::int64_t> t;  // t[k] = t_k

    int depth() const { return static_cast<int>(beta.size()); }
    double beta_k(int k) const { return beta.at(k - 1); }
    double alpha_k(int k) const { return alpha.at(k - 1); }
};

// Rule: alpha_1 = min(beta_1, alpha)/2, beta_k = 2 alpha_1 4^(1-k), alpha_k = beta_k/2,
// which is beta_k = beta_1 4^(1-k) when alpha = beta_1.
ScaleLadder default_ladder(const Potential& phi, int depth);
ScaleLadder make_ladder(const Potential& phi, std::vector<double> beta, std::vector<double> alpha);
void validate_ladder(const Potential& phi, const ScaleLadder& ladder);

enum class GapSizing { Paper, Sharp };
GapSizing gap_sizing_from_string(const std::string& s);
const char* gap_sizing_name(GapSizing g);

struct ScalePlan {
    int k = 1;
    double eta = 0.0;
    std::int64_t horizon = 0;   // distortion horizon N(eta)
    std::int64_t m = 0;         // sub-segments of the segment's own sign
    std::int64_t ell0 = 0;      // bound on opposite-sign sub-segments
    std::int64_t t = 0;         // t_k
    std::int64_t min_length = 0;  // a-priori lower bound on any scale-k segment length
};

// Fills ladder.t for k <= depth and returns the per-scale constants.
std::vector<ScalePlan> plan_scales(const FlipFlopFamily& fam, ScaleLadder& ladder, int depth, GapSizing sizing);

struct ConstructOptions {
    GapSizing sizing = GapSizing::Sharp;
    std::int64_t step_budget = 10'000'000;
    bool log_candidates = false;
    std::uint64_t pattern_offset = 0;  // first block index consumed
};

struct CandidateRecord {
    int k = 0;
    Sign sign = Sign::Plus;
    std::int64_t j = 0;       // opposite-sign sub-segments appended so far
    std::int64_t start = 0;
    std::int64_t length = 0;
    Interval sum;
    Interval average;
};

struct SegmentResult {
    Chain chain;
    ScaleLadder ladder;
    std::vector<ScalePlan> plan;
    // schedules[i-1] = control times of scale i, relative to the chain start
    std::vector<std::vector<std::int64_t>> schedules;
    std::vector<Sign> consumed_pattern;  // one sign per block
    std::vector<CandidateRecord> candidates;
    std::vector<std::int64_t> stop_index;  // per scale-k segment: final j (ell)
    Interval entrance_sum;                  // enclosure over all entrance points
    Interval entrance_average;
};

// tau-block: the member carries first_sign at block time 0; tau-1 extensions
// with body_sign follow, then one extension with exit_sign (defaults to body_sign).
Chain tau_block(const FlipFlopFamily& fam, const MemberRef& member, int tau, Sign body_sign,
                std::optional<Sign> exit_sign = std::nullopt);
// Certified entrance average of a chain's first `length` steps, over all entrance points.
Interval entrance_average(const FlipFlopFamily& fam, const Chain& chain);

Chain concatenate(const FlipFlopFamily& fam, const Chain& a, const Chain& b);

SegmentResult build_controlled_segment(const FlipFlopFamily& fam, const MemberRef& member, const Pattern& pattern,
                                       const ScaleLadder& ladder, int k, Sign sign,
                                       const ConstructOptions& options = {});

struct ControlledOrbitReport {
    SegmentResult segment;
    Point entrance;
    TailRule tail_rule = TailRule::RepeatLast;
    int k_max = 1;
    bool certified = false;
};

ControlledOrbitReport build_all_scales(const FlipFlopFamily& fam, const MemberRef& member, const Pattern& pattern,
                                       const ScaleLadder& ladder, int k_max, const ConstructOptions& options = {},
                                       TailRule rule = TailRule::RepeatLast);

// Smallest possible length of a depth-k construction, and its upper bound t_k.
struct LengthPrediction {
    std::int64_t min_length = 0;
    std::int64_t max_length = 0;
};
LengthPrediction predict_length(const FlipFlopFamily& fam, const ScaleLadder& ladder, int k, GapSizing sizing);

// min{(N - Nq - m) aq - (Nq + m) C, (N - NG - m) aG - (NG + m) C}
double block_constant(std::int64_t N, std::int64_t Nq, std::int64_t NG, std::int64_t m, double aq, double aG,
                      double C);
// Smallest N for which block_constant is certainly positive.
std::int64_t smallest_positive_block(std::int64_t Nq, std::int64_t NG, std::int64_t m, double aq, double aG,
                                     double C, std::int64_t limit = 1'000'000'000);

}  // namespace ff
