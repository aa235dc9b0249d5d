#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flipflop/big_interval.hpp"
#include "flipflop/core.hpp"
#include "flipflop/rational.hpp"

namespace ff {

// Axis-aligned box with exact rational corners.
struct Box {
    std::vector<Rational> lo, hi;

    static Box cube(std::size_t dim, const Rational& lo, const Rational& hi);
    std::size_t dim() const { return lo.size(); }
    Rational mid(std::size_t j) const { return (lo[j] + hi[j]) / 2; }
    Rational half_width(std::size_t j) const { return (hi[j] - lo[j]) / 2; }
    bool contains(const Box& o) const;           // closed containment
    bool contains_strictly(const Box& o) const;  // o inside the interior
    // Least coordinate gap between the two boxes (<= 0 when they overlap).
    Rational gap(const Box& o) const;
    Box inflated(const Rational& r) const;
};

// x -> scale * x + shift, coordinatewise.
struct AffineBlock {
    Rational scale;
    std::vector<Rational> shift;

    Box image(const Box& b) const;
    Box preimage(const Box& b) const;
};

constexpr int kLegs = 3;

struct SpawnerParams {
    int u = 1, s = 1;
    Rational lambda{21, 20};
    std::array<AffineBlock, kLegs> Au, As;
    std::array<Box, kLegs> Iu;
    Box Ju, Ju0, Js, Js0;
    Rational alpha1{1, 25}, alpha0{1, 50};
    std::array<int, kLegs> n{1, 1, 1};
    Rational rho{1, 4};  // center half-width of the negative family
    Rational ambient{5, 4};  // half-width of the open box U in the safety-domain check

    // Throws ParameterRejected naming the violated constraint.
    void validate() const;
    Box leg_box(int leg) const;  // I_i^u x [-1,1] x [-1,1]^s, leg in 0..2
};

SpawnerParams default_spawner_params();

// Center maps, legs 0..2: lambda x + (lambda-1)/2, lambda x - (lambda-1)/2, x / lambda.
Rational center_map(int leg, const Rational& lambda, const Rational& x);
Rational center_rate(int leg, const Rational& lambda);
Rational center_offset(int leg, const Rational& lambda);

enum class DiscFamily { D, D1, D2, D3 };
const char* family_name(DiscFamily f);
DiscFamily family_from_string(const std::string& s);
Box family_domain(const SpawnerParams& p, DiscFamily f);
std::pair<Rational, Rational> family_center_range(const SpawnerParams& p, DiscFamily f);
// Leg whose induced map acts on the family (-1 for D).
int family_leg(DiscFamily f);

// Graph of an affine map over a u-box: center c0 + gc.(x - mid), strong-stable
// s0 + Gs (x - mid), where mid is the domain midpoint.
struct GraphDisc {
    Box domain;
    Rational c0;
    std::vector<Rational> gc;               // u entries
    std::vector<Rational> s0;               // s entries
    std::vector<std::vector<Rational>> Gs;  // s rows of u entries
    int leg = -1;

    static GraphDisc flat(const Box& domain, const Rational& c, int s_dim, int leg);
    // Frobenius norm squared of the graph differential: an upper bound on Lip^2.
    Rational lip_sq_bound() const;
    std::pair<Rational, Rational> center_range() const;
    std::pair<Rational, Rational> s_range(std::size_t r) const;
    Rational center_at(const std::vector<Rational>& x) const;
    bool operator==(const GraphDisc& o) const;
};

GraphDisc induced_apply(const SpawnerParams& p, const GraphDisc& disc, int leg);

struct Containment {
    bool ok = false;
    std::optional<GraphDisc> disc;
    Rational center_margin, s_margin, lip_sq_margin;
    Rational min_margin;    // min of the center and s margins
    std::string violated;   // first failing predicate
    Rational deficit;       // by how much it fails
};

Containment restrict_to_family(const SpawnerParams& p, const GraphDisc& disc, DiscFamily target);

// Blender dichotomy: the positive family whose restriction of a D member succeeds.
DiscFamily blender_choice(const SpawnerParams& p, const GraphDisc& disc);

struct ConeReport {
    bool pass = false;
    std::array<Rational, kLegs> margins;  // alpha0 - max(rate, sigma) alpha1 / a
    int failing_leg = -1;
    bool boundary = false;  // some margin is exactly zero
};
ConeReport cone_check(const SpawnerParams& p);

// Family-level image margins: worst case over all members of the source family
// under its leg, measured against D.
struct ImageMargin {
    Rational center_lo, center_hi, center, s;
    Rational lip_factor;  // max(rate, sigma) / a
};
ImageMargin family_image_margin(const SpawnerParams& p, DiscFamily source);

// Floating copy for sampling.
struct DiscD {
    std::vector<double> lo, hi;
    double c0 = 0;
    std::vector<double> gc, s0;
    std::vector<std::vector<double>> Gs;
};
DiscD to_double(const GraphDisc& d);

double delta_distance(const DiscD& a, const DiscD& b, int grid);
double delta_distance(const GraphDisc& a, const GraphDisc& b, int grid);

struct ProbeReport {
    DiscFamily family = DiscFamily::D1;
    double epsilon = 0;
    int trials = 0;
    int passed = 0;
    Rational min_margin;
    std::vector<std::string> failures;  // first few, for diagnostics
    bool pass() const { return passed == trials; }
};

// Samples discs within delta-distance epsilon of members of the family, maps
// them through the family's leg and requires the image to contain a D member.
ProbeReport strict_invariance_probe(const SpawnerParams& p, DiscFamily family, double epsilon, int trials,
                                    std::uint64_t seed);

// Jitters lambda and the affine blocks by at most mu, re-deriving the leg boxes.
SpawnerParams perturb_params(const SpawnerParams& p, const Rational& mu, std::uint64_t seed);

struct RobustnessReport {
    Rational mu;
    double epsilon = 0;
    SpawnerParams perturbed;
    std::vector<ProbeReport> probes;
    bool pass() const;
};
RobustnessReport robustness_probe(const SpawnerParams& p, const Rational& mu, int trials, std::uint64_t seed);

struct SafetyReport {
    bool pass = false;
    std::vector<std::string> violations;
};
// V[i][j], j < n_i, full-dimensional boxes in (u, c, s) coordinates. Each
// intermediate iterate lives in its own chart where the base map is the
// identity; the last one returns to the cube through the leg's affine map.
SafetyReport safety_domain_check(const SpawnerParams& p, const std::vector<std::vector<Box>>& V);
// Boxes growing along each excursion: inflate the leg by r * (j+1) / (n_i+1).
std::vector<std::vector<Box>> safety_domain_recipe(const SpawnerParams& p, const Rational& r);

struct LyapunovResult {
    Rational ratio;  // exponent / log(lambda)
    Interval value;
};
// Average of +-log(lambda) along the legs; weighted divides by the sum of return times.
LyapunovResult center_lyapunov(const SpawnerParams& p, const std::vector<std::uint8_t>& legs, bool weighted);

// Disc coefficients in MPFR intervals; the domain stays exact.
struct BigDisc {
    Box domain;
    BigInterval c0;
    std::vector<BigInterval> gc, s0;
    std::vector<std::vector<BigInterval>> Gs;
    int leg = -1;

    BigDisc() = default;
    BigDisc(const GraphDisc& d, mpfr_prec_t prec);
};

// The spawner as a flip-flop family: F+ = D1 u D2, F- = D3, phi = +-log(lambda) + shift.
class SpawnerFamily : public FlipFlopFamily {
public:
    SpawnerFamily(SpawnerParams params, double shift = 0.0);
    SpawnerFamily(const SpawnerFamily&) = delete;
    SpawnerFamily& operator=(const SpawnerFamily&) = delete;

    const SpawnerParams& params() const { return p_; }
    ModelId model() const override { return ModelId::Spawner; }
    const Potential& potential() const override { return potential_; }
    FamilyConstants constants() const override { return constants_; }
    Sign sign_of_code(std::uint8_t code) const override { return code == 2 ? Sign::Minus : Sign::Plus; }
    std::size_t code_count() const override { return kLegs; }
    MemberRef canonical_member(Sign s) const override;
    MemberRef member(const GraphDisc& d) const;

    Chain start(const MemberRef& member) const override;
    void extend_in_place(Chain& chain, Sign target) const override;
    MemberRef exit_member(const Chain& chain) const override;
    bool entrance_within_exit(const Chain& a, const Chain& b) const override;
    Point entrance_point(const Chain& chain, TailRule rule) const override;
    CodedOrbit coded_orbit(const Chain& chain, TailRule rule) const override;
    double distance(const Point& a, const Point& b) const override;

    Interval phi_at(const CubePoint& x) const;
    double modulus(double r) const;
    double leg_separation() const { return leg_gap_; }
    // Exact member discs m_0..m_T of a chain (short chains only).
    std::vector<GraphDisc> exact_discs(const Chain& chain) const;
    // Exit disc enclosure and the working precision it was computed at.
    const BigDisc& exit_disc(const Chain& chain) const;
    mpfr_prec_t exit_precision(const Chain& chain) const;
    int replays() const { return replays_; }

private:
    int decide(const BigDisc& image, Sign target, bool& decided) const;
    bool step(BigDisc& d, int leg) const;  // induced map through leg, in place
    void replay(const Chain& chain, mpfr_prec_t prec, BigDisc& out) const;

    SpawnerParams p_;
    Potential potential_;
    FamilyConstants constants_;
    Interval log_lambda_;
    double leg_gap_ = 0;
    mutable int replays_ = 0;
};

// JSON-compatible records.
std::string disc_to_json(const GraphDisc& d, DiscFamily f);
GraphDisc disc_from_json(const std::string& text, DiscFamily* f = nullptr);

}  // namespace ff
