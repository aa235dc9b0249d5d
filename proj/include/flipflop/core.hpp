#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "flipflop/interval.hpp"

namespace ff {

enum class Sign : std::int8_t { Plus = 1, Minus = -1 };

inline Sign opposite(Sign s) { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }
inline char sign_char(Sign s) { return s == Sign::Plus ? '+' : '-'; }
inline int sign_value(Sign s) { return static_cast<int>(s); }
Sign sign_from_char(char c);
std::string signs_to_string(const std::vector<Sign>& v);
std::vector<Sign> signs_from_string(const std::string& s);

enum class ErrorKind {
    InvalidArgument,
    RefinementUnavailable,
    ContainmentViolation,
    TargetOvershoot,
    HittingBoundExceeded,
    BudgetExceeded,
    ModulusTooWeak,
    SeparationViolated,
    ToleranceUnreachable,
    NotPositive,
    NotContained,
    ConeNotInvariant,
    ConfigurationNotFlipFlop,
    AmbiguousClassification,
    DomainEscape,
    ParameterRejected,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

enum class ModelId { Symbolic, Spawner };
const char* model_name(ModelId m);

// Eventually periodic symbol word: head followed by period repeated forever.
struct WordPoint {
    std::vector<std::uint8_t> head;
    std::vector<std::uint8_t> period;  // non-empty

    std::uint8_t at(std::uint64_t i) const {
        if (i < head.size()) return head[i];
        return period[(i - head.size()) % period.size()];
    }
};

struct CubePoint {
    std::vector<Interval> u;
    Interval c;
    std::vector<Interval> s;
};

using Point = std::variant<WordPoint, CubePoint>;

// c_n = amplitude * (n+1)^(-exponent), n >= 1, with per-code weights u(a).
struct LongRange {
    double amplitude = 1.0;
    double exponent = 2.0;
    std::vector<double> u;
};

// Potential in coded form: phi(x) = local[x_0] + sum_{n>=1} c_n u[x_n].
// Both shipped models reduce to this form on itineraries.
struct CodedPotential {
    std::vector<Interval> local;
    std::optional<LongRange> long_range;

    double max_abs_u() const;
};

struct Potential {
    CodedPotential coded;
    double alpha = 0.0;   // certified separation (lower bound)
    double beta1 = 0.0;   // certified sup |phi| (upper bound)
    double shift = 0.0;   // constant added to every value, already folded into coded.local
    std::function<Interval(const Point&)> evaluate;
    // non-decreasing, right-continuous upper bound on the oscillation over r-balls
    std::function<double(double)> modulus;
};

// Model-specific member data (the spawner's graph disc). Immutable once shared.
struct ModelState {
    virtual ~ModelState() = default;
};

struct MemberRef {
    ModelId model = ModelId::Symbolic;
    Sign sign = Sign::Plus;
    std::uint8_t code = 0;
    std::shared_ptr<const ModelState> state;
};

// An F-segment m_0 -> m_1 -> ... -> m_T. Members are stored by code; the
// containment witness of step i is the sub-part of m_i selected by the code
// of m_{i+1} (a 2-cylinder, or the leg restriction of a disc). The exit
// member's full state is kept in exit_state.
struct Chain {
    ModelId model = ModelId::Symbolic;
    std::vector<std::uint8_t> codes;
    std::vector<std::int64_t> control_times;
    std::vector<Sign> block_pattern;  // sign requested by each extension, in order
    std::shared_ptr<const ModelState> entrance_state;
    std::shared_ptr<const ModelState> exit_state;

    std::int64_t length() const { return static_cast<std::int64_t>(codes.size()) - 1; }
};

enum class TailRule { RepeatLast, FixedPoint };
TailRule tail_rule_from_string(const std::string& s);
const char* tail_rule_name(TailRule r);

struct FamilyConstants {
    double lambda = 2.0;  // certified lower expansion bound
    double d0 = 0.5;      // certified upper bound on member diameters
};

// Itinerary of a point in code space, as consumed by the coded potential.
struct CodedOrbit {
    std::vector<std::uint8_t> head;
    std::vector<std::uint8_t> period;  // empty when only the head is known
};

class FlipFlopFamily {
public:
    virtual ~FlipFlopFamily() = default;

    virtual ModelId model() const = 0;
    virtual const Potential& potential() const = 0;
    virtual FamilyConstants constants() const = 0;
    virtual Sign sign_of_code(std::uint8_t code) const = 0;
    virtual std::size_t code_count() const = 0;
    virtual MemberRef canonical_member(Sign s) const = 0;

    virtual Chain start(const MemberRef& member) const = 0;
    virtual void extend_in_place(Chain& chain, Sign target) const = 0;
    Chain extend(const Chain& chain, Sign target) const {
        Chain r = chain;
        extend_in_place(r, target);
        return r;
    }
    virtual MemberRef exit_member(const Chain& chain) const = 0;
    // True when b's entrance member is contained in a's exit member.
    virtual bool entrance_within_exit(const Chain& a, const Chain& b) const = 0;

    virtual Point entrance_point(const Chain& chain, TailRule rule) const = 0;
    virtual CodedOrbit coded_orbit(const Chain& chain, TailRule rule) const = 0;
    virtual double distance(const Point& a, const Point& b) const = 0;
};

}  // namespace ff
