#include "flipflop/core.hpp"

#include <charconv>
#include <cmath>

namespace ff {

std::string to_string_interval(const Interval& a) {
    char buf[64];
    std::string out = "[";
    out.append(buf, std::to_chars(buf, buf + sizeof buf, a.lo).ptr);
    out += ", ";
    out.append(buf, std::to_chars(buf, buf + sizeof buf, a.hi).ptr);
    return out + "]";
}

Sign sign_from_char(char c) {
    if (c == '+') return Sign::Plus;
    if (c == '-') return Sign::Minus;
    throw Error(ErrorKind::InvalidArgument, std::string("not a sign character: '") + c + "'");
}

std::string signs_to_string(const std::vector<Sign>& v) {
    std::string s;
    s.reserve(v.size());
    for (Sign x : v) s.push_back(sign_char(x));
    return s;
}

std::vector<Sign> signs_from_string(const std::string& s) {
    std::vector<Sign> v;
    v.reserve(s.size());
    for (char c : s) v.push_back(sign_from_char(c));
    return v;
}

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument: return "invalid argument";
        case ErrorKind::RefinementUnavailable: return "refinement unavailable";
        case ErrorKind::ContainmentViolation: return "containment violation";
        case ErrorKind::TargetOvershoot: return "target overshoot";
        case ErrorKind::HittingBoundExceeded: return "hitting bound exceeded";
        case ErrorKind::BudgetExceeded: return "budget exceeded";
        case ErrorKind::ModulusTooWeak: return "modulus too weak";
        case ErrorKind::SeparationViolated: return "separation violated";
        case ErrorKind::ToleranceUnreachable: return "tolerance unreachable";
        case ErrorKind::NotPositive: return "not positive";
        case ErrorKind::NotContained: return "not contained";
        case ErrorKind::ConeNotInvariant: return "cone not invariant";
        case ErrorKind::ConfigurationNotFlipFlop: return "configuration not flip-flop";
        case ErrorKind::AmbiguousClassification: return "ambiguous classification";
        case ErrorKind::DomainEscape: return "domain escape";
        case ErrorKind::ParameterRejected: return "parameter rejected";
    }
    return "unknown";
}

const char* model_name(ModelId m) { return m == ModelId::Symbolic ? "symbolic" : "spawner"; }

TailRule tail_rule_from_string(const std::string& s) {
    if (s == "repeat_last") return TailRule::RepeatLast;
    if (s == "fixed_point") return TailRule::FixedPoint;
    throw Error(ErrorKind::InvalidArgument, "unknown tail rule '" + s + "'");
}

const char* tail_rule_name(TailRule r) { return r == TailRule::RepeatLast ? "repeat_last" : "fixed_point"; }

double CodedPotential::max_abs_u() const {
    double m = 0.0;
    if (long_range)
        for (double x : long_range->u) m = std::fmax(m, std::fabs(x));
    return m;
}

}  // namespace ff
