#include "flipflop/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ff {

ShiftModelSpec default_shift_spec(bool long_range) {
    ShiftModelSpec s;
    s.symbols = {{"p", 1.0, Sign::Plus, long_range ? 1.0 : 0.0}, {"q", -1.0, Sign::Minus, long_range ? -1.0 : 0.0}};
    if (long_range) s.long_range = LongRangeSpec{1.0, 2.0};
    return s;
}

ShiftModel::ShiftModel(ShiftModelSpec spec) : spec_(std::move(spec)) {
    const auto& syms = spec_.symbols;
    if (syms.size() < 2 || syms.size() > 62)
        throw Error(ErrorKind::InvalidArgument, "alphabet must hold between 2 and 62 symbols");
    bool has_plus = false, has_minus = false;
    for (std::size_t i = 0; i < syms.size(); ++i) {
        if (!std::isfinite(syms[i].value) || !std::isfinite(syms[i].u))
            throw Error(ErrorKind::InvalidArgument, "symbol '" + syms[i].name + "' has a non-finite value");
        if (syms[i].sign == Sign::Plus && !has_plus) {
            has_plus = true;
            first_plus_ = static_cast<std::uint8_t>(i);
        }
        if (syms[i].sign == Sign::Minus && !has_minus) {
            has_minus = true;
            first_minus_ = static_cast<std::uint8_t>(i);
        }
    }
    if (!has_plus || !has_minus)
        throw Error(ErrorKind::SeparationViolated, "alphabet must contain both a positive and a negative symbol");
    if (!std::isfinite(spec_.shift)) throw Error(ErrorKind::InvalidArgument, "shift must be finite");
    if (!(spec_.tolerance > 0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");

    if (spec_.long_range) {
        law_ = PowerLaw(spec_.long_range->amplitude, spec_.long_range->exponent);
        coeff_total_ = law_->tail_from(1, 1e-15);
        for (const auto& s : syms) max_u_ = std::fmax(max_u_, std::fabs(s.u));
    }
    Interval spread = Interval{max_u_} * coeff_total_;

    double alpha = std::numeric_limits<double>::infinity();
    double beta1 = 0.0;
    for (const auto& s : syms) {
        Interval v = Interval{s.value} + Interval{spec_.shift};
        if (s.sign == Sign::Plus) {
            Interval low = v - spread;
            if (!(low.lo > 0))
                throw Error(ErrorKind::SeparationViolated,
                            "positive symbol '" + s.name + "' does not stay above zero");
            alpha = std::fmin(alpha, low.lo);
        } else {
            Interval high = v + spread;
            if (!(high.hi < 0))
                throw Error(ErrorKind::SeparationViolated,
                            "negative symbol '" + s.name + "' does not stay below zero");
            alpha = std::fmin(alpha, -high.hi);
        }
        beta1 = std::fmax(beta1, (abs(v) + spread).hi);
    }

    bool inexact = law_.has_value();
    for (const auto& sym : syms) inexact = inexact || !(Interval{sym.value} + Interval{spec_.shift}).is_point();
    if (inexact) {
        // room for the rounding that orbit-wise enclosures accumulate near the extreme values
        double slack = 1e-12 * std::fmax(1.0, beta1);
        alpha -= slack;
        beta1 += slack;
    }
    potential_.alpha = alpha;
    potential_.beta1 = beta1;
    potential_.shift = spec_.shift;
    for (const auto& s : syms) potential_.coded.local.push_back(Interval{s.value} + Interval{spec_.shift});
    if (law_) {
        LongRange lr{law_->amplitude(), law_->exponent(), {}};
        for (const auto& s : syms) lr.u.push_back(s.u);
        potential_.coded.long_range = lr;
    }
    potential_.evaluate = [this](const Point& p) -> Interval {
        if (!std::holds_alternative<WordPoint>(p))
            throw Error(ErrorKind::DomainEscape, "symbolic potential evaluated on a cube point");
        return phi_eval(std::get<WordPoint>(p));
    };
    potential_.modulus = [this](double r) { return modulus(r); };
}

MemberRef ShiftModel::canonical_member(Sign s) const {
    std::uint8_t code = s == Sign::Plus ? first_plus_ : first_minus_;
    return MemberRef{ModelId::Symbolic, s, code, nullptr};
}

std::vector<MemberRef> ShiftModel::members(Sign s) const {
    std::vector<MemberRef> out;
    for (std::size_t i = 0; i < spec_.symbols.size(); ++i)
        if (spec_.symbols[i].sign == s) out.push_back({ModelId::Symbolic, s, static_cast<std::uint8_t>(i), nullptr});
    return out;
}

Chain ShiftModel::start(const MemberRef& member) const {
    if (member.model != ModelId::Symbolic || member.code >= spec_.symbols.size())
        throw Error(ErrorKind::InvalidArgument, "member does not belong to this shift model");
    Chain c;
    c.model = ModelId::Symbolic;
    c.codes = {member.code};
    c.control_times = {0};
    return c;
}

void ShiftModel::extend_in_place(Chain& chain, Sign target) const {
    chain.codes.push_back(target == Sign::Plus ? first_plus_ : first_minus_);
    chain.block_pattern.push_back(target);
}

MemberRef ShiftModel::exit_member(const Chain& chain) const {
    std::uint8_t code = chain.codes.back();
    return MemberRef{ModelId::Symbolic, sign_of_code(code), code, nullptr};
}

bool ShiftModel::entrance_within_exit(const Chain& a, const Chain& b) const {
    return !a.codes.empty() && !b.codes.empty() && a.codes.back() == b.codes.front();
}

Point ShiftModel::entrance_point(const Chain& chain, TailRule rule) const {
    WordPoint w;
    w.head = chain.codes;
    w.period = {rule == TailRule::RepeatLast ? chain.codes.back() : std::uint8_t{0}};
    return w;
}

CodedOrbit ShiftModel::coded_orbit(const Chain& chain, TailRule rule) const {
    WordPoint w = std::get<WordPoint>(entrance_point(chain, rule));
    return CodedOrbit{std::move(w.head), std::move(w.period)};
}

double ShiftModel::distance(const Point& a, const Point& b) const {
    return word_distance(std::get<WordPoint>(a), std::get<WordPoint>(b));
}

WordPoint ShiftModel::shift_point(const WordPoint& x) {
    WordPoint y;
    if (!x.head.empty()) {
        y.head.assign(x.head.begin() + 1, x.head.end());
        y.period = x.period;
    } else {
        y.period.assign(x.period.begin() + 1, x.period.end());
        y.period.push_back(x.period.front());
    }
    return y;
}

double ShiftModel::word_distance(const WordPoint& a, const WordPoint& b) {
    // beyond max head + lcm of periods both words are periodic in lockstep
    std::uint64_t horizon = std::max(a.head.size(), b.head.size()) +
                            std::lcm(a.period.size(), b.period.size());
    for (std::uint64_t i = 0; i < horizon; ++i)
        if (a.at(i) != b.at(i)) return std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(i, 1074)));
    return 0.0;
}

double ShiftModel::modulus(double r) const {
    if (!(r >= 0)) throw Error(ErrorKind::InvalidArgument, "modulus radius must be non-negative");
    if (r >= 1.0) return 2.0 * potential_.beta1;
    if (!law_ || max_u_ == 0.0) return 0.0;
    if (r == 0.0) return 0.0;
    // points within r agree on indices < N where 2^-N <= r
    int N = 1;
    while (std::ldexp(1.0, -N) > r) ++N;
    Interval tail = law_->tail_from(static_cast<std::uint64_t>(N), 1e-15);
    return (Interval{2.0 * max_u_} * tail).hi;
}

Interval ShiftModel::phi_eval(const WordPoint& x0, double tol) const {
    if (x0.period.empty()) throw Error(ErrorKind::InvalidArgument, "point must be eventually periodic");
    WordPoint x = x0;
    if (x.head.empty()) {
        x.head.push_back(x.period.front());
        std::rotate(x.period.begin(), x.period.begin() + 1, x.period.end());
    }
    for (auto c : x.head)
        if (c >= spec_.symbols.size()) throw Error(ErrorKind::DomainEscape, "symbol code out of range");
    for (auto c : x.period)
        if (c >= spec_.symbols.size()) throw Error(ErrorKind::DomainEscape, "symbol code out of range");

    Interval value = potential_.coded.local[x.head[0]];
    if (!law_) return value;

    const std::uint64_t H = x.head.size();
    const std::uint64_t P = x.period.size();
    Interval explicit_part{0.0};
    for (std::uint64_t n = 1; n < H; ++n) {
        double u = spec_.symbols[x.head[n]].u;
        if (u != 0.0) explicit_part += Interval{u} * law_->coeff(n);
    }
    double per_term_tol = tol / (4.0 * static_cast<double>(P) * std::fmax(max_u_, 1e-300));
    Interval periodic_part{0.0};
    for (std::uint64_t r = 0; r < P; ++r) {
        double u = spec_.symbols[x.period[r]].u;
        if (u == 0.0) continue;
        periodic_part += Interval{u} * law_->progression_tail(H + r, P, per_term_tol);
    }
    Interval result = value + explicit_part + periodic_part;
    if (result.width() > tol)
        throw Error(ErrorKind::ToleranceUnreachable,
                    "enclosure width " + std::to_string(result.width()) + " exceeds tolerance");
    return result;
}

std::shared_ptr<const ShiftModel> make_shift_model(ShiftModelSpec spec) {
    return std::make_shared<const ShiftModel>(std::move(spec));
}

}  // namespace ff
