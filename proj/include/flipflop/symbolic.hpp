#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flipflop/coefficients.hpp"
#include "flipflop/core.hpp"

namespace ff {

struct SymbolSpec {
    std::string name;
    double value = 0.0;  // base value v(a)
    Sign sign = Sign::Plus;
    double u = 0.0;  // long-range weight u(a)
};

struct LongRangeSpec {
    double amplitude = 1.0;
    double exponent = 2.0;
};

struct ShiftModelSpec {
    std::vector<SymbolSpec> symbols;
    std::optional<LongRangeSpec> long_range;
    double shift = 0.0;
    double tolerance = 1e-9;  // target enclosure width of point evaluations
};

// Two symbols p, q with values +1, -1; with long_range the weights are u = +1, -1.
ShiftModelSpec default_shift_spec(bool long_range);

// Full shift on the given alphabet. Members are 1-cylinders, witnesses are
// 2-cylinders, the metric is 2^-(first disagreement).
class ShiftModel : public FlipFlopFamily {
public:
    explicit ShiftModel(ShiftModelSpec spec);
    // the potential's callbacks refer back to this object
    ShiftModel(const ShiftModel&) = delete;
    ShiftModel& operator=(const ShiftModel&) = delete;

    const ShiftModelSpec& spec() const { return spec_; }
    ModelId model() const override { return ModelId::Symbolic; }
    const Potential& potential() const override { return potential_; }
    FamilyConstants constants() const override { return {2.0, 0.5}; }
    Sign sign_of_code(std::uint8_t code) const override { return spec_.symbols.at(code).sign; }
    std::size_t code_count() const override { return spec_.symbols.size(); }
    MemberRef canonical_member(Sign s) const override;
    std::vector<MemberRef> members(Sign s) const;

    Chain start(const MemberRef& member) const override;
    void extend_in_place(Chain& chain, Sign target) const override;
    MemberRef exit_member(const Chain& chain) const override;
    bool entrance_within_exit(const Chain& a, const Chain& b) const override;
    Point entrance_point(const Chain& chain, TailRule rule) const override;
    CodedOrbit coded_orbit(const Chain& chain, TailRule rule) const override;
    double distance(const Point& a, const Point& b) const override;

    Interval phi_eval(const WordPoint& x, double tol) const;
    Interval phi_eval(const WordPoint& x) const { return phi_eval(x, spec_.tolerance); }
    double modulus(double r) const;
    std::optional<PowerLaw> law() const { return law_; }

    static WordPoint shift_point(const WordPoint& x);
    static double word_distance(const WordPoint& a, const WordPoint& b);

private:
    ShiftModelSpec spec_;
    std::optional<PowerLaw> law_;
    Interval coeff_total_{0.0};
    double max_u_ = 0.0;
    std::uint8_t first_plus_ = 0, first_minus_ = 0;
    Potential potential_;
};

std::shared_ptr<const ShiftModel> make_shift_model(ShiftModelSpec spec);

}  // namespace ff
