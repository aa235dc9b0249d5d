#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flipflop/construct.hpp"
#include "flipflop/core.hpp"
#include "flipflop/rational.hpp"
#include "flipflop/spawner.hpp"
#include "flipflop/symbolic.hpp"

namespace ff::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kBudget = 2, kConfig = 3, kIo = 4 };

enum class ModelKind { Symbolic, LongRange, Spawner };
const char* model_kind_name(ModelKind m);
ModelKind model_kind_from_string(const std::string& s);

struct RunConfig {
    ModelKind model = ModelKind::Symbolic;
    // symbolic models; empty symbols select the two-symbol default
    std::vector<SymbolSpec> symbols;
    std::optional<LongRangeSpec> long_range;
    double shift = 0.0;
    // spawner
    Rational lambda{21, 20}, alpha1{1, 25}, alpha0{1, 50}, rho{1, 4};
    // empty selects the default ladder
    std::vector<double> ladder_beta, ladder_alpha;
    int k_max = 2;
    std::string pattern = "champernowne";
    TailRule tail = TailRule::RepeatLast;
    GapSizing sizing = GapSizing::Sharp;
    std::vector<Rational> chi{Rational(-1, 50), Rational(0), Rational(1, 50)};
    std::int64_t budget = 10'000'000;
    std::uint64_t seed = 1;
    int trials = 1000;
    bool exact = false;
    std::string out = "out";

    // Throws Error(InvalidArgument) naming the violated constraint.
    void validate() const;
};

// Throws Error(InvalidArgument) on bad fields and io::IoError on malformed text.
RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& c);

ShiftModelSpec shift_spec(const RunConfig& c, double extra_shift = 0.0);
SpawnerParams spawner_params(const RunConfig& c);
// extra_shift is added to the potential (the chi sweep passes -chi).
std::unique_ptr<FlipFlopFamily> make_family(const RunConfig& c, double extra_shift = 0.0);
ScaleLadder run_ladder(const FlipFlopFamily& fam, const RunConfig& c);

// Writes chain.json, schedules.json, prefix.csv and report.json into c.out.
int cmd_construct(const RunConfig& c, std::ostream& log);

struct VerifyInputs {
    std::filesystem::path chain, schedules;
    std::optional<std::filesystem::path> prefix;  // prefix.csv to cross-check
};
// Prints a JSON report to out.
int cmd_verify(const VerifyInputs& in, std::ostream& out, std::ostream& log);

// Prints a JSON certification report to out.
int cmd_blender(const RunConfig& c, std::ostream& out, std::ostream& log);

// Writes sweep.csv into c.out and one run directory per chi value.
int cmd_chi_sweep(const RunConfig& c, std::ostream& log);

constexpr const char* kSweepHeader = "chi,achieved_lo,achieved_hi,T,pass";

}  // namespace ff::cli
