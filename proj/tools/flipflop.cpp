#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flipflop/cli.hpp"
#include "flipflop/io.hpp"

namespace {

using namespace ff;
using namespace ff::cli;

struct Overrides {
    std::string config_path;
    std::optional<std::string> model, lambda, out, tail, pattern, sizing;
    std::optional<int> kmax, trials;
    std::vector<std::string> chi;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> budget;
    bool exact = false;
};

void add_run_options(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_path, "JSON configuration file");
    app->add_option("--model", o.model, "symbolic, long-range or spawner");
    app->add_option("--kmax", o.kmax, "deepest scale");
    app->add_option("--lambda", o.lambda, "spawner center rate, exact rational such as 21/20");
    app->add_option("--chi", o.chi, "target exponents, rationals")->delimiter(',');
    app->add_option("--seed", o.seed, "probe seed");
    app->add_option("--budget", o.budget, "step budget");
    app->add_option("--trials", o.trials, "probe trials per family");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--tail", o.tail, "repeat_last or fixed_point");
    app->add_option("--pattern", o.pattern, "champernowne or periodic:<signs>");
    app->add_option("--sizing", o.sizing, "sharp or paper");
    app->add_flag("--exact", o.exact, "verify with exact rational sums");
}

RunConfig resolve(const Overrides& o) {
    RunConfig c;
    if (!o.config_path.empty()) c = config_from_json(io::read_file(o.config_path));
    if (o.model) c.model = model_kind_from_string(*o.model);
    if (o.kmax) c.k_max = *o.kmax;
    if (o.lambda) c.lambda = parse_rational(*o.lambda);
    if (!o.chi.empty()) {
        c.chi.clear();
        for (const auto& s : o.chi) c.chi.push_back(parse_rational(s));
    }
    if (o.seed) c.seed = *o.seed;
    if (o.budget) c.budget = *o.budget;
    if (o.trials) c.trials = *o.trials;
    if (o.out) c.out = *o.out;
    if (o.tail) c.tail = tail_rule_from_string(*o.tail);
    if (o.pattern) c.pattern = *o.pattern;
    if (o.sizing) c.sizing = gap_sizing_from_string(*o.sizing);
    if (o.exact) c.exact = true;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controlled Birkhoff averages for flip-flop families"};
    app.require_subcommand(1);

    Overrides construct_o, blender_o, sweep_o;
    auto* construct = app.add_subcommand("construct", "build a controlled orbit and write its artifacts");
    add_run_options(construct, construct_o);
    auto* blender = app.add_subcommand("blender", "certify the spawner blender");
    add_run_options(blender, blender_o);
    auto* sweep = app.add_subcommand("chi-sweep", "construct orbits with center exponent chi");
    add_run_options(sweep, sweep_o);

    VerifyInputs vin;
    std::string prefix;
    auto* verify = app.add_subcommand("verify", "re-check a chain record against its schedules");
    verify->add_option("chain", vin.chain, "chain.json")->required();
    verify->add_option("schedules", vin.schedules, "schedules.json")->required();
    verify->add_option("--prefix", prefix, "prefix.csv to cross-check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kConfig;
    }

    auto with_config = [](const Overrides& o, auto&& run) -> int {
        try {
            return run(resolve(o));
        } catch (const io::IoError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kIo;
        } catch (const Error& e) {
            std::cerr << "error (" << error_kind_name(e.kind()) << "): " << e.what() << '\n';
            return kConfig;
        }
    };

    if (*construct) return with_config(construct_o, [](const RunConfig& c) { return cmd_construct(c, std::cerr); });
    if (*blender)
        return with_config(blender_o, [](const RunConfig& c) { return cmd_blender(c, std::cout, std::cerr); });
    if (*sweep) return with_config(sweep_o, [](const RunConfig& c) { return cmd_chi_sweep(c, std::cerr); });
    if (!prefix.empty()) vin.prefix = prefix;
    return cmd_verify(vin, std::cout, std::cerr);
}
