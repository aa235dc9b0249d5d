#include "flipflop/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include "flipflop/analysis.hpp"
#include "flipflop/io.hpp"
#include "json.hpp"

namespace ff::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const char* model_kind_name(ModelKind m) {
    switch (m) {
        case ModelKind::Symbolic: return "symbolic";
        case ModelKind::LongRange: return "long-range";
        case ModelKind::Spawner: return "spawner";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "symbolic") return ModelKind::Symbolic;
    if (s == "long-range") return ModelKind::LongRange;
    if (s == "spawner") return ModelKind::Spawner;
    throw Error(ErrorKind::InvalidArgument, "model must be symbolic, long-range or spawner, got '" + s + "'");
}

void RunConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
    if (k_max < 1 || k_max > 8) bad("k_max must lie in 1..8");
    if (budget < 1) bad("budget must be positive");
    if (trials < 1) bad("trials must be positive");
    if (ladder_beta.size() != ladder_alpha.size()) bad("ladder beta and alpha lists differ in length");
    if (!ladder_beta.empty() && static_cast<int>(ladder_beta.size()) < k_max)
        bad("ladder has " + std::to_string(ladder_beta.size()) + " scales, k_max needs " + std::to_string(k_max));
    if (symbols.size() > 36) bad("at most 36 symbols");
    if (!std::isfinite(shift)) bad("shift must be finite");
    if (exact && model == ModelKind::LongRange) bad("exact arithmetic needs a local potential; long-range has none");
    if (model != ModelKind::Spawner && !symbols.empty() && symbols.size() < 2) bad("need at least two symbols");
    if (lambda <= 1) bad("lambda must exceed 1");
    if (alpha1 <= 0 || alpha0 <= 0) bad("cone widths must be positive");
    pattern_from_tag(pattern);
}

namespace {

json rational_json(const Rational& q) { return to_string(q); }

Rational rational_field(const json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number()) return parse_rational(j.dump());
    throw Error(ErrorKind::InvalidArgument, "expected a rational, got " + j.dump());
}

json interval_json(const Interval& a) { return json::array({a.lo, a.hi}); }

Interval interval_field(const json& j) {
    if (!j.is_array() || j.size() != 2) throw io::IoError("expected an [lo, hi] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

json config_json(const RunConfig& c) {
    json j;
    j["model"] = model_kind_name(c.model);
    if (!c.symbols.empty()) {
        json syms = json::array();
        for (const auto& s : c.symbols)
            syms.push_back({{"name", s.name}, {"value", s.value}, {"sign", std::string(1, sign_char(s.sign))},
                            {"u", s.u}});
        j["symbols"] = syms;
    }
    if (c.long_range) j["long_range"] = {{"amplitude", c.long_range->amplitude}, {"exponent", c.long_range->exponent}};
    j["shift"] = c.shift;
    j["lambda"] = rational_json(c.lambda);
    j["alpha1"] = rational_json(c.alpha1);
    j["alpha0"] = rational_json(c.alpha0);
    j["rho"] = rational_json(c.rho);
    if (!c.ladder_beta.empty()) j["ladder"] = {{"beta", c.ladder_beta}, {"alpha", c.ladder_alpha}};
    j["k_max"] = c.k_max;
    j["pattern"] = c.pattern;
    j["tail"] = tail_rule_name(c.tail);
    j["sizing"] = gap_sizing_name(c.sizing);
    json chis = json::array();
    for (const auto& q : c.chi) chis.push_back(rational_json(q));
    j["chi"] = chis;
    j["budget"] = c.budget;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["exact"] = c.exact;
    j["out"] = c.out;
    return j;
}

RunConfig config_from(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be an object");
    static const char* known[] = {"model", "symbols", "long_range", "shift", "lambda", "alpha1", "alpha0",
                                  "rho",   "ladder",  "k_max",      "pattern", "tail", "sizing", "chi",
                                  "budget", "seed",   "trials",     "exact", "out"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw Error(ErrorKind::InvalidArgument, "unknown config field '" + key + "'");
    }
    RunConfig c;
    try {
        if (j.contains("model")) c.model = model_kind_from_string(j["model"].get<std::string>());
        if (j.contains("symbols")) {
            for (const auto& s : j["symbols"]) {
                SymbolSpec sym;
                sym.name = s.at("name").get<std::string>();
                sym.value = s.at("value").get<double>();
                std::string sg = s.at("sign").get<std::string>();
                if (sg.size() != 1) throw Error(ErrorKind::InvalidArgument, "symbol sign must be '+' or '-'");
                sym.sign = sign_from_char(sg[0]);
                sym.u = s.value("u", 0.0);
                c.symbols.push_back(sym);
            }
        }
        if (j.contains("long_range")) {
            LongRangeSpec lr;
            lr.amplitude = j["long_range"].value("amplitude", 1.0);
            lr.exponent = j["long_range"].value("exponent", 2.0);
            c.long_range = lr;
        }
        if (j.contains("shift")) c.shift = j["shift"].get<double>();
        if (j.contains("lambda")) c.lambda = rational_field(j["lambda"]);
        if (j.contains("alpha1")) c.alpha1 = rational_field(j["alpha1"]);
        if (j.contains("alpha0")) c.alpha0 = rational_field(j["alpha0"]);
        if (j.contains("rho")) c.rho = rational_field(j["rho"]);
        if (j.contains("ladder")) {
            c.ladder_beta = j["ladder"].at("beta").get<std::vector<double>>();
            c.ladder_alpha = j["ladder"].at("alpha").get<std::vector<double>>();
        }
        if (j.contains("k_max")) c.k_max = j["k_max"].get<int>();
        if (j.contains("pattern")) c.pattern = j["pattern"].get<std::string>();
        if (j.contains("tail")) c.tail = tail_rule_from_string(j["tail"].get<std::string>());
        if (j.contains("sizing")) c.sizing = gap_sizing_from_string(j["sizing"].get<std::string>());
        if (j.contains("chi")) {
            c.chi.clear();
            for (const auto& q : j["chi"]) c.chi.push_back(rational_field(q));
        }
        if (j.contains("budget")) c.budget = j["budget"].get<std::int64_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("trials")) c.trials = j["trials"].get<int>();
        if (j.contains("exact")) c.exact = j["exact"].get<bool>();
        if (j.contains("out")) c.out = j["out"].get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config field has the wrong type: ") + e.what());
    }
    return c;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw io::IoError(what + ": " + e.what());
    }
}

int exit_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::BudgetExceeded: return kBudget;
        case ErrorKind::InvalidArgument:
        case ErrorKind::ParameterRejected:
        case ErrorKind::SeparationViolated:
        case ErrorKind::ConfigurationNotFlipFlop:
        case ErrorKind::ConeNotInvariant:
        case ErrorKind::ModulusTooWeak:
        case ErrorKind::ToleranceUnreachable: return kConfig;
        default: return kFail;
    }
}

// Runs a command body, mapping library errors to exit codes.
template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (const io::IoError& e) {
        log << "error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        log << "error (" << error_kind_name(e.kind()) << "): " << e.what() << '\n';
        return exit_for(e);
    } catch (const fs::filesystem_error& e) {
        log << "error: " << e.what() << '\n';
        return kIo;
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string scale_marks(const std::vector<std::vector<std::int64_t>>& schedules, std::int64_t n) {
    std::string s;
    for (std::size_t k = 0; k < schedules.size(); ++k) {
        const auto& P = schedules[k];
        if (std::binary_search(P.begin(), P.end(), n)) {
            if (!s.empty()) s += ';';
            s += std::to_string(k + 1);
        }
    }
    return s;
}

struct RunResult {
    std::int64_t T = 0;
    std::vector<std::uint8_t> codes;
    ScaleLadder ladder;
    PrefixSums sums;
    double bound = 0.0;
};

// The construct pipeline for one family; artifacts go to dir.
int construct_into(const FlipFlopFamily& fam, const RunConfig& c, double extra_shift, const fs::path& dir,
                   std::ostream& log, RunResult* result) {
    ScaleLadder ladder = run_ladder(fam, c);
    LengthPrediction pred = predict_length(fam, ladder, c.k_max, c.sizing);
    if (pred.min_length > c.budget) {
        if (pred.min_length == std::numeric_limits<std::int64_t>::max())
            log << "predicted T overflows 64 bits, far beyond the step budget " << c.budget << '\n';
        else
            log << "predicted T >= " << pred.min_length << " exceeds the step budget " << c.budget << '\n';
        return kBudget;
    }
    Pattern pattern = pattern_from_tag(c.pattern);
    ConstructOptions opt;
    opt.sizing = c.sizing;
    opt.step_budget = c.budget;
    ControlledOrbitReport rep =
        build_all_scales(fam, fam.canonical_member(pattern.at(0)), pattern, ladder, c.k_max, opt, c.tail);
    const SegmentResult& seg = rep.segment;
    const std::int64_t T = seg.chain.length();
    CodedOrbit orbit = fam.coded_orbit(seg.chain, c.tail);
    PrefixSums sums = prefix_sums(fam.potential().coded, orbit, T);
    const double beta1 = fam.potential().beta1;

    json chain;
    chain["schema_version"] = io::kSchemaVersion;
    chain["kind"] = "chain";
    json cfg = config_json(c);
    cfg.erase("out");  // reruns into another directory stay byte-identical
    chain["config"] = cfg;
    chain["extra_shift"] = extra_shift;
    chain["model"] = model_kind_name(c.model);
    chain["T"] = T;
    chain["k_max"] = c.k_max;
    chain["tau"] = seg.ladder.tau;
    chain["tail"] = tail_rule_name(c.tail);
    chain["pattern"] = c.pattern;
    chain["block_pattern"] = signs_to_string(seg.consumed_pattern);
    chain["codes"] = io::codes_to_string(orbit.head);
    chain["period"] = io::codes_to_string(orbit.period);
    chain["entrance_sum"] = interval_json(seg.entrance_sum);
    chain["entrance_average"] = interval_json(seg.entrance_average);
    chain["certified"] = rep.certified;

    json sched;
    sched["schema_version"] = io::kSchemaVersion;
    sched["kind"] = "schedules";
    sched["T"] = T;
    sched["tau"] = seg.ladder.tau;
    json scales = json::array();
    for (int k = 1; k <= c.k_max; ++k) {
        json s = {{"scale", k},
                  {"beta", seg.ladder.beta_k(k)},
                  {"alpha", seg.ladder.alpha_k(k)},
                  {"t", seg.ladder.t.at(k)}};
        for (const ScalePlan& p : seg.plan)
            if (p.k == k) {
                s["eta"] = p.eta;
                s["horizon"] = p.horizon;
                s["m"] = p.m;
                s["ell0"] = p.ell0;
            }
        s["control_times"] = seg.schedules.at(k - 1);
        scales.push_back(s);
    }
    sched["scales"] = scales;

    bool pass = rep.certified;
    json report;
    report["schema_version"] = io::kSchemaVersion;
    report["kind"] = "construct_report";
    report["model"] = model_kind_name(c.model);
    report["T"] = T;
    report["k_max"] = c.k_max;
    report["tau"] = seg.ladder.tau;
    report["certified"] = rep.certified;
    json checks = json::array();
    for (int k = 1; k <= c.k_max; ++k) {
        ControlReport r = verify_gap_control(sums, seg.schedules.at(k - 1), seg.ladder.beta_k(k), seg.ladder.t.at(k), k);
        double worst = 0;
        for (const auto& a : r.gap_averages) worst = std::fmax(worst, a.mag());
        checks.push_back({{"scale", k},
                          {"beta", r.beta},
                          {"t", r.t},
                          {"gaps", r.gap_averages.size()},
                          {"max_abs_gap_average", worst},
                          {"pass", r.pass},
                          {"reason", r.reason}});
        pass = pass && r.pass;
    }
    report["scales"] = checks;
    int k_used = 0;
    double bound = envelope_bound(seg.ladder, c.k_max, beta1, T, &k_used);
    Interval avg = sums.prefix(T) / Interval{static_cast<double>(T)};
    bool respected = abs(avg).hi <= bound;
    report["envelope"] = {{"k", k_used}, {"bound", bound}, {"average", interval_json(avg)}, {"respected", respected}};
    pass = pass && respected;
    report["pass"] = pass;

    io::write_file(dir / "chain.json", dump(chain));
    io::write_file(dir / "schedules.json", dump(sched));
    io::write_file(dir / "report.json", dump(report));
    {
        std::ostringstream csv;
        io::write_prefix_csv(csv, sums, seg.schedules);
        io::write_file(dir / "prefix.csv", csv.str());
    }
    log << model_kind_name(c.model) << ": T = " << T << ", tau = " << seg.ladder.tau << ", k_max = " << c.k_max
        << (pass ? ", all scales controlled" : ", control FAILED") << '\n';
    if (result) {
        result->T = T;
        result->codes = orbit.head;
        result->ladder = seg.ladder;
        result->sums = std::move(sums);
        result->bound = bound;
    }
    return pass ? kPass : kFail;
}

// Gap sums from exact rational local values.
ControlReport verify_exact(const CodedPotential& pot, const std::vector<std::uint8_t>& codes,
                           const std::vector<std::int64_t>& P, double beta, std::int64_t t, std::int64_t T, int scale) {
    ControlReport r;
    r.scale = scale;
    r.beta = beta;
    r.t = t;
    r.control_times = P;
    r.pass = true;
    auto fail = [&](std::int64_t a, std::int64_t b, const std::string& why) {
        if (!r.pass) return;
        r.pass = false;
        r.failure = std::make_pair(a, b);
        r.reason = why;
    };
    const std::size_t A = pot.local.size();
    std::vector<Rational> lo(A), hi(A);
    for (std::size_t a = 0; a < A; ++a) {
        lo[a] = rational_from_double(pot.local[a].lo);
        hi[a] = rational_from_double(pot.local[a].hi);
    }
    const Rational b = rational_from_double(beta);
    if (P.empty() || P.front() != 0) {
        fail(0, 0, "control times must start at 0");
        return r;
    }
    if (P.back() != T) fail(P.back(), T, "control times must end at T = " + std::to_string(T));
    std::vector<std::int64_t> count(A);
    for (std::size_t i = 0; i + 1 < P.size(); ++i) {
        std::int64_t from = P[i], to = P[i + 1];
        if (to <= from || to > T) {
            fail(from, to, "control times must be strictly increasing within [0, T]");
            continue;
        }
        if (to - from > t) fail(from, to, "gap length " + std::to_string(to - from) + " exceeds t = " + std::to_string(t));
        std::fill(count.begin(), count.end(), 0);
        for (std::int64_t n = from; n < to; ++n) ++count[codes[n]];
        Rational slo = 0, shi = 0;
        for (std::size_t a = 0; a < A; ++a) {
            slo += lo[a] * Rational(static_cast<long>(count[a]));
            shi += hi[a] * Rational(static_cast<long>(count[a]));
        }
        Rational len(static_cast<long>(to - from));
        r.gap_averages.push_back(Interval{enclose(slo / len).lo, enclose(shi / len).hi});
        if (shi > b * len || slo < -b * len) fail(from, to, "gap average not within [-beta, beta]");
    }
    return r;
}

}  // namespace

RunConfig config_from_json(const std::string& text) { return config_from(parse_json(text, "config")); }

std::string config_to_json(const RunConfig& c) { return dump(config_json(c)); }

ShiftModelSpec shift_spec(const RunConfig& c, double extra_shift) {
    ShiftModelSpec spec = default_shift_spec(c.model == ModelKind::LongRange);
    if (!c.symbols.empty()) spec.symbols = c.symbols;
    if (c.model == ModelKind::LongRange && c.long_range) spec.long_range = *c.long_range;
    spec.shift = c.shift + extra_shift;
    return spec;
}

SpawnerParams spawner_params(const RunConfig& c) {
    SpawnerParams p = default_spawner_params();
    p.lambda = c.lambda;
    p.alpha1 = c.alpha1;
    p.alpha0 = c.alpha0;
    p.rho = c.rho;
    return p;
}

std::unique_ptr<FlipFlopFamily> make_family(const RunConfig& c, double extra_shift) {
    if (c.model == ModelKind::Spawner)
        return std::make_unique<SpawnerFamily>(spawner_params(c), c.shift + extra_shift);
    return std::make_unique<ShiftModel>(shift_spec(c, extra_shift));
}

ScaleLadder run_ladder(const FlipFlopFamily& fam, const RunConfig& c) {
    if (c.ladder_beta.empty()) return default_ladder(fam.potential(), c.k_max);
    return make_ladder(fam.potential(), c.ladder_beta, c.ladder_alpha);
}

int cmd_construct(const RunConfig& c, std::ostream& log) {
    return guarded(log, [&] {
        c.validate();
        auto fam = make_family(c);
        return construct_into(*fam, c, 0.0, c.out, log, nullptr);
    });
}

int cmd_verify(const VerifyInputs& in, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        json cj = parse_json(io::read_file(in.chain), in.chain.string());
        json sj = parse_json(io::read_file(in.schedules), in.schedules.string());
        RunConfig c;
        double extra_shift = 0;
        std::int64_t T = 0;
        int tau = 0;
        std::vector<std::uint8_t> head, period;
        Interval entrance_average;
        struct Scale {
            int k;
            double beta;
            std::int64_t t;
            std::vector<std::int64_t> P;
        };
        std::vector<Scale> scales;
        try {
            if (cj.at("schema_version").get<int>() != io::kSchemaVersion || cj.at("kind") != "chain")
                throw io::IoError("not a chain record of schema version " + std::to_string(io::kSchemaVersion));
            if (sj.at("schema_version").get<int>() != io::kSchemaVersion || sj.at("kind") != "schedules")
                throw io::IoError("not a schedule record of schema version " + std::to_string(io::kSchemaVersion));
            c = config_from(cj.at("config"));
            extra_shift = cj.at("extra_shift").get<double>();
            T = cj.at("T").get<std::int64_t>();
            tau = sj.at("tau").get<int>();
            entrance_average = interval_field(cj.at("entrance_average"));
            for (const auto& s : sj.at("scales"))
                scales.push_back({s.at("scale").get<int>(), s.at("beta").get<double>(), s.at("t").get<std::int64_t>(),
                                  s.at("control_times").get<std::vector<std::int64_t>>()});
            if (sj.at("T").get<std::int64_t>() != T) throw io::IoError("chain and schedules disagree on T");
        } catch (const json::exception& e) {
            throw io::IoError(std::string("malformed record: ") + e.what());
        }
        c.validate();
        auto fam = make_family(c, extra_shift);
        const Potential& pot = fam->potential();
        try {
            head = io::codes_from_string(cj.at("codes").get<std::string>(), fam->code_count());
            period = io::codes_from_string(cj.at("period").get<std::string>(), fam->code_count());
        } catch (const json::exception& e) {
            throw io::IoError(std::string("malformed record: ") + e.what());
        }
        if (T < 1 || static_cast<std::int64_t>(head.size()) < T) throw io::IoError("orbit shorter than T");

        json rep;
        rep["schema_version"] = io::kSchemaVersion;
        rep["kind"] = "verify_report";
        rep["model"] = model_kind_name(c.model);
        rep["T"] = T;
        rep["arithmetic"] = c.exact ? "exact" : "float";
        bool pass = true;
        std::vector<std::string> problems;
        auto problem = [&](const std::string& s) {
            pass = false;
            problems.push_back(s);
        };

        // the schedule constants must be the ones the configuration implies
        ScaleLadder ladder = run_ladder(*fam, c);
        plan_scales(*fam, ladder, c.k_max, c.sizing);
        if (ladder.tau != tau) problem("tau " + std::to_string(tau) + " differs from " + std::to_string(ladder.tau));
        if (static_cast<int>(scales.size()) != c.k_max) problem("expected " + std::to_string(c.k_max) + " scales");

        CodedOrbit orbit{head, period};
        PrefixSums sums = prefix_sums(pot.coded, orbit, T);
        json checks = json::array();
        for (std::size_t i = 0; i < scales.size(); ++i) {
            const Scale& s = scales[i];
            if (s.k != static_cast<int>(i) + 1 || s.k > ladder.depth()) {
                problem("scale numbering is broken at entry " + std::to_string(i));
                continue;
            }
            if (s.beta != ladder.beta_k(s.k)) problem("beta_" + std::to_string(s.k) + " differs from the ladder");
            if (s.t != ladder.t.at(s.k)) problem("t_" + std::to_string(s.k) + " differs from the ladder");
            ControlReport r;
            try {
                r = c.exact ? verify_exact(pot.coded, head, s.P, s.beta, s.t, T, s.k)
                            : verify_gap_control(sums, s.P, s.beta, s.t, s.k);
            } catch (const Error& e) {
                r.scale = s.k;
                r.pass = false;
                r.reason = e.what();
            }
            if (!r.pass) problem("scale " + std::to_string(s.k) + ": " + r.reason);
            checks.push_back({{"scale", s.k}, {"beta", s.beta}, {"t", s.t}, {"gaps", r.gap_averages.size()},
                              {"pass", r.pass}, {"reason", r.reason}});
        }
        rep["scales"] = checks;
        Interval avg = sums.prefix(T) / Interval{static_cast<double>(T)};
        if (!avg.intersects(entrance_average)) problem("recomputed average misses the recorded entrance average");

        if (in.prefix) {
            std::ifstream f(*in.prefix);
            if (!f) throw io::IoError("cannot open " + in.prefix->string());
            std::vector<io::PrefixRow> rows = io::read_prefix_csv(f);
            std::vector<std::vector<std::int64_t>> sched;
            for (const Scale& s : scales) sched.push_back(s.P);
            bool ok = static_cast<std::int64_t>(rows.size()) == T;
            if (!ok) problem("prefix CSV has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(T));
            for (std::size_t i = 0; ok && i < rows.size(); ++i) {
                const io::PrefixRow& row = rows[i];
                std::int64_t n = static_cast<std::int64_t>(i) + 1;
                Interval phi = sums.prefix(n);
                Interval a = phi / Interval{static_cast<double>(n)};
                std::string why;
                if (row.n != n) why = "index";
                else if (!row.phi.intersects(phi)) why = "phi_n";
                else if (!row.avg.intersects(a)) why = "average";
                else if (row.marks != scale_marks(sched, n)) why = "scale marks";
                if (!why.empty()) {
                    problem("prefix CSV row " + std::to_string(n) + ": " + why + " does not match the re-summation");
                    ok = false;
                }
            }
            rep["prefix_checked"] = ok;
        }
        rep["problems"] = problems;
        rep["pass"] = pass;
        out << dump(rep);
        for (const auto& p : problems) log << "verify: " << p << '\n';
        return pass ? kPass : kFail;
    });
}

int cmd_blender(const RunConfig& c, std::ostream& out, std::ostream& log) {
    return guarded(log, [&] {
        c.validate();
        SpawnerParams p = spawner_params(c);
        p.validate();
        json rep;
        rep["schema_version"] = io::kSchemaVersion;
        rep["kind"] = "blender_report";
        rep["lambda"] = rational_json(p.lambda);
        rep["alpha1"] = rational_json(p.alpha1);
        rep["alpha0"] = rational_json(p.alpha0);
        bool pass = true;
        auto note = [&](bool ok, const std::string& what) {
            if (!ok) {
                pass = false;
                log << "blender: " << what << " failed\n";
            }
        };

        ConeReport cone = cone_check(p);
        json margins = json::array();
        for (const auto& m : cone.margins) margins.push_back({{"exact", to_string(m)}, {"value", nearest_double(m)}});
        rep["cone"] = {{"pass", cone.pass}, {"margins", margins}, {"boundary", cone.boundary}};
        note(cone.pass, "cone invariance");

        Rational diam_sq = 0;
        for (int j = 0; j < p.u; ++j) diam_sq += (p.Ju.hi[j] - p.Ju.lo[j]) * (p.Ju.hi[j] - p.Ju.lo[j]);
        Rational budget = Rational(1, 16) - p.alpha0 * p.alpha0 * diam_sq;
        rep["dichotomy_budget"] = {{"exact", to_string(budget)}, {"pass", budget > 0}};
        note(budget > 0, "blender dichotomy budget");

        json inv = json::array();
        for (DiscFamily f : {DiscFamily::D1, DiscFamily::D2, DiscFamily::D3}) {
            ImageMargin m = family_image_margin(p, f);
            bool ok = m.center > 0 && m.s > 0 && m.lip_factor < 1;
            inv.push_back({{"family", family_name(f)},
                           {"epsilon", 0},
                           {"center_margin", to_string(m.center)},
                           {"center_margin_lo", to_string(m.center_lo)},
                           {"center_margin_hi", to_string(m.center_hi)},
                           {"s_margin", to_string(m.s)},
                           {"lip_factor", to_string(m.lip_factor)},
                           {"pass", ok}});
            note(ok, std::string("exact image containment of ") + family_name(f));
        }
        const Rational eps_q = (p.lambda - 1) / 8;
        const double eps = nearest_double(eps_q);
        for (DiscFamily f : {DiscFamily::D1, DiscFamily::D2, DiscFamily::D3}) {
            ProbeReport pr = strict_invariance_probe(p, f, eps, c.trials, c.seed);
            inv.push_back({{"family", family_name(f)},
                           {"epsilon", to_string(eps_q)},
                           {"trials", pr.trials},
                           {"passed", pr.passed},
                           {"min_margin", to_string(pr.min_margin)},
                           {"failures", pr.failures},
                           {"pass", pr.pass()}});
            note(pr.pass(), std::string("strict invariance probe on ") + family_name(f));
        }
        rep["invariance"] = inv;

        const Rational mu = (p.lambda - 1) / 16;
        RobustnessReport rob = robustness_probe(p, mu, c.trials, c.seed);
        json probes = json::array();
        for (const auto& pr : rob.probes)
            probes.push_back({{"family", family_name(pr.family)}, {"trials", pr.trials}, {"passed", pr.passed}});
        rep["robustness"] = {{"mu", to_string(mu)},
                             {"epsilon", rob.epsilon},
                             {"perturbed_lambda", to_string(rob.perturbed.lambda)},
                             {"probes", probes},
                             {"pass", rob.pass()}};
        note(rob.pass(), "robustness probe");

        SafetyReport safety = safety_domain_check(p, safety_domain_recipe(p, Rational(1, 16)));
        rep["safety_domains"] = {{"inflation", "1/16"}, {"pass", safety.pass}, {"violations", safety.violations}};
        note(safety.pass, "safety domains");

        rep["pass"] = pass;
        out << dump(rep);
        return pass ? kPass : kFail;
    });
}

int cmd_chi_sweep(const RunConfig& c, std::ostream& log) {
    return guarded(log, [&] {
        c.validate();
        if (c.chi.empty()) throw Error(ErrorKind::InvalidArgument, "chi list is empty");
        auto base = make_family(c);
        const double alpha = base->potential().alpha;

        struct Row {
            std::string chi;
            bool rejected = false;
            int code = kFail;
            Interval achieved;
            std::int64_t T = 0;
            bool pass = false;
            std::string log;
        };
        std::vector<Row> rows(c.chi.size());
        std::vector<std::future<void>> jobs;
        for (std::size_t i = 0; i < c.chi.size(); ++i) {
            Row& row = rows[i];
            row.chi = io::fmt(nearest_double(c.chi[i]));
            if (!(enclose(c.chi[i]).mag() < alpha)) {
                row.rejected = true;
                log << "chi = " << to_string(c.chi[i]) << " rejected: |chi| must stay below the separation "
                    << io::fmt(alpha) << '\n';
                continue;
            }
            jobs.push_back(std::async(std::launch::async, [&c, &row, i] {
                std::ostringstream rlog;
                const double chi = nearest_double(c.chi[i]);
                row.code = guarded(rlog, [&] {
                    auto fam = make_family(c, 0.0 - chi);
                    RunResult res;
                    fs::path dir = fs::path(c.out) / ("chi_" + std::to_string(i));
                    int code = construct_into(*fam, c, 0.0 - chi, dir, rlog, &res);
                    if (code == kBudget) return code;
                    row.T = res.T;
                    std::vector<std::uint8_t> visits(res.codes.begin(), res.codes.begin() + res.T);
                    if (c.model == ModelKind::Spawner)
                        row.achieved = center_lyapunov(spawner_params(c), visits, false).value;
                    else
                        row.achieved = res.sums.prefix(res.T) / Interval{static_cast<double>(res.T)} + Interval{chi};
                    row.pass = code == kPass && abs(row.achieved - Interval{chi}).hi <= res.bound;
                    return static_cast<int>(row.pass ? kPass : kFail);
                });
                row.log = rlog.str();
            }));
        }
        for (auto& j : jobs) j.get();

        std::string csv = std::string(kSweepHeader) + "\n";
        bool any = false, all = true;
        for (const Row& row : rows) {
            log << row.log;
            if (row.rejected) {
                csv += row.chi + ",,,,rejected\n";
                continue;
            }
            any = true;
            all = all && row.pass;
            csv += row.chi + "," + io::fmt(row.achieved.lo) + "," + io::fmt(row.achieved.hi) + "," + io::fmt(row.T) +
                   "," + (row.pass ? "pass" : "fail") + "\n";
        }
        io::write_file(fs::path(c.out) / "sweep.csv", csv);
        if (!any) return static_cast<int>(kConfig);
        return all ? static_cast<int>(kPass) : static_cast<int>(kFail);
    });
}

}  // namespace ff::cli
