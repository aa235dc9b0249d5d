#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "flipflop/cli.hpp"
#include "flipflop/io.hpp"
#include "json.hpp"

using namespace ff;
using namespace ff::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "flipflop_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunConfig config(ModelKind model, int k_max, const fs::path& out) {
    RunConfig c;
    c.model = model;
    c.k_max = k_max;
    c.out = out.string();
    c.trials = 100;
    return c;
}

int verify_dir(const fs::path& dir, bool with_prefix = true) {
    std::ostringstream out, log;
    VerifyInputs in{dir / "chain.json", dir / "schedules.json", std::nullopt};
    if (with_prefix) in.prefix = dir / "prefix.csv";
    return cmd_verify(in, out, log);
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

}  // namespace

TEST_CASE("construct output verifies for every model and arithmetic mode") {
    struct Case {
        ModelKind model;
        int k;
        bool exact;
    };
    for (Case cs : {Case{ModelKind::Symbolic, 2, false}, Case{ModelKind::Symbolic, 3, true},
                    Case{ModelKind::Spawner, 2, false}, Case{ModelKind::Spawner, 2, true},
                    Case{ModelKind::LongRange, 1, false}}) {
        CAPTURE(model_kind_name(cs.model));
        CAPTURE(cs.exact);
        fs::path dir = scratch(std::string("rt_") + model_kind_name(cs.model) + (cs.exact ? "_exact" : ""));
        RunConfig c = config(cs.model, cs.k, dir);
        c.exact = cs.exact;
        std::ostringstream log;
        REQUIRE(cmd_construct(c, log) == kPass);
        for (const char* f : {"chain.json", "schedules.json", "prefix.csv", "report.json"}) CHECK(fs::exists(dir / f));
        CHECK(verify_dir(dir) == kPass);
        json report = json::parse(slurp(dir / "report.json"));
        CHECK(report["schema_version"] == io::kSchemaVersion);
        CHECK(report["pass"] == true);
    }
}

TEST_CASE("prefix CSV has the documented columns and one row per step") {
    fs::path dir = scratch("columns");
    std::ostringstream log;
    REQUIRE(cmd_construct(config(ModelKind::Symbolic, 2, dir), log) == kPass);
    std::istringstream csv(slurp(dir / "prefix.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header == "n,phi_n_lo,phi_n_hi,avg_lo,avg_hi,scale_marks");
    std::istringstream again(slurp(dir / "prefix.csv"));
    auto rows = io::read_prefix_csv(again);
    json chain = json::parse(slurp(dir / "chain.json"));
    const std::int64_t T = chain["T"];
    REQUIRE(static_cast<std::int64_t>(rows.size()) == T);
    // independent re-summation of the +-1 codes
    const std::string codes = chain["codes"];
    std::int64_t s = 0;
    for (std::int64_t n = 1; n <= T; ++n) {
        s += codes[n - 1] == '0' ? 1 : -1;
        CHECK(rows[n - 1].phi == Interval{static_cast<double>(s)});
    }
    CHECK(rows.back().marks == "1;2");
}

TEST_CASE("golden prefix file for the symbolic model at scale 2") {
    fs::path dir = scratch("golden");
    std::ostringstream log;
    REQUIRE(cmd_construct(config(ModelKind::Symbolic, 2, dir), log) == kPass);
    CHECK(slurp(dir / "prefix.csv") == slurp(fs::path(FLIPFLOP_TEST_DATA) / "symbolic_k2_prefix.csv"));
    CHECK(slurp(dir / "schedules.json") == slurp(fs::path(FLIPFLOP_TEST_DATA) / "symbolic_k2_schedules.json"));
}

TEST_CASE("reruns are byte-identical") {
    for (ModelKind m : {ModelKind::Symbolic, ModelKind::Spawner}) {
        fs::path a = scratch("det_a"), b = scratch("det_b");
        std::ostringstream log;
        REQUIRE(cmd_construct(config(m, 2, a), log) == kPass);
        REQUIRE(cmd_construct(config(m, 2, b), log) == kPass);
        for (const char* f : {"chain.json", "schedules.json", "prefix.csv", "report.json"})
            CHECK(slurp(a / f) == slurp(b / f));
    }
    std::ostringstream x, y, log;
    RunConfig c = config(ModelKind::Spawner, 1, scratch("det_blender"));
    REQUIRE(cmd_blender(c, x, log) == kPass);
    REQUIRE(cmd_blender(c, y, log) == kPass);
    CHECK(x.str() == y.str());
}

TEST_CASE("verify rejects tampered artifacts") {
    fs::path dir = scratch("tamper");
    std::ostringstream log;
    REQUIRE(cmd_construct(config(ModelKind::Symbolic, 2, dir), log) == kPass);
    const std::string chain = slurp(dir / "chain.json"), sched = slurp(dir / "schedules.json"),
                      prefix = slurp(dir / "prefix.csv");

    SUBCASE("enlarged gap") {
        json s = json::parse(sched);
        auto& P = s["scales"][0]["control_times"];
        P.erase(P.begin() + 1);
        io::write_file(dir / "schedules.json", s.dump(2));
        CHECK(verify_dir(dir, false) == kFail);
    }
    SUBCASE("loosened beta") {
        json s = json::parse(sched);
        s["scales"][1]["beta"] = 0.5;
        io::write_file(dir / "schedules.json", s.dump(2));
        CHECK(verify_dir(dir, false) == kFail);
    }
    SUBCASE("flipped code") {
        json c = json::parse(chain);
        std::string codes = c["codes"];
        for (std::size_t i = 0; i < 10; ++i) codes[i] = codes[i] == '0' ? '1' : '0';
        c["codes"] = codes;
        io::write_file(dir / "chain.json", c.dump(2));
        CHECK(verify_dir(dir, false) == kFail);
    }
    SUBCASE("altered sum") {
        std::string t = prefix;
        auto pos = t.find("\n3,");
        REQUIRE(pos != std::string::npos);
        auto end = t.find('\n', pos + 1);
        t.replace(pos + 1, end - pos - 1, "3,7,7,2.3333333333333335,2.3333333333333335,");
        io::write_file(dir / "prefix.csv", t);
        CHECK(verify_dir(dir) == kFail);
    }
    SUBCASE("truncated json") {
        io::write_file(dir / "chain.json", chain.substr(0, chain.size() / 2));
        CHECK(verify_dir(dir) == kIo);
    }
    SUBCASE("missing file") {
        fs::remove(dir / "schedules.json");
        CHECK(verify_dir(dir) == kIo);
    }
    SUBCASE("bad csv header") {
        io::write_file(dir / "prefix.csv", "n,phi\n");
        CHECK(verify_dir(dir) == kIo);
    }
}

TEST_CASE("exit codes for budget and configuration problems") {
    std::ostringstream log, out;
    RunConfig c = config(ModelKind::Symbolic, 3, scratch("budget"));
    c.budget = 1000;
    CHECK(cmd_construct(c, log) == kBudget);
    c.sizing = GapSizing::Paper;
    c.budget = 10'000'000;
    CHECK(cmd_construct(c, log) == kBudget);

    RunConfig bad = config(ModelKind::Spawner, 2, scratch("bad"));
    bad.alpha1 = Rational(1, 5);
    CHECK(cmd_blender(bad, out, log) == kConfig);
    CHECK(cmd_construct(bad, log) == kConfig);

    RunConfig lr = config(ModelKind::LongRange, 1, scratch("lrx"));
    lr.exact = true;
    CHECK(cmd_construct(lr, log) == kConfig);

    CHECK_THROWS_AS(config_from_json(R"({"model": "symbolic", "kmax": 3})"), Error);
    CHECK_THROWS_AS(config_from_json(R"({"model": "torus"})"), Error);
    CHECK_THROWS_AS(config_from_json("{"), io::IoError);
}

TEST_CASE("blender report flags a containment failure at lambda 13/10") {
    RunConfig c = config(ModelKind::Spawner, 1, scratch("wide"));
    c.lambda = Rational(13, 10);
    std::ostringstream out, log;
    CHECK(cmd_blender(c, out, log) == kFail);
    json r = json::parse(out.str());
    CHECK(r["invariance"][0]["pass"] == false);
    CHECK(r["invariance"][0]["center_margin"] == "-1/16");
}

TEST_CASE("config files round-trip") {
    RunConfig c = config(ModelKind::Spawner, 3, "somewhere");
    c.lambda = Rational(11, 10);
    c.chi = {Rational(1, 100)};
    c.ladder_beta = {0.1, 0.02};
    c.ladder_alpha = {0.05, 0.01};
    c.tail = TailRule::FixedPoint;
    RunConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(back.lambda == Rational(11, 10));
    CHECK(config_from_json(R"({"lambda": 1.05})").lambda == Rational(21, 20));
}

TEST_CASE("chi sweep writes one row per value and rejects out-of-range targets") {
    fs::path dir = scratch("sweep");
    RunConfig c = config(ModelKind::Spawner, 2, dir);
    c.chi = {Rational(-1, 50), Rational(0), Rational(1, 20)};
    std::ostringstream log;
    CHECK(cmd_chi_sweep(c, log) == kPass);
    std::istringstream csv(slurp(dir / "sweep.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == kSweepHeader);
    std::vector<std::string> rows;
    while (std::getline(csv, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].rfind("-0.02,", 0) == 0);
    CHECK(rows[0].substr(rows[0].size() - 4) == "pass");
    CHECK(rows[2] == "0.05,,,,rejected");
    CHECK(verify_dir(dir / "chi_0") == kPass);
}
