#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "doctest.h"
#include "flipflop/analysis.hpp"
#include "flipflop/pattern.hpp"
#include "flipflop/symbolic.hpp"
#include "gen.hpp"

using namespace ff;

namespace {

// phi(f^n x) for the long-range default: v(x_n) + sum_{m>=1} (m+1)^-2 u(x_{n+m}),
// explicit up to M terms, the rest bounded by sum_{m>M} (m+1)^-2 < 1/(M+1).
Interval long_range_oracle(const WordPoint& x, std::uint64_t n) {
    const std::uint64_t M = 400'000;
    auto u = [&](std::uint64_t i) { return x.at(i) == 0 ? 1.0L : -1.0L; };
    long double s = u(n);
    for (std::uint64_t m = M; m >= 1; --m) s += u(n + m) / ((m + 1.0L) * (m + 1.0L));
    double rest = 1.0 / (M + 1.0);
    return {static_cast<double>(s) - rest - 1e-12, static_cast<double>(s) + rest + 1e-12};
}

}  // namespace

TEST_CASE("step potential values are exact") {
    ShiftModel m(default_shift_spec(false));
    gen::Engine g(51);
    auto head = gen::codes(g, 300, 2);
    CodedOrbit o{head, {1}};
    auto v = pointwise_values(m.potential().coded, o, 400);
    REQUIRE(v.size() == 400);
    for (std::size_t n = 0; n < 400; ++n) {
        double want = (n < head.size() ? head[n] : 1) == 0 ? 1.0 : -1.0;
        CHECK(v[n] == Interval{want});
    }
}

TEST_CASE("long-range values enclose the direct sum") {
    ShiftModel m(default_shift_spec(true));
    gen::Engine g(52);
    for (int trial = 0; trial < 6; ++trial) {
        WordPoint x{gen::codes(g, static_cast<std::size_t>(gen::integer(g, 0, 80)), 2),
                    gen::codes(g, static_cast<std::size_t>(gen::integer(g, 1, 4)), 2)};
        CodedOrbit o{x.head, x.period};
        PrefixOptions opt;
        opt.window = static_cast<std::size_t>(gen::integer(g, 8, 64));
        auto v = pointwise_values(m.potential().coded, o, 40, opt);
        for (std::uint64_t n = 0; n < 40; n += 7) {
            CAPTURE(n);
            Interval oracle = long_range_oracle(x, n);
            CHECK(v[n].intersects(oracle));
            CHECK(v[n].width() <= 2.0 / static_cast<double>(opt.window + 1) + 1e-9);
        }
    }
}

TEST_CASE("fixed-point prefix sums enclose exact sums") {
    gen::Engine g(53);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = static_cast<std::size_t>(gen::integer(g, 1, 500));
        std::vector<Interval> v(n);
        for (auto& x : v) {
            double a = gen::uniform(g, -2, 2);
            x = Interval{a, a + gen::uniform(g, 0, 1e-9)};
        }
        PrefixSums ps(v);
        CHECK(ps.length() == static_cast<std::int64_t>(n));
        for (int q = 0; q < 20; ++q) {
            std::int64_t a = gen::integer(g, 0, static_cast<std::int64_t>(n));
            std::int64_t b = gen::integer(g, a, static_cast<std::int64_t>(n));
            Rational lo = 0, hi = 0;
            for (std::int64_t i = a; i < b; ++i) {
                lo += rational_from_double(v[i].lo);
                hi += rational_from_double(v[i].hi);
            }
            Interval r = ps.range(a, b);
            CHECK(rational_from_double(r.lo) <= lo);
            CHECK(hi <= rational_from_double(r.hi));
            // the gap carries its own widths only
            CHECK(r.width() <= Rational(hi - lo).get_d() + 1e-15 * (b - a + 2));
        }
    }
    PrefixSums ps(std::vector<Interval>{1.0, 2.0});
    CHECK_THROWS_AS(ps.range(1, 3), Error);
}

TEST_CASE("gap sums from the kernels agree with prefix differences") {
    ShiftModel m(default_shift_spec(false));
    gen::Engine g(54);
    auto head = gen::codes(g, 5000, 2);
    CodedOrbit o{head, {0}};
    PrefixSums ps = prefix_sums(m.potential().coded, o, 5000);
    std::vector<std::int64_t> P{0};
    while (P.back() < 5000) P.push_back(std::min<std::int64_t>(5000, P.back() + gen::integer(g, 1, 97)));
    std::vector<const kernels::KernelTable*> ks{&kernels::scalar_kernels()};
    if (kernels::avx2_kernels()) ks.push_back(kernels::avx2_kernels());
    for (const auto* k : ks) {
        auto gaps = gap_sums_resummed(m.potential().coded, o, P, *k);
        REQUIRE(gaps.size() + 1 == P.size());
        for (std::size_t i = 0; i < gaps.size(); ++i) CHECK(gaps[i] == ps.range(P[i], P[i + 1]));
    }
    ShiftModel lr(default_shift_spec(true));
    CHECK_THROWS_AS(gap_sums_resummed(lr.potential().coded, o, P, kernels::scalar_kernels()), Error);
}

TEST_CASE("gap control accepts controlled schedules and names failures") {
    // +1 -1 repeated: every even gap averages 0
    std::vector<Interval> vals;
    for (int i = 0; i < 40; ++i) vals.push_back(i % 2 ? -1.0 : 1.0);
    PrefixSums ps(vals);
    std::vector<std::int64_t> P;
    for (int i = 0; i <= 40; i += 4) P.push_back(i);
    ControlReport ok = verify_gap_control(ps, P, 0.0, 4, 1);
    CHECK(ok.pass);
    CHECK(ok.gap_averages.size() == 10);

    auto longer = P;
    longer.erase(longer.begin() + 3);
    ControlReport gap = verify_gap_control(ps, longer, 0.0, 4, 1);
    CHECK_FALSE(gap.pass);
    CHECK(gap.failure == std::make_pair<std::int64_t, std::int64_t>(8, 16));

    auto odd = P;
    odd[2] = 7;
    ControlReport avg = verify_gap_control(ps, odd, 0.1, 4, 1);
    CHECK_FALSE(avg.pass);
    CHECK(avg.reason.find("average") != std::string::npos);

    ControlReport start = verify_gap_control(ps, {1, 40}, 1.0, 40, 1);
    CHECK_FALSE(start.pass);
    ControlReport end = verify_gap_control(ps, {0, 36}, 1.0, 40, 1);
    CHECK_FALSE(end.pass);

    // vector-of-sums overload agrees
    std::vector<Interval> sums{0.0};
    for (auto v : vals) sums.push_back(sums.back() + v);
    CHECK(verify_gap_control(sums, P, 0.0, 4, 1).pass);
    CHECK_FALSE(verify_gap_control(sums, longer, 0.0, 4, 1).pass);
}

TEST_CASE("tau itinerary classifies against the separation") {
    std::vector<Interval> vals{1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    auto it = tau_itinerary_from_values(vals, 3, 0.5, 3);
    CHECK(signs_to_string(it) == "+-+");
    CHECK(signs_to_string(tau_itinerary_from_values(vals, 3, 0.5, 2, 3)) == "-+");
    std::vector<Interval> vague{Interval{0.4, 0.6}, 0.0, 0.0};
    try {
        tau_itinerary_from_values(vague, 3, 0.5, 1);
        FAIL("expected an ambiguous classification");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AmbiguousClassification);
    }
}

TEST_CASE("word census counts distinct windows exactly") {
    gen::Engine g(55);
    for (int trial = 0; trial < 100; ++trial) {
        auto signs = gen::signs(g, static_cast<std::size_t>(gen::integer(g, 0, 300)));
        int L = static_cast<int>(gen::integer(g, 1, 8));
        std::string s = signs_to_string(signs);
        std::set<std::string> words;
        for (std::size_t i = 0; i + L <= s.size(); ++i) words.insert(s.substr(i, L));
        Census c = word_census(signs, L, 5);
        CHECK(c.count == words.size());
        CHECK(c.complete == (words.size() == (1u << L)));
        if (!words.empty()) CHECK(c.estimate == doctest::Approx(std::log(double(words.size())) / (5.0 * L)));
    }
    Census full = word_census(Pattern::champernowne().prefix(2000), 6, 5);
    CHECK(full.complete);
    CHECK(full.estimate == doctest::Approx(std::log(2.0) / 5));
}

TEST_CASE("envelope bound uses the deepest elapsed scale") {
    ScaleLadder L;
    L.tau = 5;
    L.beta = {1.0, 0.25};
    L.alpha = {0.5, 0.125};
    L.t = {1, 5, 100};
    int k = -1;
    CHECK(envelope_bound(L, 2, 1.0, 3, &k) == 1.0);
    CHECK(k == 0);
    CHECK(envelope_bound(L, 2, 1.0, 10, &k) == doctest::Approx(1.5));
    CHECK(k == 1);
    CHECK(envelope_bound(L, 2, 1.0, 200, &k) == doctest::Approx(0.75));
    CHECK(k == 2);
    CHECK(envelope_bound(L, 1, 1.0, 200, &k) == doctest::Approx(1.025));
    CHECK_THROWS_AS(envelope_bound(L, 2, 1.0, 0), Error);
}
