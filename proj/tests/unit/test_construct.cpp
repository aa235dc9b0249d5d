#include <algorithm>
#include <chrono>
#include <numeric>

#include "doctest.h"
#include "flipflop/analysis.hpp"
#include "flipflop/construct.hpp"
#include "flipflop/pattern.hpp"
#include "flipflop/symbolic.hpp"
#include "gen.hpp"

using namespace ff;

namespace {

// Least tau > 1 with alpha1 tau < alpha (tau - 1) - beta1, in exact rationals.
int tau_oracle(const Rational& beta1, const Rational& alpha, const Rational& alpha1) {
    for (int tau = 2;; ++tau)
        if (alpha1 * tau < alpha * (tau - 1) - beta1) return tau;
}

std::int64_t exact_sum(const std::vector<std::uint8_t>& codes, std::int64_t from, std::int64_t to) {
    std::int64_t s = 0;
    for (std::int64_t n = from; n < to; ++n) s += codes[n] == 0 ? 1 : -1;
    return s;
}

ScaleLadder step_ladder() {
    ShiftModel m(default_shift_spec(false));
    return make_ladder(m.potential(), {1.0, 0.25}, {0.5, 0.125});
}

}  // namespace

TEST_CASE("tau selection matches the integer scan") {
    CHECK(choose_tau(1, 1, 0.5) == 5);
    CHECK(choose_tau(1, 1, 0.1) == 3);
    CHECK(choose_tau(1, 1, 0.9) == 21);
    gen::Engine g(41);
    for (int trial = 0; trial < 300; ++trial) {
        // dyadic inputs keep the oracle exact
        double beta1 = gen::integer(g, 16, 64) / 16.0;
        double alpha = gen::integer(g, 4, static_cast<std::int64_t>(beta1 * 16)) / 16.0;
        double alpha1 = gen::integer(g, 1, static_cast<std::int64_t>(alpha * 64) - 1) / 64.0;
        int tau = choose_tau(beta1, alpha, alpha1);
        CAPTURE(beta1);
        CAPTURE(alpha);
        CAPTURE(alpha1);
        CHECK(tau == tau_oracle(rational_from_double(beta1), rational_from_double(alpha), rational_from_double(alpha1)));
        CHECK(tau_inequality_holds(tau, beta1, alpha, alpha1));
        CHECK_FALSE(tau_inequality_holds(tau - 1, beta1, alpha, alpha1));
    }
    CHECK_THROWS_AS(choose_tau(1, 1, 1), Error);
    CHECK_THROWS_AS(choose_tau(1, 0.5, 0.6), Error);
}

TEST_CASE("default ladder interleaves and validates") {
    ShiftModel m(default_shift_spec(false));
    ScaleLadder L = default_ladder(m.potential(), 4);
    CHECK(L.beta == std::vector<double>{1, 0.25, 0.0625, 0.015625});
    CHECK(L.alpha == std::vector<double>{0.5, 0.125, 0.03125, 0.0078125});
    CHECK(L.tau == 5);
    for (int k = 1; k < 4; ++k) {
        CHECK(L.beta_k(k) > L.alpha_k(k));
        CHECK(L.alpha_k(k) > L.beta_k(k + 1));
    }
    CHECK_THROWS_AS(make_ladder(m.potential(), {0.5, 0.25}, {0.3, 0.1}), Error);
    CHECK_THROWS_AS(make_ladder(m.potential(), {1.0, 0.6}, {0.5, 0.1}), Error);
}

TEST_CASE("plan constants obey the length recursion") {
    ShiftModel m(default_shift_spec(false));
    for (GapSizing sizing : {GapSizing::Sharp, GapSizing::Paper}) {
        ScaleLadder L = default_ladder(m.potential(), 3);
        auto plan = plan_scales(m, L, 3, sizing);
        REQUIRE(plan.size() == 3);
        CHECK(L.t[1] == L.tau);
        for (int k = 2; k <= 3; ++k) {
            const ScalePlan& p = plan[k - 1];
            CHECK(p.t == (p.m + p.ell0) * L.t[k - 1]);
            CHECK(p.min_length == (p.m + 1) * plan[k - 2].min_length);
            CHECK(p.eta == doctest::Approx((L.beta_k(k) - L.alpha_k(k)) / 4));
            CHECK(p.min_length <= p.t);
        }
    }
}

TEST_CASE("paper sizing reproduces m = 121 at scale 2") {
    ShiftModel m(default_shift_spec(false));
    ScaleLadder L = default_ladder(m.potential(), 2);
    auto plan = plan_scales(m, L, 2, GapSizing::Paper);
    CHECK(plan[1].m == 121);
}

TEST_CASE("distortion horizon is monotone in eta") {
    ShiftModel m(default_shift_spec(true));
    const Potential& phi = m.potential();
    std::int64_t prev = 0;
    for (double eta : {0.2, 0.1, 0.05, 0.02, 0.01}) {
        std::int64_t N = distortion_horizon(eta, 2.0, 0.5, phi.beta1, phi.modulus);
        CHECK(N >= prev);
        prev = N;
        DistortionDetail d = distortion_horizon_detail(eta, 2.0, 0.5, phi.beta1, phi.modulus);
        CHECK(phi.modulus(d.rho) < eta / 2);
        CHECK(d.N == N);
    }
    ShiftModel step(default_shift_spec(false));
    // locally constant potential: zero oscillation below 1/2
    CHECK(distortion_horizon_detail(0.05, 2.0, 0.5, 1.0, step.potential().modulus).n0 <= 1);
    CHECK_THROWS_AS(distortion_horizon(0.0, 2.0, 0.5, 1.0, phi.modulus), Error);
}

TEST_CASE("tau blocks certify their sign") {
    ShiftModel m(default_shift_spec(false));
    for (Sign first : {Sign::Plus, Sign::Minus})
        for (Sign body : {Sign::Plus, Sign::Minus}) {
            Chain c = tau_block(m, m.canonical_member(first), 5, body);
            CHECK(c.length() == 5);
            CHECK(c.control_times == std::vector<std::int64_t>{0, 5});
            Interval avg = entrance_average(m, c);
            std::int64_t s = exact_sum(c.codes, 0, 5);
            CHECK(avg.contains(s / 5.0));
        }
}

TEST_CASE("scale-2 controlled segments land in the target window") {
    ShiftModel m(default_shift_spec(false));
    ScaleLadder L = step_ladder();
    Pattern pat = Pattern::champernowne();
    for (Sign sign : {Sign::Plus, Sign::Minus}) {
        auto t0 = std::chrono::steady_clock::now();
        SegmentResult r = build_controlled_segment(m, m.canonical_member(pat.at(0)), pat, L, 2, sign);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CHECK(secs < 1.0);
        const std::int64_t T = r.chain.length();
        std::int64_t s = exact_sum(r.chain.codes, 0, T);
        // average in [1/8, 1/4] for +, [-1/4, -1/8] for -, compared in integers
        std::int64_t signed_sum = sign == Sign::Plus ? s : -s;
        CHECK(8 * signed_sum >= T);
        CHECK(4 * signed_sum <= T);
        // every gap of every schedule is controlled, exactly
        for (int k = 1; k <= 2; ++k) {
            const auto& P = r.schedules[k - 1];
            REQUIRE(P.front() == 0);
            REQUIRE(P.back() == T);
            for (std::size_t i = 0; i + 1 < P.size(); ++i) {
                std::int64_t len = P[i + 1] - P[i];
                CHECK(len <= r.ladder.t.at(k));
                std::int64_t gs = exact_sum(r.chain.codes, P[i], P[i + 1]);
                CHECK(std::abs(static_cast<double>(gs)) <= L.beta_k(k) * static_cast<double>(len));
            }
        }
    }
}

TEST_CASE("segment lengths stay within the predicted range") {
    ShiftModel m(default_shift_spec(false));
    Pattern pat = Pattern::champernowne();
    for (int k = 1; k <= 3; ++k) {
        ScaleLadder L = default_ladder(m.potential(), k);
        LengthPrediction pred = predict_length(m, L, k, GapSizing::Sharp);
        ControlledOrbitReport rep = build_all_scales(m, m.canonical_member(pat.at(0)), pat, L, k);
        CHECK(rep.certified);
        CHECK(rep.segment.chain.length() >= pred.min_length);
        CHECK(rep.segment.chain.length() <= pred.max_length);
    }
}

TEST_CASE("budget overruns are reported") {
    ShiftModel m(default_shift_spec(false));
    Pattern pat = Pattern::champernowne();
    ScaleLadder L = default_ladder(m.potential(), 3);
    ConstructOptions opt;
    opt.step_budget = 1000;
    try {
        build_all_scales(m, m.canonical_member(pat.at(0)), pat, L, 3, opt);
        FAIL("expected a budget error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BudgetExceeded);
    }
}

TEST_CASE("concatenation keeps codes and rejects broken links") {
    ShiftModel m(default_shift_spec(false));
    Chain a = tau_block(m, m.canonical_member(Sign::Plus), 5, Sign::Plus, Sign::Minus);
    Chain b = tau_block(m, m.exit_member(a), 5, Sign::Minus);
    CHECK(m.entrance_within_exit(a, b));
    Chain ab = concatenate(m, a, b);
    CHECK(ab.length() == 10);
    CHECK(std::equal(b.codes.begin(), b.codes.end(), ab.codes.begin() + 5));
    Chain c = tau_block(m, m.canonical_member(Sign::Plus), 5, Sign::Plus);
    CHECK_FALSE(m.entrance_within_exit(a, c));
    CHECK_THROWS_AS(concatenate(m, a, c), Error);
}

TEST_CASE("block constant and its least positive length") {
    CHECK(block_constant(100, 10, 10, 5, 1.0, 1.0, 1.0) == doctest::Approx(70.0));
    std::int64_t N = smallest_positive_block(10, 20, 5, 0.5, 0.25, 1.0);
    CHECK(block_constant(N, 10, 20, 5, 0.5, 0.25, 1.0) > 0);
    CHECK_THROWS_AS(block_constant(N - 1, 10, 20, 5, 0.5, 0.25, 1.0), Error);
}

TEST_CASE("champernowne pattern and its word horizon") {
    Pattern p = Pattern::champernowne();
    CHECK(signs_to_string(p.prefix(14)) == "+-+++--+--++++");
    for (int L = 1; L <= 8; ++L) {
        std::uint64_t B = all_words_horizon(p, L);
        REQUIRE(B > 0);
        // every L-word appears within the first B blocks, not within B - 1
        auto seen = [&](std::uint64_t n) {
            auto s = signs_to_string(p.prefix(n));
            std::vector<bool> hit(1u << L, false);
            for (std::size_t i = 0; i + L <= s.size(); ++i) {
                unsigned w = 0;
                for (int j = 0; j < L; ++j) w = w * 2 + (s[i + j] == '-');
                hit[w] = true;
            }
            return std::count(hit.begin(), hit.end(), true);
        };
        CHECK(seen(B) == (1 << L));
        CHECK(seen(B - 1) < (1 << L));
    }
    Pattern q = pattern_from_tag("periodic:+-");
    CHECK(signs_to_string(q.prefix(5)) == "+-+-+");
    CHECK(all_words_horizon(q, 2) == 0);
    CHECK_THROWS_AS(pattern_from_tag("nope"), Error);
}
