#include <cmath>

#include "doctest.h"
#include "flipflop/construct.hpp"
#include "flipflop/spawner.hpp"
#include "gen.hpp"

using namespace ff;

namespace {

Rational rat_uniform(gen::Engine& g, const Rational& lo, const Rational& hi) {
    // 2^20 grid points across [lo, hi]
    Rational step(static_cast<long>(gen::integer(g, 0, 1 << 20)), 1UL << 20);
    step.canonicalize();
    return lo + (hi - lo) * step;
}

// A member of the family: Frobenius norm of the differential at most alpha0,
// center and strong-stable ranges inside the bounds.
GraphDisc sample_member(const SpawnerParams& p, DiscFamily f, gen::Engine& g) {
    GraphDisc d = GraphDisc::flat(family_domain(p, f), 0, p.s, family_leg(f));
    const int entries = p.u * (1 + p.s);
    const Rational cap = p.alpha0 / entries;  // |entry| <= cap keeps the Frobenius norm below alpha0
    for (auto& x : d.gc) x = rat_uniform(g, -cap, cap);
    for (auto& row : d.Gs)
        for (auto& x : row) x = rat_uniform(g, -cap, cap);
    auto [clo, chi] = family_center_range(p, f);
    auto [rlo, rhi] = d.center_range();
    d.c0 = rat_uniform(g, clo + (d.c0 - rlo), chi - (rhi - d.c0));
    for (int k = 0; k < p.s; ++k) {
        auto [slo, shi] = d.s_range(k);
        d.s0[k] = rat_uniform(g, p.Js.lo[k] + (d.s0[k] - slo), p.Js.hi[k] - (shi - d.s0[k]));
    }
    return d;
}

}  // namespace

TEST_CASE("default parameters validate and carry the affine legs") {
    SpawnerParams p = default_spawner_params();
    CHECK_NOTHROW(p.validate());
    for (int i = 0; i < kLegs; ++i) {
        Box img = p.Au[i].image(p.Iu[i]);
        CHECK(img.lo[0] == -1);
        CHECK(img.hi[0] == 1);
    }
    CHECK(center_map(0, p.lambda, 0) == Rational(1, 40));
    CHECK(center_map(1, p.lambda, 0) == Rational(-1, 40));
    CHECK(center_map(2, p.lambda, Rational(21, 20)) == 1);
}

TEST_CASE("invalid parameters are rejected with the constraint named") {
    SpawnerParams p = default_spawner_params();
    p.alpha1 = Rational(1, 5);
    try {
        p.validate();
        FAIL("expected a rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParameterRejected);
        CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }
    SpawnerParams q = default_spawner_params();
    q.Iu[1] = q.Iu[0];
    CHECK_THROWS_AS(q.validate(), Error);
}

TEST_CASE("cone margins match the closed form") {
    SpawnerParams p = default_spawner_params();
    ConeReport r = cone_check(p);
    CHECK(r.pass);
    CHECK_FALSE(r.boundary);
    for (int i = 0; i < kLegs; ++i) {
        Rational rate = i == 2 ? 1 / p.lambda : p.lambda;
        Rational sigma = p.As[i].scale;
        Rational oracle = p.alpha0 - rmax(rate, sigma) * p.alpha1 / p.Au[i].scale;
        CHECK(r.margins[i] == oracle);
    }
    CHECK(r.margins[0] == Rational(19, 2000));
    CHECK(r.margins[2] == Rational(11, 1050));
    p.alpha0 = Rational(1, 100);
    ConeReport bad = cone_check(p);
    CHECK_FALSE(bad.pass);
    CHECK(bad.failing_leg == 0);
}

TEST_CASE("family image margins are exact endpoint arithmetic") {
    SpawnerParams p = default_spawner_params();
    const Rational lam = p.lambda;
    ImageMargin d1 = family_image_margin(p, DiscFamily::D1);
    // image of [-1/4, 1/8] under lambda x + (lambda-1)/2 measured against [-1/4, 1/4]
    CHECK(d1.center_lo == (lam - 1) / 4);
    CHECK(d1.center_hi == (6 - 5 * lam) / 8);
    CHECK(d1.center == Rational(1, 80));
    ImageMargin d2 = family_image_margin(p, DiscFamily::D2);
    CHECK(d2.center == d1.center);
    ImageMargin d3 = family_image_margin(p, DiscFamily::D3);
    CHECK(d3.center == Rational(1, 4) - p.rho / lam);
    CHECK(d1.s == Rational(5, 64));
    CHECK(d1.lip_factor == lam / 4);

    SpawnerParams wide = default_spawner_params();
    wide.lambda = Rational(13, 10);
    CHECK(family_image_margin(wide, DiscFamily::D1).center < 0);
}

TEST_CASE("blender dichotomy over random D members") {
    SpawnerParams p = default_spawner_params();
    gen::Engine g(61);
    int d1 = 0, d2 = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        GraphDisc d = sample_member(p, DiscFamily::D, g);
        REQUIRE(restrict_to_family(p, d, DiscFamily::D).ok);
        DiscFamily f = blender_choice(p, d);
        f == DiscFamily::D1 ? ++d1 : ++d2;
        Containment r = restrict_to_family(p, d, f);
        REQUIRE(r.ok);
        GraphDisc image = induced_apply(p, *r.disc, family_leg(f));
        Containment back = restrict_to_family(p, image, DiscFamily::D);
        CHECK(back.ok);
        CHECK(back.center_margin >= Rational(1, 80));
    }
    CHECK(d1 > 0);
    CHECK(d2 > 0);
}

TEST_CASE("negative family maps into D") {
    SpawnerParams p = default_spawner_params();
    gen::Engine g(62);
    for (int trial = 0; trial < 300; ++trial) {
        GraphDisc d = sample_member(p, DiscFamily::D3, g);
        GraphDisc image = induced_apply(p, d, 2);
        Containment back = restrict_to_family(p, image, DiscFamily::D);
        CHECK(back.ok);
        Containment neg = restrict_to_family(p, image, DiscFamily::D3);
        CHECK(neg.ok);
    }
}

TEST_CASE("delta distance is a metric on affine discs") {
    SpawnerParams p = default_spawner_params();
    gen::Engine g(63);
    for (int trial = 0; trial < 300; ++trial) {
        GraphDisc a = sample_member(p, DiscFamily::D, g), b = sample_member(p, DiscFamily::D, g),
                  c = sample_member(p, DiscFamily::D, g);
        double ab = delta_distance(a, b, 7), ba = delta_distance(b, a, 7), bc = delta_distance(b, c, 7),
               ac = delta_distance(a, c, 7);
        CHECK(delta_distance(a, a, 7) <= 1e-10);
        CHECK(std::fabs(ab - ba) <= 1e-10);
        CHECK(ac <= ab + bc + 1e-10);
        if (!(a == b)) CHECK(ab > 0);
    }
}

TEST_CASE("translated discs sit at twice the offset") {
    SpawnerParams p = default_spawner_params();
    gen::Engine g(64);
    for (int trial = 0; trial < 20; ++trial) {
        GraphDisc a = sample_member(p, DiscFamily::D, g);
        GraphDisc b = a;
        double h = gen::uniform(g, 1e-4, 0.1);
        b.c0 += rational_from_double(h);
        CHECK(delta_distance(a, b, 9) == doctest::Approx(2 * h).epsilon(1e-12));
    }
}

TEST_CASE("strict invariance probe") {
    SpawnerParams p = default_spawner_params();
    const double eps = nearest_double(Rational((p.lambda - 1) / 8));
    for (DiscFamily f : {DiscFamily::D1, DiscFamily::D2, DiscFamily::D3}) {
        ProbeReport r = strict_invariance_probe(p, f, eps, 200, 7);
        CAPTURE(family_name(f));
        CHECK(r.pass());
        CHECK(r.trials == 200);
        CHECK(r.min_margin > 0);
    }
    // far outside the certified radius the probe does find escapes
    ProbeReport wide = strict_invariance_probe(p, DiscFamily::D1, 0.5, 200, 7);
    CHECK_FALSE(wide.pass());
    CHECK_FALSE(wide.failures.empty());
    // deterministic in the seed
    ProbeReport again = strict_invariance_probe(p, DiscFamily::D1, eps, 200, 7);
    CHECK(again.min_margin == strict_invariance_probe(p, DiscFamily::D1, eps, 200, 7).min_margin);
}

TEST_CASE("robustness under small parameter perturbations") {
    SpawnerParams p = default_spawner_params();
    const Rational mu = (p.lambda - 1) / 16;
    SpawnerParams q = perturb_params(p, mu, 3);
    CHECK_NOTHROW(q.validate());
    CHECK(rabs(q.lambda - p.lambda) <= mu);
    for (int i = 0; i < kLegs; ++i) {
        CHECK(rabs(q.Au[i].scale - p.Au[i].scale) <= mu);
        Box img = q.Au[i].image(q.Iu[i]);
        CHECK(img.lo[0] == -1);
        CHECK(img.hi[0] == 1);
    }
    RobustnessReport r = robustness_probe(p, mu, 200, 5);
    CHECK(r.pass());
    CHECK(r.probes.size() == 3);
}

TEST_CASE("safety domains") {
    SpawnerParams p = default_spawner_params();
    CHECK(safety_domain_check(p, safety_domain_recipe(p, Rational(1, 16))).pass);
    auto V = safety_domain_recipe(p, Rational(1, 16));
    V[0][0] = V[0][0].inflated(Rational(2));
    SafetyReport bad = safety_domain_check(p, V);
    CHECK_FALSE(bad.pass);
    CHECK_FALSE(bad.violations.empty());
}

TEST_CASE("center Lyapunov average counts legs exactly") {
    SpawnerParams p = default_spawner_params();
    LyapunovResult r = center_lyapunov(p, {0, 1, 2, 0}, false);
    CHECK(r.ratio == Rational(1, 2));
    CHECK(r.value.contains(0.5 * std::log(1.05)));
    SpawnerParams q = p;
    q.n = {1, 2, 1};
    CHECK(center_lyapunov(q, {1, 1, 2}, true).ratio == Rational(1, 5));
}

TEST_CASE("spawner family chains stay in their families") {
    SpawnerFamily fam(default_spawner_params());
    CHECK(fam.potential().alpha < std::log(1.05));
    CHECK(fam.potential().alpha > std::log(1.05) - 1e-9);
    gen::Engine g(65);
    for (int trial = 0; trial < 20; ++trial) {
        auto want = gen::signs(g, static_cast<std::size_t>(gen::integer(g, 1, 12)));
        Chain c = fam.start(fam.canonical_member(Sign::Plus));
        for (Sign s : want) fam.extend_in_place(c, s);
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(fam.sign_of_code(c.codes[i + 1]) == want[i]);
        auto discs = fam.exact_discs(c);
        REQUIRE(discs.size() == c.codes.size());
        for (std::size_t i = 0; i + 1 < discs.size(); ++i) {
            // each member's image under its leg contains the next member
            GraphDisc image = induced_apply(default_spawner_params(), discs[i], c.codes[i]);
            Containment r = restrict_to_family(default_spawner_params(), image,
                                               c.codes[i + 1] == 0   ? DiscFamily::D1
                                               : c.codes[i + 1] == 1 ? DiscFamily::D2
                                                                     : DiscFamily::D3);
            REQUIRE(r.ok);
            CHECK(*r.disc == discs[i + 1]);
        }
        const BigDisc& exit = fam.exit_disc(c);
        CHECK(exit.c0.lo_rational() <= discs.back().c0);
        CHECK(discs.back().c0 <= exit.c0.hi_rational());
    }
    CHECK_THROWS_AS(SpawnerFamily(default_spawner_params(), 0.05), Error);
}

TEST_CASE("disc records round-trip") {
    SpawnerParams p = default_spawner_params();
    gen::Engine g(66);
    for (int trial = 0; trial < 50; ++trial) {
        GraphDisc d = sample_member(p, DiscFamily::D2, g);
        DiscFamily f = DiscFamily::D;
        GraphDisc back = disc_from_json(disc_to_json(d, DiscFamily::D2), &f);
        CHECK(back == d);
        CHECK(f == DiscFamily::D2);
    }
    CHECK(family_from_string("D3") == DiscFamily::D3);
    CHECK_THROWS(family_from_string("D9"));
}
