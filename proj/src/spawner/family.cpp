#include <cmath>
#include <json.hpp>

#include "flipflop/spawner.hpp"

namespace ff {

namespace {

constexpr mpfr_prec_t kStartPrecision = 128;
constexpr mpfr_prec_t kMaxPrecision = 1 << 14;

struct DiscMember : ModelState {
    std::optional<GraphDisc> exact;
    BigDisc disc;
};

DiscFamily family_of_code(int code) {
    return code == 0 ? DiscFamily::D1 : code == 1 ? DiscFamily::D2 : DiscFamily::D3;
}

const DiscMember& as_member(const std::shared_ptr<const ModelState>& s) {
    auto* m = dynamic_cast<const DiscMember*>(s.get());
    if (!m) throw Error(ErrorKind::InvalidArgument, "chain carries no spawner disc state");
    return *m;
}

enum class Verdict { Yes, Unknown };

// Certified membership of a restricted disc in the family over its current domain.
Verdict certainly_member(const SpawnerParams& p, const BigDisc& d, DiscFamily f) {
    auto [clo, chi] = family_center_range(p, f);
    BigInterval lo = d.c0, hi = d.c0;
    for (std::size_t j = 0; j < d.gc.size(); ++j) {
        BigInterval a = abs_hull(d.gc[j]);
        lo.add_scaled(a, -d.domain.half_width(j));
        hi.add_scaled(a, d.domain.half_width(j));
    }
    if (!lo.certainly_ge(clo) || !hi.certainly_le(chi)) return Verdict::Unknown;
    Interval lip{0.0};
    for (std::size_t k = 0; k < d.s0.size(); ++k) {
        BigInterval slo = d.s0[k], shi = d.s0[k];
        for (std::size_t j = 0; j < d.gc.size(); ++j) {
            BigInterval a = abs_hull(d.Gs[k][j]);
            slo.add_scaled(a, -d.domain.half_width(j));
            shi.add_scaled(a, d.domain.half_width(j));
            double m = a.mag_up();
            lip = lip + Interval{m} * Interval{m};
        }
        if (!slo.certainly_ge(p.Js.lo[k]) || !shi.certainly_le(p.Js.hi[k])) return Verdict::Unknown;
    }
    for (const auto& g : d.gc) {
        double m = g.mag_up();
        lip = lip + Interval{m} * Interval{m};
    }
    Interval a0 = enclose(p.alpha0);
    if (!(lip.hi <= (a0 * a0).lo)) return Verdict::Unknown;
    return Verdict::Yes;
}

void restrict_big(BigDisc& d, const Box& dom, int leg) {
    for (std::size_t j = 0; j < dom.dim(); ++j) {
        Rational shift = dom.mid(j) - d.domain.mid(j);
        if (shift == 0) continue;
        d.c0.add_scaled(d.gc[j], shift);
        for (std::size_t k = 0; k < d.s0.size(); ++k) d.s0[k].add_scaled(d.Gs[k][j], shift);
    }
    d.domain = dom;
    d.leg = leg;
}

}  // namespace

BigDisc::BigDisc(const GraphDisc& d, mpfr_prec_t prec) : domain(d.domain), c0(d.c0, prec), leg(d.leg) {
    for (const auto& g : d.gc) gc.emplace_back(g, prec);
    for (const auto& v : d.s0) s0.emplace_back(v, prec);
    for (const auto& row : d.Gs) {
        std::vector<BigInterval> r;
        for (const auto& g : row) r.emplace_back(g, prec);
        Gs.push_back(std::move(r));
    }
}

SpawnerFamily::SpawnerFamily(SpawnerParams params, double shift) : p_(std::move(params)) {
    p_.validate();
    ConeReport cone = cone_check(p_);
    if (!cone.pass)
        throw Error(ErrorKind::ConeNotInvariant, "cone field is not strictly invariant on leg " +
                                                     std::to_string(cone.failing_leg + 1) + " (margin " +
                                                     to_string(cone.margins[cone.failing_leg]) + ")");
    for (DiscFamily f : {DiscFamily::D1, DiscFamily::D2, DiscFamily::D3}) {
        ImageMargin m = family_image_margin(p_, f);
        if (!(m.center > 0))
            throw Error(ErrorKind::ConfigurationNotFlipFlop, std::string("image of ") + family_name(f) +
                                                                 " leaves the center range of D by " +
                                                                 to_string(Rational(-m.center)));
        if (!(m.s > 0))
            throw Error(ErrorKind::ConfigurationNotFlipFlop,
                        std::string("image of ") + family_name(f) + " leaves J^s by " + to_string(Rational(-m.s)));
    }
    // blender dichotomy budget: center variation across J^u stays below the 1/4 overlap of D1 and D2
    Rational diam_sq = 0;
    for (int j = 0; j < p_.u; ++j) diam_sq += (p_.Ju.hi[j] - p_.Ju.lo[j]) * (p_.Ju.hi[j] - p_.Ju.lo[j]);
    if (!(p_.alpha0 * p_.alpha0 * diam_sq < Rational(1, 16)))
        throw Error(ErrorKind::ConfigurationNotFlipFlop, "Lipschitz budget too large for the blender dichotomy");
    if (!(std::fabs(shift) < INFINITY)) throw Error(ErrorKind::InvalidArgument, "shift must be finite");

    log_lambda_ = log(enclose(p_.lambda));
    Interval sh{shift};
    Interval sep = log_lambda_ - abs(sh);
    if (!(sep.lo > 0))
        throw Error(ErrorKind::SeparationViolated, "shift must stay below log(lambda) in absolute value");
    // room for the rounding that orbit-wise enclosures accumulate near the extreme values
    potential_.beta1 = (log_lambda_ + abs(sh)).hi;
    const double slack = 1e-12 * std::fmax(1.0, potential_.beta1);
    potential_.alpha = sep.lo - slack;
    potential_.beta1 += slack;
    potential_.shift = shift;
    potential_.coded.local = {log_lambda_ + sh, log_lambda_ + sh, -log_lambda_ + sh};
    potential_.evaluate = [this](const Point& x) -> Interval {
        if (!std::holds_alternative<CubePoint>(x))
            throw Error(ErrorKind::DomainEscape, "spawner potential evaluated on a symbolic point");
        return phi_at(std::get<CubePoint>(x));
    };
    potential_.modulus = [this](double r) { return modulus(r); };

    Rational gap = p_.Iu[0].gap(p_.Iu[1]);
    gap = rmin(gap, p_.Iu[0].gap(p_.Iu[2]));
    gap = rmin(gap, p_.Iu[1].gap(p_.Iu[2]));
    leg_gap_ = enclose(gap).lo;

    Interval a1 = enclose(p_.alpha1), a0 = enclose(p_.alpha0);
    Interval stretch = sqrt(Interval{1.0} + a1 * a1);
    double lam = INFINITY;
    for (int i = 0; i < kLegs; ++i) lam = std::fmin(lam, (enclose(p_.Au[i].scale) / stretch).lo);
    double d0 = 0;
    for (DiscFamily f : {DiscFamily::D1, DiscFamily::D2, DiscFamily::D3}) {
        Box b = family_domain(p_, f);
        Interval diag{0.0};
        for (int j = 0; j < p_.u; ++j) {
            Interval w = enclose(b.hi[j] - b.lo[j]);
            diag = diag + w * w;
        }
        d0 = std::fmax(d0, (sqrt(diag) * sqrt(Interval{1.0} + a0 * a0)).hi);
    }
    constants_ = {lam, d0};
}

double SpawnerFamily::modulus(double r) const {
    // phi is constant on each leg and legs sit leg_gap_ apart
    return r < leg_gap_ ? 0.0 : (Interval{2.0} * log_lambda_).hi;
}

Interval SpawnerFamily::phi_at(const CubePoint& x) const {
    if (static_cast<int>(x.u.size()) != p_.u) throw Error(ErrorKind::InvalidArgument, "point has the wrong u dimension");
    for (int i = 0; i < kLegs; ++i) {
        bool inside = true;
        for (int j = 0; j < p_.u && inside; ++j)
            inside = enclose(p_.Iu[i].lo[j]).hi <= x.u[j].lo && x.u[j].hi <= enclose(p_.Iu[i].hi[j]).lo;
        if (inside) return potential_.coded.local[i];
    }
    throw Error(ErrorKind::DomainEscape, "point is not certainly inside a leg");
}

MemberRef SpawnerFamily::member(const GraphDisc& d) const {
    if (d.leg < 0 || d.leg >= kLegs) throw Error(ErrorKind::InvalidArgument, "member disc needs a leg tag");
    DiscFamily f = family_of_code(d.leg);
    Containment c = restrict_to_family(p_, d, f);
    if (!c.ok) throw Error(ErrorKind::NotContained, std::string("disc is not a member of ") + family_name(f) + ": " +
                                                        c.violated + " fails by " + to_string(c.deficit));
    Box dom = family_domain(p_, f);
    if (!(d.domain.lo == dom.lo && d.domain.hi == dom.hi))
        throw Error(ErrorKind::NotContained, std::string("disc domain differs from the domain of ") + family_name(f));
    auto st = std::make_shared<DiscMember>();
    st->exact = d;
    st->disc = BigDisc(d, kStartPrecision);
    return MemberRef{ModelId::Spawner, sign_of_code(static_cast<std::uint8_t>(d.leg)),
                     static_cast<std::uint8_t>(d.leg), st};
}

MemberRef SpawnerFamily::canonical_member(Sign s) const {
    DiscFamily f = s == Sign::Plus ? DiscFamily::D1 : DiscFamily::D3;
    return member(GraphDisc::flat(family_domain(p_, f), 0, p_.s, family_leg(f)));
}

Chain SpawnerFamily::start(const MemberRef& m) const {
    if (m.model != ModelId::Spawner || m.code >= kLegs)
        throw Error(ErrorKind::InvalidArgument, "member does not belong to the spawner");
    MemberRef mm = m;
    if (!mm.state) {
        DiscFamily f = family_of_code(m.code);
        mm = member(GraphDisc::flat(family_domain(p_, f), 0, p_.s, m.code));
    }
    const DiscMember& st = as_member(mm.state);
    if (st.disc.leg != m.code) throw Error(ErrorKind::InvalidArgument, "member code disagrees with its disc");
    Chain c;
    c.model = ModelId::Spawner;
    c.codes = {m.code};
    c.control_times = {0};
    c.entrance_state = mm.state;
    c.exit_state = mm.state;
    return c;
}

bool SpawnerFamily::step(BigDisc& d, int leg) const {
    if (!p_.Iu[leg].contains(d.domain)) return false;
    const AffineBlock& A = p_.Au[leg];
    const AffineBlock& S = p_.As[leg];
    const Rational rate = center_rate(leg, p_.lambda);
    d.domain = A.image(d.domain);
    d.c0.affine(rate, center_offset(leg, p_.lambda));
    const Rational gscale = rate / A.scale, sscale = S.scale / A.scale;
    for (auto& g : d.gc) g.affine(gscale, 0);
    for (int k = 0; k < p_.s; ++k) {
        d.s0[k].affine(S.scale, S.shift[k]);
        for (auto& g : d.Gs[k]) g.affine(sscale, 0);
    }
    d.leg = -1;
    return true;
}

// Chooses the next code from the image of the current exit; -1 when undecided.
int SpawnerFamily::decide(const BigDisc& image, Sign target, bool& decided) const {
    const std::initializer_list<int> plus = {0, 1}, minus = {2};
    for (int code : target == Sign::Plus ? plus : minus) {
        DiscFamily f = family_of_code(code);
        Box dom = family_domain(p_, f);
        if (!image.domain.contains(dom)) continue;
        BigDisc r = image;
        restrict_big(r, dom, code);
        if (certainly_member(p_, r, f) == Verdict::Yes) {
            decided = true;
            return code;
        }
    }
    decided = false;
    return -1;
}

void SpawnerFamily::replay(const Chain& chain, mpfr_prec_t prec, BigDisc& out) const {
    const DiscMember& entry = as_member(chain.entrance_state);
    if (!entry.exact)
        throw Error(ErrorKind::RefinementUnavailable, "chain entrance is not exact, so precision cannot be raised");
    ++replays_;
    for (;; prec *= 2) {
        if (prec > kMaxPrecision)
            throw Error(ErrorKind::ConfigurationNotFlipFlop,
                        "family containment could not be certified even at " + std::to_string(kMaxPrecision) + " bits");
        BigDisc d(*entry.exact, prec);
        bool ok = true;
        for (std::size_t i = 0; i + 1 < chain.codes.size() && ok; ++i) {
            int next = chain.codes[i + 1];
            DiscFamily f = family_of_code(next);
            ok = step(d, chain.codes[i]);
            if (ok) {
                restrict_big(d, family_domain(p_, f), next);
                ok = certainly_member(p_, d, f) == Verdict::Yes;
            }
        }
        if (ok) {
            out = std::move(d);
            return;
        }
    }
}

void SpawnerFamily::extend_in_place(Chain& chain, Sign target) const {
    if (chain.model != ModelId::Spawner || !chain.exit_state)
        throw Error(ErrorKind::InvalidArgument, "chain does not come from the spawner");
    const int leg = chain.codes.back();
    // the exit state is private to this chain unless someone else holds it
    std::shared_ptr<DiscMember> next;
    if (chain.exit_state.use_count() == 1 && chain.exit_state != chain.entrance_state) {
        next = std::const_pointer_cast<DiscMember>(std::static_pointer_cast<const DiscMember>(chain.exit_state));
        next->exact.reset();
    } else {
        next = std::make_shared<DiscMember>();
        next->disc = as_member(chain.exit_state).disc;
    }
    BigDisc& d = next->disc;
    mpfr_prec_t prec = d.c0.precision();
    for (;;) {
        BigDisc image = d;
        if (!step(image, leg)) throw Error(ErrorKind::DomainEscape, "exit disc left its leg");
        bool decided = false;
        int code = decide(image, target, decided);
        if (decided) {
            restrict_big(image, family_domain(p_, family_of_code(code)), code);
            d = std::move(image);
            chain.codes.push_back(static_cast<std::uint8_t>(code));
            chain.block_pattern.push_back(target);
            chain.exit_state = next;
            return;
        }
        prec *= 2;
        if (prec > kMaxPrecision)
            throw Error(ErrorKind::ConfigurationNotFlipFlop,
                        std::string("no certified ") + sign_char(target) + " member inside the image of the exit disc");
        replay(chain, prec, d);
    }
}

MemberRef SpawnerFamily::exit_member(const Chain& chain) const {
    std::uint8_t code = chain.codes.back();
    return MemberRef{ModelId::Spawner, sign_of_code(code), code, chain.exit_state};
}

bool SpawnerFamily::entrance_within_exit(const Chain& a, const Chain& b) const {
    if (a.codes.empty() || b.codes.empty() || a.codes.back() != b.codes.front()) return false;
    if (a.exit_state == b.entrance_state) return true;
    const DiscMember& x = as_member(a.exit_state);
    const DiscMember& y = as_member(b.entrance_state);
    return x.exact && y.exact && *x.exact == *y.exact;
}

const BigDisc& SpawnerFamily::exit_disc(const Chain& chain) const { return as_member(chain.exit_state).disc; }

mpfr_prec_t SpawnerFamily::exit_precision(const Chain& chain) const { return exit_disc(chain).c0.precision(); }

Point SpawnerFamily::entrance_point(const Chain& chain, TailRule rule) const {
    const BigDisc& exit = exit_disc(chain);
    const int last = chain.codes.back();
    std::vector<Interval> x(p_.u);
    for (int j = 0; j < p_.u; ++j) {
        if (rule == TailRule::RepeatLast) {
            // fixed point of the last leg's u-map
            const AffineBlock& A = p_.Au[last];
            x[j] = enclose(A.shift[j] / (1 - A.scale));
        } else {
            x[j] = enclose(exit.domain.mid(j));
        }
    }
    for (std::size_t i = chain.codes.size() - 1; i-- > 0;) {
        const AffineBlock& A = p_.Au[chain.codes[i]];
        Interval a = enclose(A.scale);
        for (int j = 0; j < p_.u; ++j) x[j] = (x[j] - enclose(A.shift[j])) / a;
    }
    const BigDisc& m0 = as_member(chain.entrance_state).disc;
    CubePoint pt;
    pt.u = x;
    pt.c = m0.c0.to_interval();
    pt.s.resize(p_.s);
    for (int k = 0; k < p_.s; ++k) pt.s[k] = m0.s0[k].to_interval();
    for (int j = 0; j < p_.u; ++j) {
        Interval dx = x[j] - enclose(m0.domain.mid(j));
        pt.c = pt.c + m0.gc[j].to_interval() * dx;
        for (int k = 0; k < p_.s; ++k) pt.s[k] = pt.s[k] + m0.Gs[k][j].to_interval() * dx;
    }
    return pt;
}

CodedOrbit SpawnerFamily::coded_orbit(const Chain& chain, TailRule) const {
    return CodedOrbit{chain.codes, {chain.codes.back()}};
}

double SpawnerFamily::distance(const Point& a, const Point& b) const {
    const auto* x = std::get_if<CubePoint>(&a);
    const auto* y = std::get_if<CubePoint>(&b);
    if (!x || !y) throw Error(ErrorKind::InvalidArgument, "spawner distance needs cube points");
    Interval sq{0.0};
    auto add = [&](const Interval& p, const Interval& q) {
        double m = (p - q).mag();
        sq = sq + Interval{m} * Interval{m};
    };
    for (std::size_t j = 0; j < x->u.size(); ++j) add(x->u[j], y->u[j]);
    add(x->c, y->c);
    for (std::size_t k = 0; k < x->s.size(); ++k) add(x->s[k], y->s[k]);
    return sqrt(sq).hi;
}

std::vector<GraphDisc> SpawnerFamily::exact_discs(const Chain& chain) const {
    const DiscMember& entry = as_member(chain.entrance_state);
    if (!entry.exact) throw Error(ErrorKind::RefinementUnavailable, "chain entrance is not exact");
    std::vector<GraphDisc> out{*entry.exact};
    for (std::size_t i = 0; i + 1 < chain.codes.size(); ++i) {
        GraphDisc img = induced_apply(p_, out.back(), chain.codes[i]);
        Containment c = restrict_to_family(p_, img, family_of_code(chain.codes[i + 1]));
        if (!c.ok)
            throw Error(ErrorKind::ContainmentViolation, "step " + std::to_string(i) + ": " + c.violated +
                                                             " fails by " + to_string(c.deficit));
        out.push_back(*c.disc);
    }
    return out;
}

std::string disc_to_json(const GraphDisc& d, DiscFamily f) {
    using nlohmann::json;
    auto vec = [](const std::vector<Rational>& v) {
        json a = json::array();
        for (const auto& q : v) a.push_back(to_string(q));
        return a;
    };
    json j;
    j["family"] = family_name(f);
    j["leg"] = d.leg;
    j["domain"] = {{"lo", vec(d.domain.lo)}, {"hi", vec(d.domain.hi)}};
    j["c0"] = to_string(d.c0);
    j["gc"] = vec(d.gc);
    j["s0"] = vec(d.s0);
    json gs = json::array();
    for (const auto& row : d.Gs) gs.push_back(vec(row));
    j["Gs"] = gs;
    return j.dump();
}

GraphDisc disc_from_json(const std::string& text, DiscFamily* f) {
    using nlohmann::json;
    json j = json::parse(text);
    auto vec = [](const json& a) {
        std::vector<Rational> v;
        for (const auto& x : a) v.push_back(parse_rational(x.get<std::string>()));
        return v;
    };
    GraphDisc d;
    d.leg = j.at("leg").get<int>();
    d.domain.lo = vec(j.at("domain").at("lo"));
    d.domain.hi = vec(j.at("domain").at("hi"));
    d.c0 = parse_rational(j.at("c0").get<std::string>());
    d.gc = vec(j.at("gc"));
    d.s0 = vec(j.at("s0"));
    for (const auto& row : j.at("Gs")) d.Gs.push_back(vec(row));
    if (d.gc.size() != d.domain.dim() || d.Gs.size() != d.s0.size())
        throw Error(ErrorKind::InvalidArgument, "disc record has inconsistent dimensions");
    for (const auto& row : d.Gs)
        if (row.size() != d.domain.dim()) throw Error(ErrorKind::InvalidArgument, "disc record has a ragged Gs");
    if (f) *f = family_from_string(j.at("family").get<std::string>());
    return d;
}

}  // namespace ff
