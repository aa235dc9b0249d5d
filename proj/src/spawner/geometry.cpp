#include <cmath>

#include "flipflop/spawner.hpp"

namespace ff {

namespace {

[[noreturn]] void reject(const std::string& what) { throw Error(ErrorKind::ParameterRejected, what); }

std::string leg_name(int leg) { return "leg " + std::to_string(leg + 1); }

}  // namespace

Box Box::cube(std::size_t dim, const Rational& lo, const Rational& hi) {
    return Box{std::vector<Rational>(dim, lo), std::vector<Rational>(dim, hi)};
}

bool Box::contains(const Box& o) const {
    for (std::size_t j = 0; j < dim(); ++j)
        if (o.lo[j] < lo[j] || o.hi[j] > hi[j]) return false;
    return true;
}

bool Box::contains_strictly(const Box& o) const {
    for (std::size_t j = 0; j < dim(); ++j)
        if (o.lo[j] <= lo[j] || o.hi[j] >= hi[j]) return false;
    return true;
}

Rational Box::gap(const Box& o) const {
    Rational g = rmax(o.lo[0] - hi[0], lo[0] - o.hi[0]);
    for (std::size_t j = 1; j < dim(); ++j) g = rmax(g, rmax(o.lo[j] - hi[j], lo[j] - o.hi[j]));
    return g;
}

Box Box::inflated(const Rational& r) const {
    Box b = *this;
    for (std::size_t j = 0; j < dim(); ++j) {
        b.lo[j] -= r;
        b.hi[j] += r;
    }
    return b;
}

Box AffineBlock::image(const Box& b) const {
    Box r = b;
    for (std::size_t j = 0; j < b.dim(); ++j) {
        Rational x = scale * b.lo[j] + shift[j], y = scale * b.hi[j] + shift[j];
        r.lo[j] = rmin(x, y);
        r.hi[j] = rmax(x, y);
    }
    return r;
}

Box AffineBlock::preimage(const Box& b) const {
    Box r = b;
    for (std::size_t j = 0; j < b.dim(); ++j) {
        Rational x = (b.lo[j] - shift[j]) / scale, y = (b.hi[j] - shift[j]) / scale;
        r.lo[j] = rmin(x, y);
        r.hi[j] = rmax(x, y);
    }
    return r;
}

SpawnerParams default_spawner_params() {
    SpawnerParams p;
    const Rational b[kLegs] = {Rational(5, 2), Rational(0), Rational(-5, 2)};
    const Rational d[kLegs] = {Rational(-5, 8), Rational(0), Rational(5, 8)};
    for (int i = 0; i < kLegs; ++i) {
        p.Au[i] = AffineBlock{Rational(4), {b[i]}};
        p.As[i] = AffineBlock{Rational(1, 4), {d[i]}};
        p.Iu[i] = p.Au[i].preimage(Box::cube(1, -1, 1));
    }
    p.Ju = p.Js = Box::cube(1, Rational(-15, 16), Rational(15, 16));
    p.Ju0 = p.Js0 = Box::cube(1, Rational(-31, 32), Rational(31, 32));
    return p;
}

Box SpawnerParams::leg_box(int leg) const {
    Box b = Iu.at(leg);
    b.lo.push_back(-1);
    b.hi.push_back(1);
    for (int r = 0; r < s; ++r) {
        b.lo.push_back(-1);
        b.hi.push_back(1);
    }
    return b;
}

void SpawnerParams::validate() const {
    if (u < 1 || s < 1) reject("dimensions u and s must be at least 1");
    if (lambda <= 1) reject("lambda must exceed 1");
    if (!(alpha0 > 0 && alpha0 < alpha1)) reject("cone constants must satisfy 0 < alpha0 < alpha1");
    // alpha1 < 1/(8 sqrt(u))  <=>  64 u alpha1^2 < 1
    if (!(64 * u * alpha1 * alpha1 < 1)) reject("alpha1 must be below 1/(8 sqrt(u))");
    if (!(rho > 0 && rho <= Rational(1, 4))) reject("rho must lie in (0, 1/4]");
    if (!(ambient > 1)) reject("ambient half-width must exceed 1");
    auto dims = [&](const Box& b, int d, const std::string& name) {
        if (static_cast<int>(b.dim()) != d || b.hi.size() != b.lo.size())
            reject(name + " has the wrong dimension");
        for (int j = 0; j < d; ++j)
            if (!(b.lo[j] < b.hi[j])) reject(name + " is empty");
    };
    dims(Ju, u, "J^u");
    dims(Ju0, u, "J^u_0");
    dims(Js, s, "J^s");
    dims(Js0, s, "J^s_0");
    const Box open_u = Box::cube(u, -1, 1), open_s = Box::cube(s, -1, 1);
    if (!open_u.contains_strictly(Ju0)) reject("J^u_0 must lie inside (-1,1)^u");
    if (!open_s.contains_strictly(Js0)) reject("J^s_0 must lie inside (-1,1)^s");
    if (!Ju0.contains_strictly(Ju)) reject("J^u must lie in the interior of J^u_0");
    if (!Js0.contains_strictly(Js)) reject("J^s must lie in the interior of J^s_0");
    for (int i = 0; i < kLegs; ++i) {
        const std::string L = leg_name(i);
        if (n[i] < 1) reject(L + ": return time must be positive");
        if (static_cast<int>(Au[i].shift.size()) != u || static_cast<int>(As[i].shift.size()) != s)
            reject(L + ": affine block has the wrong dimension");
        if (!(Au[i].scale > 1)) reject(L + ": A^u must expand");
        if (!(As[i].scale > 0 && As[i].scale < 1)) reject(L + ": A^s must contract with positive factor");
        dims(Iu[i], u, L + " u-box");
        if (!open_u.contains_strictly(Iu[i])) reject(L + ": u-box must lie inside (-1,1)^u");
        if (!Ju.contains_strictly(Iu[i])) reject(L + ": u-box must lie in the interior of J^u");
        Box img = Au[i].image(Iu[i]);
        if (!(img.lo == open_u.lo && img.hi == open_u.hi)) reject(L + ": A^u must map the u-box onto [-1,1]^u");
        if (!Js.contains_strictly(As[i].image(open_s))) reject(L + ": A^s([-1,1]^s) must lie in the interior of J^s");
        for (int k = 0; k < i; ++k)
            if (!(Iu[k].gap(Iu[i]) > 0)) reject(leg_name(k) + " and " + L + " u-boxes must be disjoint");
    }
}

Rational center_rate(int leg, const Rational& lambda) { return leg == 2 ? Rational(1 / lambda) : lambda; }

Rational center_offset(int leg, const Rational& lambda) {
    if (leg == 0) return (lambda - 1) / 2;
    if (leg == 1) return (1 - lambda) / 2;
    return 0;
}

Rational center_map(int leg, const Rational& lambda, const Rational& x) {
    if (leg < 0 || leg >= kLegs) throw Error(ErrorKind::InvalidArgument, "leg index must be 0, 1 or 2");
    return center_rate(leg, lambda) * x + center_offset(leg, lambda);
}

const char* family_name(DiscFamily f) {
    switch (f) {
        case DiscFamily::D: return "D";
        case DiscFamily::D1: return "D1";
        case DiscFamily::D2: return "D2";
        case DiscFamily::D3: return "D3";
    }
    return "?";
}

DiscFamily family_from_string(const std::string& s) {
    if (s == "D") return DiscFamily::D;
    if (s == "D1") return DiscFamily::D1;
    if (s == "D2") return DiscFamily::D2;
    if (s == "D3") return DiscFamily::D3;
    throw Error(ErrorKind::InvalidArgument, "unknown disc family '" + s + "'");
}

int family_leg(DiscFamily f) {
    switch (f) {
        case DiscFamily::D1: return 0;
        case DiscFamily::D2: return 1;
        case DiscFamily::D3: return 2;
        default: return -1;
    }
}

Box family_domain(const SpawnerParams& p, DiscFamily f) {
    int leg = family_leg(f);
    return leg < 0 ? p.Ju : p.Au[leg].preimage(p.Ju0);
}

std::pair<Rational, Rational> family_center_range(const SpawnerParams& p, DiscFamily f) {
    switch (f) {
        case DiscFamily::D1: return {Rational(-1, 4), Rational(1, 8)};
        case DiscFamily::D2: return {Rational(-1, 8), Rational(1, 4)};
        case DiscFamily::D3: return {-p.rho, p.rho};
        default: return {Rational(-1, 4), Rational(1, 4)};
    }
}

GraphDisc GraphDisc::flat(const Box& domain, const Rational& c, int s_dim, int leg) {
    GraphDisc d;
    d.domain = domain;
    d.c0 = c;
    d.gc.assign(domain.dim(), 0);
    d.s0.assign(s_dim, 0);
    d.Gs.assign(s_dim, std::vector<Rational>(domain.dim(), 0));
    d.leg = leg;
    return d;
}

Rational GraphDisc::lip_sq_bound() const {
    Rational f = 0;
    for (const auto& g : gc) f += g * g;
    for (const auto& row : Gs)
        for (const auto& g : row) f += g * g;
    return f;
}

std::pair<Rational, Rational> GraphDisc::center_range() const {
    Rational spread = 0;
    for (std::size_t j = 0; j < gc.size(); ++j) spread += rabs(gc[j]) * domain.half_width(j);
    return {c0 - spread, c0 + spread};
}

std::pair<Rational, Rational> GraphDisc::s_range(std::size_t r) const {
    Rational spread = 0;
    for (std::size_t j = 0; j < Gs[r].size(); ++j) spread += rabs(Gs[r][j]) * domain.half_width(j);
    return {s0[r] - spread, s0[r] + spread};
}

Rational GraphDisc::center_at(const std::vector<Rational>& x) const {
    Rational c = c0;
    for (std::size_t j = 0; j < gc.size(); ++j) c += gc[j] * (x[j] - domain.mid(j));
    return c;
}

bool GraphDisc::operator==(const GraphDisc& o) const {
    return domain.lo == o.domain.lo && domain.hi == o.domain.hi && c0 == o.c0 && gc == o.gc && s0 == o.s0 &&
           Gs == o.Gs && leg == o.leg;
}

GraphDisc induced_apply(const SpawnerParams& p, const GraphDisc& disc, int leg) {
    if (leg < 0 || leg >= kLegs) throw Error(ErrorKind::InvalidArgument, "leg index must be 0, 1 or 2");
    if (!p.Iu[leg].contains(disc.domain))
        throw Error(ErrorKind::DomainEscape, "disc domain is not inside the u-box of " + leg_name(leg));
    const AffineBlock& A = p.Au[leg];
    const AffineBlock& S = p.As[leg];
    const Rational rate = center_rate(leg, p.lambda);
    GraphDisc r;
    r.domain = A.image(disc.domain);
    r.c0 = rate * disc.c0 + center_offset(leg, p.lambda);
    for (const auto& g : disc.gc) r.gc.push_back(rate * g / A.scale);
    for (int k = 0; k < p.s; ++k) {
        r.s0.push_back(S.scale * disc.s0[k] + S.shift[k]);
        std::vector<Rational> row;
        for (const auto& g : disc.Gs[k]) row.push_back(S.scale * g / A.scale);
        r.Gs.push_back(std::move(row));
    }
    r.leg = -1;
    return r;
}

Containment restrict_to_family(const SpawnerParams& p, const GraphDisc& disc, DiscFamily target) {
    Containment out;
    const Box dom = family_domain(p, target);
    if (!disc.domain.contains(dom)) {
        out.violated = "domain";
        Rational deficit = 0;
        for (std::size_t j = 0; j < dom.dim(); ++j)
            deficit = rmax(deficit, rmax(disc.domain.lo[j] - dom.lo[j], dom.hi[j] - disc.domain.hi[j]));
        out.deficit = deficit;
        out.min_margin = -deficit;
        out.center_margin = out.s_margin = -deficit;
        return out;
    }
    GraphDisc r = disc;
    r.domain = dom;
    r.c0 = disc.center_at([&] {
        std::vector<Rational> m;
        for (std::size_t j = 0; j < dom.dim(); ++j) m.push_back(dom.mid(j));
        return m;
    }());
    for (int k = 0; k < p.s; ++k)
        for (std::size_t j = 0; j < dom.dim(); ++j) r.s0[k] += disc.Gs[k][j] * (dom.mid(j) - disc.domain.mid(j));
    r.leg = family_leg(target);

    auto [clo, chi] = family_center_range(p, target);
    auto [rlo, rhi] = r.center_range();
    out.center_margin = rmin(rlo - clo, chi - rhi);
    out.s_margin = Rational(1);
    for (int k = 0; k < p.s; ++k) {
        auto [slo, shi] = r.s_range(k);
        out.s_margin = rmin(out.s_margin, rmin(slo - p.Js.lo[k], p.Js.hi[k] - shi));
    }
    out.lip_sq_margin = p.alpha0 * p.alpha0 - r.lip_sq_bound();
    out.min_margin = rmin(out.center_margin, out.s_margin);
    if (out.center_margin < 0) {
        out.violated = "center range";
        out.deficit = -out.center_margin;
    } else if (out.s_margin < 0) {
        out.violated = "strong-stable range";
        out.deficit = -out.s_margin;
    } else if (out.lip_sq_margin < 0) {
        out.violated = "Lipschitz bound";
        out.deficit = -out.lip_sq_margin;
    } else {
        out.ok = true;
        out.disc = std::move(r);
    }
    return out;
}

DiscFamily blender_choice(const SpawnerParams& p, const GraphDisc& disc) {
    if (restrict_to_family(p, disc, DiscFamily::D1).ok) return DiscFamily::D1;
    if (restrict_to_family(p, disc, DiscFamily::D2).ok) return DiscFamily::D2;
    throw Error(ErrorKind::ConfigurationNotFlipFlop, "disc restricts to neither positive family");
}

ConeReport cone_check(const SpawnerParams& p) {
    ConeReport r;
    r.pass = true;
    for (int i = 0; i < kLegs; ++i) {
        Rational grow = rmax(center_rate(i, p.lambda), p.As[i].scale);
        r.margins[i] = p.alpha0 - grow * p.alpha1 / p.Au[i].scale;
        if (r.margins[i] == 0) r.boundary = true;
        if (r.margins[i] <= 0 && r.pass) {
            r.pass = false;
            r.failing_leg = i;
        }
    }
    return r;
}

ImageMargin family_image_margin(const SpawnerParams& p, DiscFamily source) {
    int leg = family_leg(source);
    if (leg < 0) throw Error(ErrorKind::InvalidArgument, "D is not carried by a single leg");
    auto [clo, chi] = family_center_range(p, source);
    auto [dlo, dhi] = family_center_range(p, DiscFamily::D);
    ImageMargin m;
    // center maps are increasing, so the worst members are the flat discs at the range ends
    m.center_lo = center_map(leg, p.lambda, clo) - dlo;
    m.center_hi = dhi - center_map(leg, p.lambda, chi);
    m.center = rmin(m.center_lo, m.center_hi);
    Box simg = p.As[leg].image(p.Js);
    m.s = Rational(1);
    for (int k = 0; k < p.s; ++k) m.s = rmin(m.s, rmin(simg.lo[k] - p.Js.lo[k], p.Js.hi[k] - simg.hi[k]));
    m.lip_factor = rmax(center_rate(leg, p.lambda), p.As[leg].scale) / p.Au[leg].scale;
    return m;
}

SafetyReport safety_domain_check(const SpawnerParams& p, const std::vector<std::vector<Box>>& V) {
    SafetyReport r;
    const std::size_t d = static_cast<std::size_t>(p.u + 1 + p.s);
    const Box U = Box::cube(d, -p.ambient, p.ambient);
    auto bad = [&](const std::string& s) { r.violations.push_back(s); };
    if (V.size() != kLegs) {
        bad("expected one box list per leg");
        return r;
    }
    for (int i = 0; i < kLegs; ++i) {
        const std::string L = leg_name(i);
        if (static_cast<int>(V[i].size()) != p.n[i]) {
            bad(L + ": expected " + std::to_string(p.n[i]) + " boxes");
            continue;
        }
        for (const auto& b : V[i])
            if (b.dim() != d) bad(L + ": box has the wrong dimension");
    }
    if (!r.violations.empty()) return r;

    // closures pairwise disjoint; only the j = 0 boxes share a chart
    for (int i = 0; i < kLegs; ++i)
        for (int k = 0; k < i; ++k)
            if (!(V[k][0].gap(V[i][0]) > 0)) bad("disjointness: V(" + std::to_string(k + 1) + ",0) and V(" +
                                                 std::to_string(i + 1) + ",0) closures meet");
    for (int i = 0; i < kLegs; ++i) {
        const std::string L = leg_name(i);
        if (!V[i][0].contains_strictly(p.leg_box(i))) bad(L + ": closure of the leg is not inside V(i,0)");
        if (!U.contains(V[i][0])) bad(L + ": V(i,0) is not inside U");
        for (int j = 0; j + 1 < p.n[i]; ++j)
            if (!V[i][j + 1].contains_strictly(V[i][j]))
                bad(L + ": image of closed V(i," + std::to_string(j) + ") is not inside V(i," + std::to_string(j + 1) +
                    ")");
        // last step returns through (A^u, g, A^s)
        const Box& last = V[i][p.n[i] - 1];
        Box img = last;
        for (int j = 0; j < p.u; ++j) {
            Rational a = p.Au[i].scale * last.lo[j] + p.Au[i].shift[j];
            Rational b = p.Au[i].scale * last.hi[j] + p.Au[i].shift[j];
            img.lo[j] = rmin(a, b);
            img.hi[j] = rmax(a, b);
        }
        img.lo[p.u] = center_map(i, p.lambda, last.lo[p.u]);
        img.hi[p.u] = center_map(i, p.lambda, last.hi[p.u]);
        for (int k = 0; k < p.s; ++k) {
            std::size_t j = p.u + 1 + k;
            Rational a = p.As[i].scale * last.lo[j] + p.As[i].shift[k];
            Rational b = p.As[i].scale * last.hi[j] + p.As[i].shift[k];
            img.lo[j] = rmin(a, b);
            img.hi[j] = rmax(a, b);
        }
        if (!U.contains_strictly(img)) bad(L + ": return image of the last box is not inside U");
    }
    r.pass = r.violations.empty();
    return r;
}

std::vector<std::vector<Box>> safety_domain_recipe(const SpawnerParams& p, const Rational& r) {
    std::vector<std::vector<Box>> V(kLegs);
    for (int i = 0; i < kLegs; ++i)
        for (int j = 0; j < p.n[i]; ++j) V[i].push_back(p.leg_box(i).inflated(r * (j + 1) / (p.n[i] + 1)));
    return V;
}

LyapunovResult center_lyapunov(const SpawnerParams& p, const std::vector<std::uint8_t>& legs, bool weighted) {
    if (legs.empty()) throw Error(ErrorKind::InvalidArgument, "empty leg itinerary");
    std::int64_t net = 0, time = 0;
    for (auto l : legs) {
        if (l >= kLegs) throw Error(ErrorKind::InvalidArgument, "leg index must be 0, 1 or 2");
        net += l == 2 ? -1 : 1;
        time += weighted ? p.n[l] : 1;
    }
    LyapunovResult r;
    r.ratio = Rational(mpz_class(static_cast<long>(net)), mpz_class(static_cast<long>(time)));
    r.ratio.canonicalize();
    Interval lg = log(enclose(p.lambda));
    r.value = enclose(r.ratio) * lg;
    return r;
}

}  // namespace ff
