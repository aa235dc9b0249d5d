#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <thread>

#include "flipflop/spawner.hpp"

namespace ff {

DiscD to_double(const GraphDisc& d) {
    DiscD r;
    for (std::size_t j = 0; j < d.domain.dim(); ++j) {
        r.lo.push_back(d.domain.lo[j].get_d());
        r.hi.push_back(d.domain.hi[j].get_d());
    }
    r.c0 = d.c0.get_d();
    for (const auto& g : d.gc) r.gc.push_back(g.get_d());
    for (const auto& v : d.s0) r.s0.push_back(v.get_d());
    for (const auto& row : d.Gs) {
        std::vector<double> rr;
        for (const auto& g : row) rr.push_back(g.get_d());
        r.Gs.push_back(std::move(rr));
    }
    return r;
}

namespace {

using Mat = Eigen::MatrixXd;

// Orthonormal basis of the graph tangent plane restricted to the given u-directions.
Mat tangent_basis(const DiscD& d, int skip) {
    const int u = static_cast<int>(d.lo.size()), s = static_cast<int>(d.s0.size());
    const int dim = u + 1 + s;
    Mat M(dim, skip < 0 ? u : u - 1);
    int col = 0;
    for (int j = 0; j < u; ++j) {
        if (j == skip) continue;
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        v(j) = 1.0;
        v(u) = d.gc[j];
        for (int k = 0; k < s; ++k) v(u + 1 + k) = d.Gs[k][j];
        M.col(col++) = v;
    }
    if (M.cols() == 0) return M;
    Eigen::HouseholderQR<Mat> qr(M);
    return qr.householderQ() * Mat::Identity(dim, M.cols());
}

// Largest principal angle, via the sine form that stays accurate for small angles.
double largest_angle(const Mat& Q1, const Mat& Q2) {
    if (Q1.cols() == 0) return 0.0;
    Mat R = Q1 - Q2 * (Q2.transpose() * Q1);
    Eigen::JacobiSVD<Mat> svd(R);
    double sn = svd.singularValues()(0);
    return std::asin(std::min(1.0, sn));
}

struct Sample {
    Eigen::VectorXd p;
    int face;  // -1 for interior samples
};

Eigen::VectorXd graph_point(const DiscD& d, const std::vector<double>& x) {
    const int u = static_cast<int>(d.lo.size()), s = static_cast<int>(d.s0.size());
    Eigen::VectorXd v(u + 1 + s);
    double c = d.c0;
    std::vector<double> s_val(d.s0);
    for (int j = 0; j < u; ++j) {
        double dx = x[j] - 0.5 * (d.lo[j] + d.hi[j]);
        v(j) = x[j];
        c += d.gc[j] * dx;
        for (int k = 0; k < s; ++k) s_val[k] += d.Gs[k][j] * dx;
    }
    v(u) = c;
    for (int k = 0; k < s; ++k) v(u + 1 + k) = s_val[k];
    return v;
}

void samples(const DiscD& d, int grid, std::vector<Sample>& inner, std::vector<Sample>& boundary) {
    const int u = static_cast<int>(d.lo.size());
    std::vector<int> idx(u, 0);
    std::vector<double> x(u);
    while (true) {
        int face = -1;
        for (int j = 0; j < u; ++j) {
            x[j] = d.lo[j] + (d.hi[j] - d.lo[j]) * idx[j] / (grid - 1);
            if (face < 0 && (idx[j] == 0 || idx[j] == grid - 1)) face = j;
        }
        Eigen::VectorXd p = graph_point(d, x);
        inner.push_back({p, -1});
        if (face >= 0) boundary.push_back({p, u == 1 ? -1 : face});
        int j = 0;
        while (j < u && ++idx[j] == grid) idx[j++] = 0;
        if (j == u) break;
    }
}

double hausdorff(const std::vector<Sample>& A, const std::vector<Sample>& B, const std::vector<std::vector<double>>& ang,
                 int faces) {
    auto cost = [&](const Sample& a, const Sample& b) {
        double t = faces ? ang[a.face < 0 ? 0 : a.face][b.face < 0 ? 0 : b.face] : ang[0][0];
        return (a.p - b.p).norm() + t;
    };
    double h = 0.0;
    for (const auto& a : A) {
        double m = INFINITY;
        for (const auto& b : B) m = std::min(m, cost(a, b));
        h = std::max(h, m);
    }
    for (const auto& b : B) {
        double m = INFINITY;
        for (const auto& a : A) m = std::min(m, cost(a, b));
        h = std::max(h, m);
    }
    return h;
}

}  // namespace

double delta_distance(const DiscD& a, const DiscD& b, int grid) {
    if (grid < 2) throw Error(ErrorKind::InvalidArgument, "delta distance needs at least 2 grid points per axis");
    if (a.lo.size() != b.lo.size() || a.s0.size() != b.s0.size())
        throw Error(ErrorKind::InvalidArgument, "discs have different dimensions");
    const int u = static_cast<int>(a.lo.size());
    std::vector<Sample> ia, ba, ib, bb;
    samples(a, grid, ia, ba);
    samples(b, grid, ib, bb);
    std::vector<std::vector<double>> tang{{largest_angle(tangent_basis(a, -1), tangent_basis(b, -1))}};
    double d = hausdorff(ia, ib, tang, 0);
    if (u == 1) {
        // the boundary is a pair of points whose tangent spaces are trivial
        std::vector<std::vector<double>> zero{{0.0}};
        return d + hausdorff(ba, bb, zero, 0);
    }
    std::vector<std::vector<double>> faces(u, std::vector<double>(u));
    for (int j = 0; j < u; ++j)
        for (int k = 0; k < u; ++k) faces[j][k] = largest_angle(tangent_basis(a, j), tangent_basis(b, k));
    return d + hausdorff(ba, bb, faces, 1);
}

double delta_distance(const GraphDisc& a, const GraphDisc& b, int grid) {
    return delta_distance(to_double(a), to_double(b), grid);
}

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

Rational uniform(std::mt19937_64& g, const Rational& lo, const Rational& hi) {
    double t = std::uniform_real_distribution<double>(0.0, 1.0)(g);
    return lo + (hi - lo) * rational_from_double(t);
}

// A random member of the family with Lipschitz bound at most 0.9 alpha0.
GraphDisc random_member(const SpawnerParams& p, DiscFamily f, std::mt19937_64& g) {
    GraphDisc d = GraphDisc::flat(family_domain(p, f), 0, p.s, family_leg(f));
    const Rational cap = Rational(9, 10) * p.alpha0 / (p.u * (1 + p.s));
    for (auto& x : d.gc) x = uniform(g, -cap, cap);
    for (auto& row : d.Gs)
        for (auto& x : row) x = uniform(g, -cap, cap);
    auto [clo, chi] = family_center_range(p, f);
    auto [rlo, rhi] = d.center_range();
    d.c0 = uniform(g, clo - rlo, chi - rhi);
    for (int k = 0; k < p.s; ++k) {
        auto [slo, shi] = d.s_range(k);
        d.s0[k] = uniform(g, p.Js.lo[k] - slo, p.Js.hi[k] - shi);
    }
    return d;
}

struct Jitter {
    std::vector<Rational> dom;  // boundary displacement per axis
    Rational c;
    std::vector<Rational> s, gc;
};

GraphDisc apply(const GraphDisc& m, const Jitter& j, const Rational& t) {
    GraphDisc d = m;
    for (std::size_t k = 0; k < d.domain.dim(); ++k) {
        d.domain.lo[k] -= t * j.dom[k];
        d.domain.hi[k] += t * j.dom[k];
        d.gc[k] += t * j.gc[k];
    }
    d.c0 += t * j.c;
    for (std::size_t k = 0; k < d.s0.size(); ++k) d.s0[k] += t * j.s[k];
    return d;
}

struct TrialOutcome {
    bool ok = false;
    Rational margin;
    std::string note;
};

TrialOutcome run_trial(const SpawnerParams& p, DiscFamily f, double eps, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    GraphDisc m = random_member(p, f, g);
    GraphDisc d = m;
    if (eps > 0) {
        const Rational e = rational_from_double(eps);
        Jitter j;
        for (int k = 0; k < p.u; ++k) {
            j.dom.push_back(uniform(g, -e / 4, e / 4));
            j.gc.push_back(uniform(g, -e / 8, e / 8));
        }
        j.c = uniform(g, -e / 4, e / 4);
        for (int k = 0; k < p.s; ++k) j.s.push_back(uniform(g, -e / 4, e / 4));
        Rational t = 1;
        for (int it = 0; it < 40; ++it) {
            d = apply(m, j, t);
            double dist = delta_distance(m, d, 9);
            if (dist <= eps) break;
            t *= rational_from_double(std::min(0.9, 0.99 * eps / dist));
        }
    }
    const int leg = family_leg(f);
    TrialOutcome out;
    if (!p.Iu[leg].contains(d.domain)) {
        out.note = "perturbed domain leaves the u-box";
        out.margin = -1;
        return out;
    }
    Containment c = restrict_to_family(p, induced_apply(p, d, leg), DiscFamily::D);
    out.ok = c.ok;
    out.margin = c.min_margin;
    if (!c.ok) out.note = c.violated + " fails by " + to_string(c.deficit);
    return out;
}

}  // namespace

ProbeReport strict_invariance_probe(const SpawnerParams& p, DiscFamily family, double epsilon, int trials,
                                    std::uint64_t seed) {
    if (!(epsilon >= 0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be non-negative");
    if (family_leg(family) < 0) throw Error(ErrorKind::InvalidArgument, "probe needs a leg family (D1, D2 or D3)");
    ProbeReport r;
    r.family = family;
    r.epsilon = epsilon;
    r.trials = trials;
    const unsigned workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    std::vector<std::future<std::vector<TrialOutcome>>> parts;
    for (unsigned w = 0; w < workers; ++w)
        parts.push_back(std::async(std::launch::async, [&, w] {
            std::vector<TrialOutcome> out;
            for (int t = static_cast<int>(w); t < trials; t += static_cast<int>(workers))
                out.push_back(run_trial(p, family, epsilon, mix(seed ^ mix(static_cast<std::uint64_t>(t)))));
            return out;
        }));
    std::vector<std::vector<TrialOutcome>> res;
    for (auto& f : parts) res.push_back(f.get());
    bool first = true;
    for (int t = 0; t < trials; ++t) {
        const TrialOutcome& o = res[t % workers][t / workers];
        if (first || o.margin < r.min_margin) r.min_margin = o.margin;
        first = false;
        if (o.ok)
            ++r.passed;
        else if (r.failures.size() < 5)
            r.failures.push_back("trial " + std::to_string(t) + ": " + o.note);
    }
    return r;
}

SpawnerParams perturb_params(const SpawnerParams& p, const Rational& mu, std::uint64_t seed) {
    std::mt19937_64 g(mix(seed));
    SpawnerParams q = p;
    q.lambda += uniform(g, -mu, mu);
    for (int i = 0; i < kLegs; ++i) {
        q.Au[i].scale += uniform(g, -mu, mu);
        for (auto& b : q.Au[i].shift) b += uniform(g, -mu, mu);
        q.As[i].scale += uniform(g, -mu, mu);
        for (auto& d : q.As[i].shift) d += uniform(g, -mu, mu);
        q.Iu[i] = q.Au[i].preimage(Box::cube(q.u, -1, 1));
    }
    return q;
}

bool RobustnessReport::pass() const {
    for (const auto& pr : probes)
        if (!pr.pass()) return false;
    return !probes.empty();
}

RobustnessReport robustness_probe(const SpawnerParams& p, const Rational& mu, int trials, std::uint64_t seed) {
    RobustnessReport r;
    r.mu = mu;
    r.perturbed = perturb_params(p, mu, seed);
    r.perturbed.validate();
    Rational eps = (p.lambda - 1) / 8 - mu;
    if (!(eps > 0)) throw Error(ErrorKind::InvalidArgument, "perturbation exceeds the invariance strength");
    r.epsilon = eps.get_d();
    for (DiscFamily f : {DiscFamily::D1, DiscFamily::D2, DiscFamily::D3})
        r.probes.push_back(strict_invariance_probe(r.perturbed, f, r.epsilon, trials, seed + 1));
    return r;
}

}  // namespace ff
