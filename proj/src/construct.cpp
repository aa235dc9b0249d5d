#include "flipflop/construct.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flipflop/rational.hpp"
#include "flipflop/sum_tracker.hpp"

namespace ff {

namespace {

constexpr std::int64_t kInt64Max = std::numeric_limits<std::int64_t>::max();

std::int64_t clamp_to_int64(const mpz_class& z) {
    if (z > mpz_class(std::to_string(kInt64Max))) return kInt64Max;
    return static_cast<std::int64_t>(z.get_si());
}

// floor(q) + 1: the least integer strictly greater than q
mpz_class least_above(const Rational& q) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return f + 1;
}

mpz_class ceil_of(const Rational& q) {
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return c;
}

Interval window_for(Sign s, double alpha, double beta) {
    return s == Sign::Plus ? Interval{alpha, beta} : Interval{-beta, -alpha};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

bool tau_inequality_holds(int tau, double beta1, double alpha, double alpha1) {
    Interval t{static_cast<double>(tau)};
    Interval rhs = Interval{alpha} * (t - Interval{1.0}) - Interval{beta1};
    Interval lhs = Interval{alpha1} * t;
    return certainly_lt(lhs, rhs);
}

int choose_tau(double beta1, double alpha, double alpha1) {
    if (!(alpha1 > 0 && alpha1 < alpha && alpha <= beta1))
        throw Error(ErrorKind::InvalidArgument, "choose_tau needs 0 < alpha1 < alpha <= beta1");
    for (int tau = 2; tau < 100'000'000; ++tau)
        if (tau_inequality_holds(tau, beta1, alpha, alpha1)) return tau;
    throw Error(ErrorKind::InvalidArgument, "no certified tau below 1e8; alpha1 too close to alpha");
}

DistortionDetail distortion_horizon_detail(double eta, double lambda, double d0, double beta1,
                                           const std::function<double(double)>& modulus) {
    if (!(eta > 0)) throw Error(ErrorKind::InvalidArgument, "distortion horizon needs eta > 0");
    if (!(lambda > 1)) throw Error(ErrorKind::InvalidArgument, "distortion horizon needs lambda > 1");
    if (!(d0 > 0) || !(beta1 >= 0)) throw Error(ErrorKind::InvalidArgument, "distortion horizon needs d0 > 0, beta1 >= 0");
    DistortionDetail d;
    Interval r{d0};
    const Interval lam{lambda};
    bool found = false;
    for (int n = 0; n <= 4096; ++n) {
        if (n > 0) r = r / lam;
        if (modulus(r.hi) < eta / 2) {
            d.n0 = n;
            d.rho = r.hi;
            found = true;
            break;
        }
    }
    if (!found) throw Error(ErrorKind::ModulusTooWeak, "no radius reaches modulus < eta/2 within 4096 contractions");
    // least N > n0 with beta1 n0 / N < eta/4, i.e. 4 beta1 n0 < eta N
    Interval lhs = Interval{4.0} * Interval{beta1} * Interval{static_cast<double>(d.n0)};
    auto ok = [&](std::int64_t N) { return certainly_lt(lhs, Interval{eta} * Interval{static_cast<double>(N)}); };
    std::int64_t N = d.n0 + 1;
    double guess = std::floor(lhs.hi / eta);
    if (guess > static_cast<double>(N) && guess < 9e15) N = static_cast<std::int64_t>(guess);
    while (N > d.n0 + 1 && ok(N - 1)) --N;
    while (!ok(N)) ++N;
    d.N = N;
    return d;
}

std::int64_t distortion_horizon(double eta, double lambda, double d0, double beta1,
                                const std::function<double(double)>& modulus) {
    return distortion_horizon_detail(eta, lambda, d0, beta1, modulus).N;
}

void validate_ladder(const Potential& phi, const ScaleLadder& L) {
    if (L.beta.empty() || L.beta.size() != L.alpha.size())
        throw Error(ErrorKind::InvalidArgument, "ladder needs matching beta and alpha sequences");
    if (L.beta[0] < phi.beta1)
        throw Error(ErrorKind::InvalidArgument, "beta_1 must be at least sup|phi| = " + fmt(phi.beta1));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < L.beta.size(); ++i) {
        if (!(L.beta[i] < prev && L.alpha[i] < L.beta[i] && L.alpha[i] > 0))
            throw Error(ErrorKind::InvalidArgument,
                        "ladder must interleave strictly: beta_1 > alpha_1 > beta_2 > ... > 0 (fails at k=" +
                            std::to_string(i + 1) + ")");
        prev = L.alpha[i];
    }
    if (!(L.alpha[0] < phi.alpha))
        throw Error(ErrorKind::InvalidArgument, "alpha_1 must be below the separation alpha = " + fmt(phi.alpha));
    if (L.tau < 2 || !tau_inequality_holds(L.tau, L.beta[0], phi.alpha, L.alpha[0]))
        throw Error(ErrorKind::InvalidArgument, "tau fails the four-block inequality");
    for (std::size_t k = 2; k < L.t.size(); ++k)
        if (L.t[k] % L.t[k - 1] != 0)
            throw Error(ErrorKind::InvalidArgument, "t_k must be a multiple of t_{k-1}");
}

ScaleLadder make_ladder(const Potential& phi, std::vector<double> beta, std::vector<double> alpha) {
    ScaleLadder L;
    L.beta = std::move(beta);
    L.alpha = std::move(alpha);
    if (L.beta.empty()) throw Error(ErrorKind::InvalidArgument, "empty ladder");
    if (!(L.alpha[0] > 0 && L.alpha[0] < phi.alpha))
        throw Error(ErrorKind::InvalidArgument, "alpha_1 must lie in (0, alpha) with alpha = " + fmt(phi.alpha));
    L.tau = choose_tau(L.beta[0], phi.alpha, L.alpha[0]);
    L.t = {1, L.tau};
    validate_ladder(phi, L);
    return L;
}

ScaleLadder default_ladder(const Potential& phi, int depth) {
    if (depth < 1) throw Error(ErrorKind::InvalidArgument, "ladder depth must be >= 1");
    double a1 = std::fmin(phi.beta1, phi.alpha) / 2;
    std::vector<double> beta{phi.beta1}, alpha{a1};
    for (int k = 2; k <= depth; ++k) {
        double bk = std::ldexp(a1, 3 - 2 * k);  // 2 a1 4^(1-k)
        beta.push_back(bk);
        alpha.push_back(bk / 2);
    }
    return make_ladder(phi, std::move(beta), std::move(alpha));
}

GapSizing gap_sizing_from_string(const std::string& s) {
    if (s == "paper") return GapSizing::Paper;
    if (s == "sharp") return GapSizing::Sharp;
    throw Error(ErrorKind::InvalidArgument, "gap sizing must be 'paper' or 'sharp', got '" + s + "'");
}

const char* gap_sizing_name(GapSizing g) { return g == GapSizing::Paper ? "paper" : "sharp"; }

std::vector<ScalePlan> plan_scales(const FlipFlopFamily& fam, ScaleLadder& L, int depth, GapSizing sizing) {
    if (depth < 1 || depth > L.depth())
        throw Error(ErrorKind::InvalidArgument, "requested depth " + std::to_string(depth) + " exceeds the ladder");
    const Potential& phi = fam.potential();
    const FamilyConstants fc = fam.constants();
    std::vector<ScalePlan> plan;
    ScalePlan p1;
    p1.k = 1;
    p1.t = L.tau;
    p1.min_length = L.tau;
    plan.push_back(p1);
    L.t.resize(2);
    L.t[0] = 1;
    L.t[1] = L.tau;
    mpz_class t_prev = L.tau, min_prev = L.tau;
    for (int k = 2; k <= depth; ++k) {
        Rational bk = rational_from_double(L.beta_k(k)), ak = rational_from_double(L.alpha_k(k));
        Rational bp = rational_from_double(L.beta_k(k - 1)), ap = rational_from_double(L.alpha_k(k - 1));
        Rational eta = (bk - ak) / 4;
        ScalePlan p;
        p.k = k;
        p.eta = eta.get_d();
        p.horizon = distortion_horizon(p.eta, fc.lambda, fc.d0, phi.beta1, phi.modulus);
        mpz_class N = p.horizon;
        mpz_class m, ell0;
        if (sizing == GapSizing::Paper) {
            m = std::max({mpz_class(N + 1), mpz_class(t_prev + 1), least_above(Rational(3 * t_prev) * bp / (bk - ak))});
            ell0 = least_above(Rational(m * t_prev) * bp / ap);
        } else {
            Rational Lmin(min_prev);
            Rational gap = bk - ak - 2 * eta;
            m = std::max({ceil_of(Rational(N) / Lmin), least_above(Rational(t_prev) / Lmin),
                          least_above(Rational(t_prev) * bp / (Lmin * gap)), mpz_class(1)});
            ell0 = least_above(Rational(m * t_prev) * bp / (Lmin * ap));
        }
        mpz_class tk = (m + ell0) * t_prev;
        mpz_class mink = (m + 1) * min_prev;
        p.m = clamp_to_int64(m);
        p.ell0 = clamp_to_int64(ell0);
        p.t = clamp_to_int64(tk);
        p.min_length = clamp_to_int64(mink);
        plan.push_back(p);
        L.t.push_back(p.t);
        t_prev = tk;
        min_prev = mink;
    }
    return plan;
}

LengthPrediction predict_length(const FlipFlopFamily& fam, const ScaleLadder& ladder, int k, GapSizing sizing) {
    ScaleLadder L = ladder;
    auto plan = plan_scales(fam, L, k, sizing);
    return {plan.back().min_length, plan.back().t};
}

Chain tau_block(const FlipFlopFamily& fam, const MemberRef& member, int tau, Sign body_sign,
                std::optional<Sign> exit_sign) {
    if (tau < 2) throw Error(ErrorKind::InvalidArgument, "tau must exceed 1");
    Chain c = fam.start(member);
    for (int i = 1; i < tau; ++i) fam.extend_in_place(c, body_sign);
    fam.extend_in_place(c, exit_sign.value_or(body_sign));
    c.control_times = {0, tau};
    return c;
}

Interval entrance_average(const FlipFlopFamily& fam, const Chain& chain) {
    if (chain.length() < 1) throw Error(ErrorKind::InvalidArgument, "average needs a chain of positive length");
    SumTracker tr(fam.potential().coded);
    tr.reset(chain.codes[0]);
    tr.open();
    for (std::size_t i = 1; i < chain.codes.size(); ++i) tr.push(chain.codes[i]);
    return tr.sum() / Interval{static_cast<double>(chain.length())};
}

Chain concatenate(const FlipFlopFamily& fam, const Chain& a, const Chain& b) {
    if (a.model != b.model) throw Error(ErrorKind::ContainmentViolation, "chains come from different models");
    if (!fam.entrance_within_exit(a, b))
        throw Error(ErrorKind::ContainmentViolation, "entrance of the second chain is not inside the exit of the first");
    Chain r;
    r.model = a.model;
    r.codes = a.codes;
    r.codes.insert(r.codes.end(), b.codes.begin() + 1, b.codes.end());
    const std::int64_t Ta = a.length();
    r.control_times = a.control_times;
    for (std::int64_t t : b.control_times) r.control_times.push_back(Ta + t);
    std::sort(r.control_times.begin(), r.control_times.end());
    r.control_times.erase(std::unique(r.control_times.begin(), r.control_times.end()), r.control_times.end());
    r.block_pattern = a.block_pattern;
    r.block_pattern.insert(r.block_pattern.end(), b.block_pattern.begin(), b.block_pattern.end());
    r.entrance_state = a.entrance_state;
    r.exit_state = b.exit_state;
    return r;
}

namespace {

class Engine {
public:
    Engine(const FlipFlopFamily& fam, const Pattern& pat, const ScaleLadder& L, const std::vector<ScalePlan>& plan,
           const ConstructOptions& opt, int k_top)
        : fam_(fam), pat_(pat), L_(L), plan_(plan), opt_(opt), tracker_(fam.potential().coded),
          block_(opt.pattern_offset) {
        schedules_.assign(k_top, {0});
    }

    SegmentResult run(const MemberRef& member, int k, Sign sign) {
        chain_ = fam_.start(member);
        if (fam_.sign_of_code(chain_.codes[0]) != pat_.at(block_))
            throw Error(ErrorKind::InvalidArgument, std::string("entrance member sign ") + sign_char(member.sign) +
                                                        " disagrees with the pattern at block " +
                                                        std::to_string(block_));
        chain_.codes.reserve(static_cast<std::size_t>(std::min<std::int64_t>(plan_[k - 1].t, opt_.step_budget)) + 1);
        tracker_.reset(chain_.codes[0]);
        tracker_.open();
        build(k, sign);
        SegmentResult r;
        r.entrance_sum = tracker_.sum();
        r.entrance_average = r.entrance_sum / Interval{static_cast<double>(chain_.length())};
        chain_.control_times = k == 1 ? std::vector<std::int64_t>{0, chain_.length()} : schedules_[k - 2];
        r.chain = std::move(chain_);
        r.ladder = L_;
        r.plan = plan_;
        r.schedules = std::move(schedules_);
        r.consumed_pattern = std::move(consumed_);
        r.candidates = std::move(candidates_);
        r.stop_index = std::move(stop_index_);
        return r;
    }

private:
    void step(Sign s) {
        fam_.extend_in_place(chain_, s);
        tracker_.push(chain_.codes.back());
        if (chain_.length() > opt_.step_budget)
            throw Error(ErrorKind::BudgetExceeded, "chain length exceeded the step budget of " +
                                                       std::to_string(opt_.step_budget) + " steps");
    }

    // Builds a scale-k segment of the given sign starting at the current exit.
    // The window opened here is the innermost one while this call runs its own checks.
    void build(int k, Sign sign) {
        const std::int64_t start = chain_.length();
        if (k == 1) {
            consumed_.push_back(pat_.at(block_));
            tracker_.open();
            for (int i = 1; i < L_.tau; ++i) step(sign);
            step(pat_.at(block_ + 1));
            ++block_;
            Interval avg = tracker_.sum() / Interval{static_cast<double>(L_.tau)};
            tracker_.close();
            Interval win = window_for(sign, L_.alpha_k(1), L_.beta_k(1));
            if (!win.contains(avg))
                throw Error(ErrorKind::TargetOvershoot, "tau-block average " + to_string_interval(avg) +
                                                            " not certified inside its window");
            schedules_[0].push_back(chain_.length());
            return;
        }
        const ScalePlan& p = plan_[k - 1];
        tracker_.open();
        for (std::int64_t i = 0; i < p.m; ++i) build(k - 1, sign);
        const double eta = p.eta;
        Interval win = window_for(sign, L_.alpha_k(k), L_.beta_k(k));
        Interval target = window_for(sign, L_.alpha_k(k) + eta, L_.beta_k(k) - eta);
        std::int64_t j = 0;
        while (true) {
            Interval sum = tracker_.sum();
            std::int64_t len = chain_.length() - start;
            Interval avg = sum / Interval{static_cast<double>(len)};
            if (opt_.log_candidates) candidates_.push_back({k, sign, j, start, len, sum, avg});
            if (avg.intersects(target)) {
                if (!win.contains(avg))
                    throw Error(ErrorKind::TargetOvershoot,
                                "average enclosure meets the target but leaves the window at scale " +
                                    std::to_string(k) + "; arithmetic tolerance must shrink");
                break;
            }
            if (j >= p.ell0)
                throw Error(ErrorKind::HittingBoundExceeded,
                            "no target hit after " + std::to_string(j) + " opposite-sign segments at scale " +
                                std::to_string(k));
            build(k - 1, opposite(sign));
            ++j;
        }
        tracker_.close();
        stop_index_.push_back(j);
        schedules_[k - 1].push_back(chain_.length());
    }

    const FlipFlopFamily& fam_;
    const Pattern& pat_;
    const ScaleLadder& L_;
    const std::vector<ScalePlan>& plan_;
    ConstructOptions opt_;
    SumTracker tracker_;
    std::uint64_t block_;
    Chain chain_;
    std::vector<std::vector<std::int64_t>> schedules_;
    std::vector<Sign> consumed_;
    std::vector<CandidateRecord> candidates_;
    std::vector<std::int64_t> stop_index_;
};

}  // namespace

SegmentResult build_controlled_segment(const FlipFlopFamily& fam, const MemberRef& member, const Pattern& pattern,
                                       const ScaleLadder& ladder, int k, Sign sign, const ConstructOptions& options) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "scale k must be >= 1");
    ScaleLadder L = ladder;
    validate_ladder(fam.potential(), L);
    auto plan = plan_scales(fam, L, k, options.sizing);
    if (plan.back().min_length > options.step_budget)
        throw Error(ErrorKind::BudgetExceeded,
                    "predicted length T >= " + std::to_string(plan.back().min_length) + " (at most t_" +
                        std::to_string(k) + " = " + std::to_string(plan.back().t) + ") exceeds the step budget of " +
                        std::to_string(options.step_budget));
    Engine e(fam, pattern, L, plan, options, k);
    return e.run(member, k, sign);
}

ControlledOrbitReport build_all_scales(const FlipFlopFamily& fam, const MemberRef& member, const Pattern& pattern,
                                       const ScaleLadder& ladder, int k_max, const ConstructOptions& options,
                                       TailRule rule) {
    if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 1");
    ControlledOrbitReport rep;
    rep.segment = build_controlled_segment(fam, member, pattern, ladder, k_max, member.sign, options);
    rep.entrance = fam.entrance_point(rep.segment.chain, rule);
    rep.tail_rule = rule;
    rep.k_max = k_max;
    rep.certified = true;
    return rep;
}

double block_constant(std::int64_t N, std::int64_t Nq, std::int64_t NG, std::int64_t m, double aq, double aG,
                      double C) {
    if (N < 0 || Nq < 0 || NG < 0 || m < 0) throw Error(ErrorKind::InvalidArgument, "block lengths must be >= 0");
    if (N < std::max(Nq, NG) + m) throw Error(ErrorKind::InvalidArgument, "N must be at least max(N_q, N_G) + m");
    if (!(aq > 0 && aG > 0)) throw Error(ErrorKind::InvalidArgument, "rates must be positive");
    if (!(C >= std::max(aq, aG))) throw Error(ErrorKind::InvalidArgument, "C must dominate both rates");
    Rational q = Rational(N - Nq - m) * rational_from_double(aq) - Rational(Nq + m) * rational_from_double(C);
    Rational g = Rational(N - NG - m) * rational_from_double(aG) - Rational(NG + m) * rational_from_double(C);
    Rational a = rmin(q, g);
    if (a <= 0) throw Error(ErrorKind::NotPositive, "block constant is not positive; enlarge N");
    Interval e = enclose(a);
    return e.lo;
}

std::int64_t smallest_positive_block(std::int64_t Nq, std::int64_t NG, std::int64_t m, double aq, double aG,
                                     double C, std::int64_t limit) {
    if (!(aq > 0 && aG > 0)) throw Error(ErrorKind::InvalidArgument, "rates must be positive");
    if (!(C >= std::max(aq, aG))) throw Error(ErrorKind::InvalidArgument, "C must dominate both rates");
    Rational rq = rational_from_double(aq), rg = rational_from_double(aG), rc = rational_from_double(C);
    mpz_class n1 = least_above(Rational(Nq + m) + Rational(Nq + m) * rc / rq);
    mpz_class n2 = least_above(Rational(NG + m) + Rational(NG + m) * rc / rg);
    mpz_class n = std::max({n1, n2, mpz_class(std::max(Nq, NG) + m)});
    if (n > limit) throw Error(ErrorKind::NotPositive, "no positive block constant below the scan limit");
    return n.get_si();
}

}  // namespace ff
