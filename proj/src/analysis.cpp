#include "flipflop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "flipflop/coefficients.hpp"

namespace ff {

namespace {

// Materializes x_0 .. x_{n-1} of an orbit.
std::vector<std::uint8_t> unroll(const CodedOrbit& orbit, std::int64_t n) {
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(i) < orbit.head.size()) {
            out.push_back(orbit.head[i]);
        } else {
            if (orbit.period.empty())
                throw Error(ErrorKind::DomainEscape, "orbit itinerary is only known up to time " +
                                                         std::to_string(orbit.head.size()));
            out.push_back(orbit.period[(i - orbit.head.size()) % orbit.period.size()]);
        }
    }
    return out;
}

void check_codes(const CodedPotential& pot, const std::vector<std::uint8_t>& codes) {
    for (auto c : codes)
        if (c >= pot.local.size()) throw Error(ErrorKind::DomainEscape, "code outside the potential's alphabet");
}

// Long-range part sum_{m>=1} c_m u(x_{n+m}) for n < T.
std::vector<Interval> long_range_values(const CodedPotential& pot, const CodedOrbit& orbit, std::int64_t T,
                                        const PrefixOptions& opt) {
    const LongRange& lr = *pot.long_range;
    if (orbit.period.empty())
        throw Error(ErrorKind::DomainEscape, "long-range potential needs an eventually periodic orbit");
    const std::int64_t H = std::max<std::int64_t>(static_cast<std::int64_t>(orbit.head.size()), T + 1);
    const std::int64_t P = static_cast<std::int64_t>(orbit.period.size());
    std::vector<std::uint8_t> head = unroll(orbit, H);
    check_codes(pot, head);
    std::vector<std::uint8_t> per(P);
    for (std::int64_t r = 0; r < P; ++r)
        per[r] = orbit.period[(H + r - static_cast<std::int64_t>(orbit.head.size())) % P];
    check_codes(pot, per);

    PowerLaw law(lr.amplitude, lr.exponent);
    const double max_u = pot.max_abs_u();
    std::vector<Interval> out(static_cast<std::size_t>(T), Interval{0.0});
    if (max_u == 0.0 || lr.amplitude == 0.0) return out;

    // periodic positions i >= H: Q(a) = sum_k c_{a + kP}, needed for a in [H - T + 1, H + P - 1]
    const std::int64_t a_min = H - T + 1, a_max = H + P - 1;
    std::vector<Interval> Q(static_cast<std::size_t>(a_max - a_min + 1));
    for (std::int64_t a = a_max; a >= a_min; --a) {
        if (a + P > a_max)
            Q[a - a_min] = law.progression_tail(static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(P), 1e-15);
        else
            Q[a - a_min] = law.coeff(static_cast<std::uint64_t>(a)) + Q[a + P - a_min];
    }

    const std::size_t K = std::min<std::size_t>(opt.window, static_cast<std::size_t>(H));
    CoefficientTable table(law);
    table.ensure(static_cast<std::uint64_t>(H));
    std::vector<double> c(K);
    double coeff_err = 0.0, coeff_abs = 0.0;
    for (std::size_t m = 1; m <= K; ++m) {
        Interval cm = table.c(m);
        c[m - 1] = cm.mid();
        coeff_err += std::fmax(cm.hi - c[m - 1], c[m - 1] - cm.lo);
        coeff_abs += std::fabs(c[m - 1]);
    }
    // u values on the explicit zone, zero-padded so windows never reach the periodic part
    std::vector<double> useq(static_cast<std::size_t>(T) + K + 1, 0.0);
    for (std::int64_t i = 0; i < H && i < static_cast<std::int64_t>(useq.size()); ++i) useq[i] = lr.u[head[i]];
    std::vector<double> corr(static_cast<std::size_t>(T));
    const kernels::KernelTable& kt = opt.kernels ? *opt.kernels : kernels::active_kernels();
    kt.correlate(useq.data(), static_cast<std::size_t>(T), c.data(), K, corr.data());
    double g = kernels::gamma_bound(K + 1);
    double E = detail::up(max_u * detail::up(coeff_err * 1.01 + detail::up(g * coeff_abs * 1.01)));

    for (std::int64_t n = 0; n < T; ++n) {
        Interval v = Interval{corr[n]} + Interval{-E, E};
        std::int64_t last = H - 1 - n;  // explicit zone m in [1, last]
        if (last > static_cast<std::int64_t>(K)) {
            Interval mid = table.cum(static_cast<std::uint64_t>(last)) - table.cum(K);
            double R = (Interval{max_u} * mid).hi;
            v += Interval{-R, R};
        }
        for (std::int64_t r = 0; r < P; ++r) {
            double u = lr.u[per[r]];
            if (u != 0.0) v += Interval{u} * Q[H + r - n - a_min];
        }
        out[n] = v;
    }
    return out;
}

}  // namespace

std::vector<Interval> pointwise_values(const CodedPotential& pot, const CodedOrbit& orbit, std::int64_t T,
                                       const PrefixOptions& opt) {
    if (T < 0) throw Error(ErrorKind::InvalidArgument, "negative orbit length");
    std::vector<std::uint8_t> codes = unroll(orbit, T);
    check_codes(pot, codes);
    std::vector<Interval> out(static_cast<std::size_t>(T));
    for (std::int64_t n = 0; n < T; ++n) out[n] = pot.local[codes[n]];
    if (pot.long_range) {
        auto lrv = long_range_values(pot, orbit, T, opt);
        for (std::int64_t n = 0; n < T; ++n) out[n] += lrv[n];
    }
    return out;
}

namespace {

constexpr int kFixedBits = 60;

__int128 to_fixed(double v, bool round_up) {
    if (!(std::fabs(v) < 0x1p60)) throw Error(ErrorKind::DomainEscape, "potential value out of the summation range");
    double x = std::ldexp(v, kFixedBits);
    return static_cast<__int128>(round_up ? std::ceil(x) : std::floor(x));
}

double from_fixed(__int128 x, bool round_up) {
    double d = static_cast<double>(x);
    if (round_up && static_cast<__int128>(d) < x) d = detail::up(d);
    if (!round_up && static_cast<__int128>(d) > x) d = detail::down(d);
    return std::ldexp(d, -kFixedBits);
}

}  // namespace

PrefixSums::PrefixSums(const std::vector<Interval>& values) {
    lo_.reserve(values.size() + 1);
    hi_.reserve(values.size() + 1);
    for (const auto& v : values) {
        lo_.push_back(lo_.back() + to_fixed(v.lo, false));
        hi_.push_back(hi_.back() + to_fixed(v.hi, true));
    }
}

Interval PrefixSums::range(std::int64_t a, std::int64_t b) const {
    if (a < 0 || b > length() || a > b) throw Error(ErrorKind::InvalidArgument, "sum range outside the orbit");
    return {from_fixed(lo_[b] - lo_[a], false), from_fixed(hi_[b] - hi_[a], true)};
}

PrefixSums prefix_sums(const CodedPotential& pot, const CodedOrbit& orbit, std::int64_t T, const PrefixOptions& opt) {
    return PrefixSums(pointwise_values(pot, orbit, T, opt));
}

std::vector<Interval> birkhoff_prefix(const CodedPotential& pot, const CodedOrbit& orbit, std::int64_t T,
                                      const PrefixOptions& opt) {
    PrefixSums ps = prefix_sums(pot, orbit, T, opt);
    std::vector<Interval> sums(static_cast<std::size_t>(T) + 1);
    for (std::int64_t n = 0; n <= T; ++n) sums[n] = ps.prefix(n);
    return sums;
}

std::vector<Interval> gap_sums_resummed(const CodedPotential& pot, const CodedOrbit& orbit,
                                        const std::vector<std::int64_t>& P, const kernels::KernelTable& k) {
    if (pot.long_range) throw Error(ErrorKind::InvalidArgument, "kernel re-summation covers local potentials only");
    if (P.empty()) return {};
    std::vector<std::uint8_t> codes = unroll(orbit, P.back());
    check_codes(pot, codes);
    std::vector<double> lo(pot.local.size()), hi(pot.local.size());
    for (std::size_t c = 0; c < pot.local.size(); ++c) {
        lo[c] = pot.local[c].lo;
        hi[c] = pot.local[c].hi;
    }
    std::vector<Interval> out;
    for (std::size_t i = 0; i + 1 < P.size(); ++i) {
        if (P[i + 1] < P[i]) throw Error(ErrorKind::InvalidArgument, "control times must be sorted");
        const std::uint8_t* base = codes.data() + P[i];
        std::size_t n = static_cast<std::size_t>(P[i + 1] - P[i]);
        Interval a = kernels::coded_sum_enclosure(k, base, n, lo.data(), lo.size());
        Interval b = kernels::coded_sum_enclosure(k, base, n, hi.data(), hi.size());
        out.push_back({a.lo, b.hi});
    }
    return out;
}

ControlReport verify_gap_sums(const std::vector<Interval>& gap_sums, const std::vector<std::int64_t>& P, double beta,
                              std::int64_t t, std::int64_t T, int scale) {
    ControlReport r;
    r.scale = scale;
    r.beta = beta;
    r.t = t;
    r.control_times = P;
    r.pass = true;
    auto fail = [&](std::int64_t a, std::int64_t b, const std::string& why) {
        if (r.pass) {
            r.pass = false;
            r.failure = std::make_pair(a, b);
            r.reason = why;
        }
    };
    if (P.empty() || P.front() != 0) {
        fail(0, 0, "control times must start at 0");
        return r;
    }
    if (P.back() != T) fail(P.back(), T, "control times must end at T = " + std::to_string(T));
    if (gap_sums.size() + 1 != P.size()) {
        fail(0, 0, "gap sums do not match the control times");
        return r;
    }
    const Interval allowed{-beta, beta};
    for (std::size_t i = 0; i + 1 < P.size(); ++i) {
        std::int64_t a = P[i], b = P[i + 1];
        if (b <= a) {
            fail(a, b, "control times must be strictly increasing");
            r.gap_averages.push_back(Interval::entire());
            continue;
        }
        Interval avg = gap_sums[i] / Interval{static_cast<double>(b - a)};
        r.gap_averages.push_back(avg);
        if (b - a > t) fail(a, b, "gap length " + std::to_string(b - a) + " exceeds t = " + std::to_string(t));
        if (!allowed.contains(avg)) fail(a, b, "gap average not certified within [-beta, beta]");
    }
    return r;
}

ControlReport verify_gap_control(const std::vector<Interval>& sums, const std::vector<std::int64_t>& P, double beta,
                                 std::int64_t t, int scale) {
    std::vector<Interval> gaps;
    const std::int64_t T = static_cast<std::int64_t>(sums.size()) - 1;
    for (std::size_t i = 0; i + 1 < P.size(); ++i) {
        std::int64_t a = P[i], b = P[i + 1];
        if (a < 0 || b > T || a > b) {
            ControlReport r;
            r.scale = scale;
            r.beta = beta;
            r.t = t;
            r.control_times = P;
            r.failure = std::make_pair(a, b);
            r.reason = "control time outside [0, T]";
            return r;
        }
        gaps.push_back(sums[b] - sums[a]);
    }
    return verify_gap_sums(gaps, P, beta, t, T, scale);
}

ControlReport verify_gap_control(const PrefixSums& sums, const std::vector<std::int64_t>& P, double beta,
                                 std::int64_t t, int scale) {
    std::vector<Interval> gaps;
    for (std::size_t i = 0; i + 1 < P.size(); ++i) {
        std::int64_t a = P[i], b = P[i + 1];
        if (a < 0 || b > sums.length() || a > b) {
            ControlReport r;
            r.scale = scale;
            r.beta = beta;
            r.t = t;
            r.control_times = P;
            r.failure = std::make_pair(a, b);
            r.reason = "control time outside [0, T]";
            return r;
        }
        gaps.push_back(sums.range(a, b));
    }
    return verify_gap_sums(gaps, P, beta, t, sums.length(), scale);
}

std::vector<ControlReport> verify_schedule(const FlipFlopFamily& fam, const ControlledOrbitReport& rep,
                                           const PrefixOptions& opt) {
    const Chain& ch = rep.segment.chain;
    CodedOrbit orbit = fam.coded_orbit(ch, rep.tail_rule);
    PrefixSums sums = prefix_sums(fam.potential().coded, orbit, ch.length(), opt);
    std::vector<ControlReport> out;
    for (int i = 1; i <= rep.k_max; ++i)
        out.push_back(verify_gap_control(sums, rep.segment.schedules.at(i - 1), rep.segment.ladder.beta_k(i),
                                         rep.segment.ladder.t.at(i), i));
    return out;
}

double envelope_bound(const ScaleLadder& ladder, int k_max, double beta1, std::int64_t n, int* k_used) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "envelope needs n >= 1");
    int k = 0;
    for (int i = 1; i <= k_max && i < static_cast<int>(ladder.t.size()); ++i)
        if (ladder.t[i] <= n) k = i;
    if (k_used) *k_used = k;
    if (k == 0) return beta1;
    Interval b = Interval{ladder.beta_k(k)} +
                 Interval{static_cast<double>(ladder.t[k])} * Interval{beta1} / Interval{static_cast<double>(n)};
    return b.hi;
}

EnvelopeResult exponent_envelope(const ControlledOrbitReport& rep, double beta1, const std::vector<Interval>& sums,
                                 std::int64_t n) {
    if (n < 1 || n >= static_cast<std::int64_t>(sums.size()))
        throw Error(ErrorKind::InvalidArgument, "envelope time outside the orbit");
    EnvelopeResult e;
    e.bound = envelope_bound(rep.segment.ladder, rep.k_max, beta1, n, &e.k);
    e.actual = abs(sums[n]) / Interval{static_cast<double>(n)};
    e.respected = e.actual.hi <= e.bound;
    return e;
}

std::vector<Sign> tau_itinerary_from_values(const std::vector<Interval>& values, int tau, double alpha,
                                            std::size_t blocks, std::int64_t offset) {
    std::vector<Sign> out;
    out.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        std::int64_t i = static_cast<std::int64_t>(b) * tau + offset;
        if (i >= static_cast<std::int64_t>(values.size()))
            throw Error(ErrorKind::InvalidArgument, "orbit too short for the requested itinerary");
        const Interval& v = values[i];
        if (v.lo >= alpha)
            out.push_back(Sign::Plus);
        else if (v.hi <= -alpha)
            out.push_back(Sign::Minus);
        else
            throw Error(ErrorKind::AmbiguousClassification,
                        "value at time " + std::to_string(i) + " straddles the classification threshold");
    }
    return out;
}

std::vector<Sign> tau_itinerary(const CodedPotential& pot, const CodedOrbit& orbit, int tau, double alpha,
                                std::size_t blocks, std::int64_t offset, const PrefixOptions& opt) {
    if (tau < 1) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
    std::int64_t T = static_cast<std::int64_t>(blocks) * tau + offset;
    if (blocks == 0) return {};
    auto values = pointwise_values(pot, orbit, T, opt);
    return tau_itinerary_from_values(values, tau, alpha, blocks, offset);
}

Census word_census(const std::vector<Sign>& it, int L, int tau) {
    if (L < 1 || L > 63) throw Error(ErrorKind::InvalidArgument, "word length must be in [1, 63]");
    if (tau < 1) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
    Census c;
    c.L = L;
    if (it.size() >= static_cast<std::size_t>(L)) {
        const std::uint64_t mask = (L == 64) ? ~0ull : ((std::uint64_t{1} << L) - 1);
        std::unordered_set<std::uint64_t> seen;
        std::uint64_t w = 0;
        for (std::size_t i = 0; i < it.size(); ++i) {
            w = ((w << 1) | (it[i] == Sign::Minus ? 1u : 0u)) & mask;
            if (i + 1 >= static_cast<std::size_t>(L)) seen.insert(w);
        }
        c.count = seen.size();
    }
    c.complete = c.count == (std::uint64_t{1} << L);
    c.estimate = c.count > 0 ? std::log(static_cast<double>(c.count)) / (static_cast<double>(tau) * L) : 0.0;
    return c;
}

}  // namespace ff
