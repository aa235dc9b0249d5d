#include <cmath>
#include <vector>

#include "doctest.h"
#include "flipflop/kernels.hpp"
#include "flipflop/rational.hpp"
#include "gen.hpp"

using namespace ff;
using namespace ff::kernels;

namespace {

std::vector<const KernelTable*> tables() {
    std::vector<const KernelTable*> v{&scalar_kernels()};
    if (const KernelTable* a = avx2_kernels()) v.push_back(a);
    return v;
}

Rational exact_coded_sum(const std::vector<std::uint8_t>& codes, const std::vector<double>& table) {
    Rational s = 0;
    for (auto c : codes) s += rational_from_double(table[c]);
    return s;
}

}  // namespace

TEST_CASE("kernel tables report their names") {
    CHECK(std::string(scalar_kernels().name) == "scalar");
    if (avx2_kernels()) CHECK(std::string(avx2_kernels()->name) == "avx2");
    else MESSAGE("AVX2 kernels unavailable; equivalence runs against scalar only");
}

TEST_CASE("coded sums agree with the exact sum within the reordering bound") {
    gen::Engine g(21);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = static_cast<std::size_t>(gen::integer(g, 0, 2000));
        int alphabet = static_cast<int>(gen::integer(g, 1, 7));
        std::vector<double> table(alphabet);
        for (auto& t : table) t = gen::uniform(g, -3.0, 3.0);
        auto codes = gen::codes(g, n, alphabet);
        Rational exact = exact_coded_sum(codes, table);
        for (const KernelTable* k : tables()) {
            CAPTURE(k->name);
            SumResult r = k->coded_sum(codes.data(), n, table.data());
            double err = std::fabs(Rational(rational_from_double(r.sum) - exact).get_d());
            CHECK(err <= gamma_bound(n) * r.abs_sum + 1e-300);
            Interval e = coded_sum_enclosure(*k, codes.data(), n, table.data(), table.size());
            CHECK(rational_from_double(e.lo) <= exact);
            CHECK(exact <= rational_from_double(e.hi));
        }
    }
}

TEST_CASE("integral tables give exact point sums") {
    gen::Engine g(22);
    std::vector<double> table{1.0, -1.0, 3.0};
    for (int trial = 0; trial < 50; ++trial) {
        auto codes = gen::codes(g, static_cast<std::size_t>(gen::integer(g, 1, 5000)), 3);
        Rational exact = exact_coded_sum(codes, table);
        for (const KernelTable* k : tables()) {
            Interval e = coded_sum_enclosure(*k, codes.data(), codes.size(), table.data(), table.size());
            CHECK(e.is_point());
            CHECK(rational_from_double(e.lo) == exact);
        }
    }
}

TEST_CASE("histograms match a direct count exactly") {
    gen::Engine g(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = static_cast<std::size_t>(gen::integer(g, 0, 3000));
        int alphabet = static_cast<int>(gen::integer(g, 1, 256));
        auto codes = gen::codes(g, n, alphabet);
        std::vector<std::uint64_t> expect(256, 0);
        for (auto c : codes) ++expect[c];
        for (const KernelTable* k : tables()) {
            std::vector<std::uint64_t> got(256, 0);
            k->histogram(codes.data(), n, got.data());
            CHECK(got == expect);
        }
    }
}

TEST_CASE("correlation variants agree within the summation bound") {
    gen::Engine g(24);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n_out = static_cast<std::size_t>(gen::integer(g, 0, 300));
        std::size_t k = static_cast<std::size_t>(gen::integer(g, 1, 70));
        std::vector<double> u(n_out + k + 1), c(k);
        for (auto& x : u) x = gen::integer(g, 0, 1) ? 1.0 : -1.0;
        for (std::size_t m = 0; m < k; ++m) c[m] = 1.0 / ((m + 2.0) * (m + 2.0));
        std::vector<Rational> exact(n_out);
        for (std::size_t i = 0; i < n_out; ++i)
            for (std::size_t m = 1; m <= k; ++m) exact[i] += rational_from_double(c[m - 1]) * rational_from_double(u[i + m]);
        for (const KernelTable* t : tables()) {
            CAPTURE(t->name);
            std::vector<double> out(n_out, 0.0);
            t->correlate(u.data(), n_out, c.data(), k, out.data());
            double abs_c = 0;
            for (double x : c) abs_c += x;
            for (std::size_t i = 0; i < n_out; ++i)
                CHECK(std::fabs(Rational(rational_from_double(out[i]) - exact[i]).get_d()) <= gamma_bound(k) * abs_c * 1.0001);
        }
    }
}

TEST_CASE("gamma bound grows linearly for small n") {
    CHECK(gamma_bound(0) < 1e-300);
    CHECK(gamma_bound(1000) > 1000 * 0x1p-53);
    CHECK(gamma_bound(1000) < 1001 * 0x1p-53);
}
