#include <cmath>
#include <limits>

#include "flipflop/kernels.hpp"

namespace ff::kernels {

namespace {

SumResult coded_sum_scalar(const std::uint8_t* codes, std::size_t n, const double* table) {
    SumResult r;
    for (std::size_t i = 0; i < n; ++i) {
        double v = table[codes[i]];
        r.sum += v;
        r.abs_sum += std::fabs(v);
    }
    return r;
}

void correlate_scalar(const double* u, std::size_t n_out, const double* c, std::size_t k, double* out) {
    for (std::size_t i = 0; i < n_out; ++i) {
        double acc = 0.0;
        const double* w = u + i + 1;
        for (std::size_t m = 0; m < k; ++m) acc = std::fma(c[m], w[m], acc);
        out[i] = acc;
    }
}

void histogram_scalar(const std::uint8_t* codes, std::size_t n, std::uint64_t* counts) {
    for (std::size_t i = 0; i < n; ++i) ++counts[codes[i]];
}

const KernelTable kScalar{"scalar", coded_sum_scalar, correlate_scalar, histogram_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

double gamma_bound(std::size_t n) {
    const double u = std::numeric_limits<double>::epsilon() / 2;
    double nu = static_cast<double>(n) * u;
    if (nu >= 0.5) return std::numeric_limits<double>::infinity();
    // one extra ulp of slack for the division itself
    return detail::up(nu / (1.0 - nu));
}

Interval coded_sum_enclosure(const KernelTable& k, const std::uint8_t* codes, std::size_t n,
                             const double* table, std::size_t table_size) {
    SumResult r = k.coded_sum(codes, n, table);
    bool integral = true;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < table_size; ++i) {
        if (table[i] != std::trunc(table[i])) integral = false;
        max_abs = std::fmax(max_abs, std::fabs(table[i]));
    }
    if (integral && max_abs * static_cast<double>(n) < 9007199254740992.0) return {r.sum, r.sum};
    double g = gamma_bound(n + 1);
    // abs_sum itself carries rounding error of the same order
    double err = detail::up(g * detail::up(r.abs_sum * (1.0 + 2.0 * g)));
    return {detail::down(r.sum - err), detail::up(r.sum + err)};
}

}  // namespace ff::kernels
