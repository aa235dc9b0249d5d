#pragma once

#include <cstddef>
#include <cstdint>

#include "flipflop/interval.hpp"

namespace ff::kernels {

struct SumResult {
    double sum = 0.0;
    double abs_sum = 0.0;  // sum of |table[code]|, for the rounding-error bound
};

// Inner loops of the Birkhoff bookkeeping. Every entry point has a scalar
// reference implementation; vector variants must agree with it up to the
// reordering error bound gamma_n * abs_sum.
struct KernelTable {
    const char* name;
    // sum of table[codes[i]] over i < n
    SumResult (*coded_sum)(const std::uint8_t* codes, std::size_t n, const double* table);
    // out[i] = sum_{m=1..k} c[m-1] * u[i+m] for i < n_out; u holds n_out + k values
    void (*correlate)(const double* u, std::size_t n_out, const double* c, std::size_t k, double* out);
    // counts[code] += occurrences, counts has 256 slots
    void (*histogram)(const std::uint8_t* codes, std::size_t n, std::uint64_t* counts);
};

const KernelTable& scalar_kernels();
// nullptr when the binary was built without AVX2 support or the CPU lacks it
const KernelTable* avx2_kernels();
// Selected once at first use; FLIPFLOP_FORCE_SCALAR=1 pins the scalar table.
const KernelTable& active_kernels();

// Upper bound on the error of any summation order of n terms, relative to the
// sum of magnitudes: gamma_n = n u / (1 - n u).
double gamma_bound(std::size_t n);

// Certified enclosure of sum table[codes[i]]. Integral tables summed below
// 2^53 are exact, so the result is a point interval in that case.
Interval coded_sum_enclosure(const KernelTable& k, const std::uint8_t* codes, std::size_t n,
                             const double* table, std::size_t table_size);

}  // namespace ff::kernels
