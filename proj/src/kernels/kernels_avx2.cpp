// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "flipflop/kernels.hpp"

namespace ff::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

SumResult coded_sum_avx2(const std::uint8_t* codes, std::size_t n, const double* table) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        std::uint32_t w0, w1;
        std::memcpy(&w0, codes + i, 4);
        std::memcpy(&w1, codes + i + 4, 4);
        __m128i idx0 = _mm_cvtepu8_epi32(_mm_cvtsi32_si128(static_cast<int>(w0)));
        __m128i idx1 = _mm_cvtepu8_epi32(_mm_cvtsi32_si128(static_cast<int>(w1)));
        __m256d v0 = _mm256_i32gather_pd(table, idx0, 8);
        __m256d v1 = _mm256_i32gather_pd(table, idx1, 8);
        s0 = _mm256_add_pd(s0, v0);
        s1 = _mm256_add_pd(s1, v1);
        a0 = _mm256_add_pd(a0, _mm256_andnot_pd(sign_mask, v0));
        a1 = _mm256_add_pd(a1, _mm256_andnot_pd(sign_mask, v1));
    }
    SumResult r;
    r.sum = hsum(_mm256_add_pd(s0, s1));
    r.abs_sum = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) {
        double v = table[codes[i]];
        r.sum += v;
        r.abs_sum += std::fabs(v);
    }
    return r;
}

void correlate_avx2(const double* u, std::size_t n_out, const double* c, std::size_t k, double* out) {
    std::size_t i = 0;
    for (; i + 8 <= n_out; i += 8) {
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        const double* w = u + i + 1;
        for (std::size_t m = 0; m < k; ++m) {
            __m256d cm = _mm256_broadcast_sd(c + m);
            acc0 = _mm256_fmadd_pd(cm, _mm256_loadu_pd(w + m), acc0);
            acc1 = _mm256_fmadd_pd(cm, _mm256_loadu_pd(w + m + 4), acc1);
        }
        _mm256_storeu_pd(out + i, acc0);
        _mm256_storeu_pd(out + i + 4, acc1);
    }
    for (; i < n_out; ++i) {
        double acc = 0.0;
        const double* w = u + i + 1;
        for (std::size_t m = 0; m < k; ++m) acc = std::fma(c[m], w[m], acc);
        out[i] = acc;
    }
}

void flush(std::uint32_t (&sub)[4][256], std::uint64_t* counts) {
    for (int b = 0; b < 256; b += 4) {
        __m256i acc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(counts + b));
        for (int s = 0; s < 4; ++s) {
            __m128i part = _mm_loadu_si128(reinterpret_cast<const __m128i*>(sub[s] + b));
            acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(part));
        }
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(counts + b), acc);
    }
    std::memset(sub, 0, sizeof(sub));
}

void histogram_avx2(const std::uint8_t* codes, std::size_t n, std::uint64_t* counts) {
    // four interleaved sub-histograms break the store-to-load dependency chain;
    // chunks keep the 32-bit lanes from overflowing
    constexpr std::size_t kChunk = std::size_t{1} << 30;
    std::uint32_t sub[4][256] = {};
    for (std::size_t base = 0; base < n; base += kChunk) {
        std::size_t end = base + kChunk < n ? base + kChunk : n;
        std::size_t i = base;
        for (; i + 4 <= end; i += 4) {
            ++sub[0][codes[i]];
            ++sub[1][codes[i + 1]];
            ++sub[2][codes[i + 2]];
            ++sub[3][codes[i + 3]];
        }
        for (; i < end; ++i) ++sub[0][codes[i]];
        flush(sub, counts);
    }
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{"avx2", coded_sum_avx2, correlate_avx2, histogram_avx2};

}  // namespace ff::kernels
