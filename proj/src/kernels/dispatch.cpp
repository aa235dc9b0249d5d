#include <cstdlib>
#include <cstring>

#include "flipflop/kernels.hpp"

namespace ff::kernels {

#ifdef FLIPFLOP_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

const KernelTable* avx2_kernels() {
#ifdef FLIPFLOP_HAVE_AVX2
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &kAvx2Table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active_kernels() {
    static const KernelTable& chosen = []() -> const KernelTable& {
        const char* force = std::getenv("FLIPFLOP_FORCE_SCALAR");
        if (force && std::strcmp(force, "0") != 0 && *force) return scalar_kernels();
        if (const KernelTable* k = avx2_kernels()) return *k;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace ff::kernels
