// AVX2 kernel variants. This translation unit is the only one compiled with
// -mavx2; entry happens through the runtime dispatch in kernels.cpp.

#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define HEATLAB_X86 1
#else
#define HEATLAB_X86 0
#endif

namespace heatlab::kernels::detail {

bool avx2_available() {
#if HEATLAB_X86 && defined(__AVX2__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

#if HEATLAB_X86 && defined(__AVX2__)

double sum_block_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (std::size_t l = 0; i < n; ++i, ++l) lanes[l] += x[i];
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double dot_block_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (std::size_t l = 0; i < n; ++i, ++l) lanes[l] += a[i] * b[i];
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

void stencil_avx2(const double* src, double* dst, std::size_t m) {
    const __m256d quarter = _mm256_set1_pd(0.25);
    const __m256d half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256d a = _mm256_loadu_pd(src + i);
        const __m256d b = _mm256_loadu_pd(src + i + 1);
        const __m256d c = _mm256_loadu_pd(src + i + 2);
        const __m256d r = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(quarter, a), _mm256_mul_pd(half, b)),
            _mm256_mul_pd(quarter, c));
        _mm256_storeu_pd(dst + i, r);
    }
    for (; i < m; ++i) dst[i] = (0.25 * src[i] + 0.5 * src[i + 1]) + 0.25 * src[i + 2];
}

#else

double sum_block_avx2(const double*, std::size_t) { return 0.0; }
double dot_block_avx2(const double*, const double*, std::size_t) { return 0.0; }
void stencil_avx2(const double*, double*, std::size_t) {}

#endif

}  // namespace heatlab::kernels::detail
