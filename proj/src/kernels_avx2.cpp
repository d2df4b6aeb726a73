#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "gbrv/kernels.hpp"

namespace gbrv::kernels {

void relax_shift_max_avx2(double* out, const double* prev, std::size_t n, std::size_t w,
                          double gain) {
    if (w >= n) return;
    const __m256d g = _mm256_set1_pd(gain);
    std::size_t q = w;
    for (; q + 4 <= n; q += 4) {
        __m256d cand = _mm256_add_pd(_mm256_loadu_pd(prev + (q - w)), g);
        __m256d cur = _mm256_loadu_pd(out + q);
        _mm256_storeu_pd(out + q, _mm256_max_pd(cur, cand));
    }
    for (; q < n; ++q) {
        double cand = prev[q - w] + gain;
        if (cand > out[q]) out[q] = cand;
    }
}

}  // namespace gbrv::kernels

#endif
