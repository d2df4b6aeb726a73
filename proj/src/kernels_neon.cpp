#if defined(__aarch64__)

#include <arm_neon.h>

#include "gbrv/kernels.hpp"

namespace gbrv::kernels {

void relax_shift_max_neon(double* out, const double* prev, std::size_t n, std::size_t w,
                          double gain) {
    if (w >= n) return;
    const float64x2_t g = vdupq_n_f64(gain);
    std::size_t q = w;
    for (; q + 2 <= n; q += 2) {
        float64x2_t cand = vaddq_f64(vld1q_f64(prev + (q - w)), g);
        float64x2_t cur = vld1q_f64(out + q);
        vst1q_f64(out + q, vmaxq_f64(cur, cand));
    }
    for (; q < n; ++q) {
        double cand = prev[q - w] + gain;
        if (cand > out[q]) out[q] = cand;
    }
}

}  // namespace gbrv::kernels

#endif
