#include "gbrv/kernels.hpp"

namespace gbrv::kernels {

void relax_shift_max_scalar(double* out, const double* prev, std::size_t n, std::size_t w,
                            double gain) {
    for (std::size_t q = w; q < n; ++q) {
        double cand = prev[q - w] + gain;
        if (cand > out[q]) out[q] = cand;
    }
}

namespace {

Backend detect_backend() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#elif defined(__aarch64__)
    return Backend::Neon;
#endif
    return Backend::Scalar;
}

Backend& selected() {
    static Backend backend = detect_backend();
    return backend;
}

}  // namespace

const char* backend_name(Backend backend) {
    switch (backend) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "?";
}

Backend active_backend() { return selected(); }

bool backend_available(Backend backend) {
    switch (backend) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

bool set_backend(Backend backend) {
    if (!backend_available(backend)) return false;
    selected() = backend;
    return true;
}

void relax_shift_max(double* out, const double* prev, std::size_t n, std::size_t w,
                     double gain) {
    switch (selected()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::Avx2:
            relax_shift_max_avx2(out, prev, n, w, gain);
            return;
#endif
#if defined(__aarch64__)
        case Backend::Neon:
            relax_shift_max_neon(out, prev, n, w, gain);
            return;
#endif
        default:
            relax_shift_max_scalar(out, prev, n, w, gain);
            return;
    }
}

}  // namespace gbrv::kernels
