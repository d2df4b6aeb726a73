#pragma once

#include <cstddef>

// Data-parallel inner loops of the knapsack solvers. A scalar reference
// implementation always exists; AVX2 (x86-64) and NEON (aarch64) variants are
// selected at runtime and must produce bit-identical results on finite
// inputs. Inputs must not contain NaN.

namespace gbrv::kernels {

enum class Backend { Scalar, Avx2, Neon };

const char* backend_name(Backend backend);

// Backend chosen for this process (CPU-detected, or overridden).
Backend active_backend();

// Force a backend; returns false (and leaves the selection unchanged) when
// the requested backend is not available on this CPU.
bool set_backend(Backend backend);

bool backend_available(Backend backend);

// DP row relaxation: out[q] = max(out[q], prev[q - w] + gain) for q in
// [w, n). `out` and `prev` must not overlap. No-op when w >= n.
void relax_shift_max(double* out, const double* prev, std::size_t n, std::size_t w,
                     double gain);

// Reference and ISA-specific entry points, exposed for equivalence tests.
void relax_shift_max_scalar(double* out, const double* prev, std::size_t n, std::size_t w,
                            double gain);
#if defined(__x86_64__) || defined(_M_X64)
void relax_shift_max_avx2(double* out, const double* prev, std::size_t n, std::size_t w,
                          double gain);
#endif
#if defined(__aarch64__)
void relax_shift_max_neon(double* out, const double* prev, std::size_t n, std::size_t w,
                          double gain);
#endif

}  // namespace gbrv::kernels
