#pragma once

// Dense linear-algebra kernels behind the neural core.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at startup from CPUID; set
// SENTCAST_SIMD=scalar to force the reference path. Matrices are row-major.

#include <cstddef>
#include <span>
#include <string_view>

namespace sentcast::simd {

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend b);

[[nodiscard]] bool backend_supported(Backend b);
[[nodiscard]] Backend active_backend();
/// Switches the process-wide backend. Throws std::invalid_argument when the
/// CPU lacks the instructions.
void set_backend(Backend b);

struct AdamCoefficients {
  double lr;
  double beta1;
  double beta2;
  double epsilon;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

/// Function table for one backend.
struct KernelTable {
  /// C[m x n] (+)= A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c, bool accumulate);
  /// C[k x n] (+)= A[m x k]^T * B[m x n]
  void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c, bool accumulate);
  /// C[m x k] (+)= A[m x n] * B[k x n]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c, bool accumulate);
  /// In-place Adam update over one parameter block.
  void (*adam_update)(std::size_t count, double* param, const double* grad, double* m, double* v,
                      const AdamCoefficients& coef);
};

const KernelTable& scalar_kernels();
#if defined(SENTCAST_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif
const KernelTable& kernels_for(Backend b);
const KernelTable& active_kernels();

// Span front ends over the active table; sizes are checked.
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate = false);

}  // namespace sentcast::simd
