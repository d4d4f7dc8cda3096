// Built with -mavx2 -mfma. Only reached through the dispatch table after a
// CPUID check, so nothing here runs on older CPUs.

#include <immintrin.h>

#include <cmath>

#include "sentcast/nn/kernels.hpp"

namespace sentcast::simd {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// Computes C[row, j0:j0+16) over a sum of `count` rank-1 terms where term p
// contributes coeff(p) * B[p, j0:j0+16).
template <typename Coeff>
inline void block16(std::size_t count, std::size_t n, std::size_t j0, const double* b, double* crow,
                    bool accumulate, Coeff coeff) {
  __m256d acc0 = accumulate ? _mm256_loadu_pd(crow + j0) : _mm256_setzero_pd();
  __m256d acc1 = accumulate ? _mm256_loadu_pd(crow + j0 + 4) : _mm256_setzero_pd();
  __m256d acc2 = accumulate ? _mm256_loadu_pd(crow + j0 + 8) : _mm256_setzero_pd();
  __m256d acc3 = accumulate ? _mm256_loadu_pd(crow + j0 + 12) : _mm256_setzero_pd();
  for (std::size_t p = 0; p < count; ++p) {
    const __m256d s = _mm256_set1_pd(coeff(p));
    const double* brow = b + p * n + j0;
    acc0 = _mm256_fmadd_pd(s, _mm256_loadu_pd(brow), acc0);
    acc1 = _mm256_fmadd_pd(s, _mm256_loadu_pd(brow + 4), acc1);
    acc2 = _mm256_fmadd_pd(s, _mm256_loadu_pd(brow + 8), acc2);
    acc3 = _mm256_fmadd_pd(s, _mm256_loadu_pd(brow + 12), acc3);
  }
  _mm256_storeu_pd(crow + j0, acc0);
  _mm256_storeu_pd(crow + j0 + 4, acc1);
  _mm256_storeu_pd(crow + j0 + 8, acc2);
  _mm256_storeu_pd(crow + j0 + 12, acc3);
}

template <typename Coeff>
inline void block4(std::size_t count, std::size_t n, std::size_t j0, const double* b, double* crow,
                   bool accumulate, Coeff coeff) {
  __m256d acc = accumulate ? _mm256_loadu_pd(crow + j0) : _mm256_setzero_pd();
  for (std::size_t p = 0; p < count; ++p) {
    acc = _mm256_fmadd_pd(_mm256_set1_pd(coeff(p)), _mm256_loadu_pd(b + p * n + j0), acc);
  }
  _mm256_storeu_pd(crow + j0, acc);
}

template <typename Coeff>
inline void row_combination(std::size_t count, std::size_t n, const double* b, double* crow,
                            bool accumulate, Coeff coeff) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) block16(count, n, j, b, crow, accumulate, coeff);
  for (; j + 4 <= n; j += 4) block4(count, n, j, b, crow, accumulate, coeff);
  for (; j < n; ++j) {
    double acc = accumulate ? crow[j] : 0.0;
    for (std::size_t p = 0; p < count; ++p) acc = std::fma(coeff(p), b[p * n + j], acc);
    crow[j] = acc;
  }
}

void gemm_nn_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    row_combination(k, n, b, c + i * n, accumulate, [arow](std::size_t p) { return arow[p]; });
  }
}

// C[p, :] = sum_i A[i, p] * B[i, :]; the rank-1 terms run over i.
void gemm_tn_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c, bool accumulate) {
  for (std::size_t p = 0; p < k; ++p) {
    row_combination(m, n, b, c + p * n, accumulate, [a, k, p](std::size_t i) { return a[i * k + p]; });
  }
}

void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    for (std::size_t q = 0; q < k; ++q) {
      const double* brow = b + q * n;
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + j), _mm256_loadu_pd(brow + j), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + j + 4), _mm256_loadu_pd(brow + j + 4), acc1);
      }
      for (; j + 4 <= n; j += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + j), _mm256_loadu_pd(brow + j), acc0);
      }
      double sum = hsum(_mm256_add_pd(acc0, acc1));
      for (; j < n; ++j) sum = std::fma(arow[j], brow[j], sum);
      c[i * k + q] = accumulate ? c[i * k + q] + sum : sum;
    }
  }
}

// Same operation order as the scalar kernel (no FMA), so results are bit-identical.
void adam_update_avx2(std::size_t count, double* param, const double* grad, double* m, double* v,
                      const AdamCoefficients& coef) {
  const __m256d b1 = _mm256_set1_pd(coef.beta1);
  const __m256d b2 = _mm256_set1_pd(coef.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - coef.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - coef.beta2);
  const __m256d bc1 = _mm256_set1_pd(coef.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(coef.bias_correction2);
  const __m256d lr = _mm256_set1_pd(coef.lr);
  const __m256d eps = _mm256_set1_pd(coef.epsilon);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bc1);
    const __m256d v_hat = _mm256_div_pd(vi, bc2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < count; ++i) {
    const double g = grad[i];
    m[i] = coef.beta1 * m[i] + (1.0 - coef.beta1) * g;
    v[i] = coef.beta2 * v[i] + (1.0 - coef.beta2) * (g * g);
    const double m_hat = m[i] / coef.bias_correction1;
    const double v_hat = v[i] / coef.bias_correction2;
    param[i] -= coef.lr * m_hat / (std::sqrt(v_hat) + coef.epsilon);
  }
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{gemm_nn_avx2, gemm_tn_avx2, gemm_nt_avx2, adam_update_avx2};
  return table;
}

}  // namespace sentcast::simd
