#include <cmath>

#include "sentcast/nn/kernels.hpp"

namespace sentcast::simd {

namespace {

void gemm_nn_scalar(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                    double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void gemm_tn_scalar(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                    double* c, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < k * n; ++i) c[i] = 0.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void gemm_nt_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    for (std::size_t q = 0; q < k; ++q) {
      const double* brow = b + q * n;
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += arow[j] * brow[j];
      c[i * k + q] = accumulate ? c[i * k + q] + sum : sum;
    }
  }
}

void adam_update_scalar(std::size_t count, double* param, const double* grad, double* m, double* v,
                        const AdamCoefficients& coef) {
  const double one_minus_b1 = 1.0 - coef.beta1;
  const double one_minus_b2 = 1.0 - coef.beta2;
  for (std::size_t i = 0; i < count; ++i) {
    const double g = grad[i];
    m[i] = coef.beta1 * m[i] + one_minus_b1 * g;
    v[i] = coef.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / coef.bias_correction1;
    const double v_hat = v[i] / coef.bias_correction2;
    param[i] -= coef.lr * m_hat / (std::sqrt(v_hat) + coef.epsilon);
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{gemm_nn_scalar, gemm_tn_scalar, gemm_nt_scalar, adam_update_scalar};
  return table;
}

}  // namespace sentcast::simd
