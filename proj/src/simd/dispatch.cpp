#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "sentcast/error.hpp"
#include "sentcast/nn/kernels.hpp"

namespace sentcast::simd {

namespace {

bool cpu_has_avx2_fma() {
#if defined(SENTCAST_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* forced = std::getenv("SENTCAST_SIMD"); forced != nullptr) {
    if (std::string(forced) == "scalar") return Backend::scalar;
  }
  return cpu_has_avx2_fma() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

void check(std::size_t have, std::size_t need, const char* what) {
  if (have < need) throw ShapeError(fmt::format("{}: buffer holds {} values, needs {}", what, have, need));
}

}  // namespace

std::string_view to_string(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool backend_supported(Backend b) { return b == Backend::scalar || cpu_has_avx2_fma(); }

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw std::invalid_argument(fmt::format("SIMD backend '{}' is not supported on this CPU", to_string(b)));
  }
  current().store(b, std::memory_order_relaxed);
}

const KernelTable& kernels_for(Backend b) {
#if defined(SENTCAST_HAVE_AVX2)
  if (b == Backend::avx2) return avx2_kernels();
#endif
  (void)b;
  return scalar_kernels();
}

const KernelTable& active_kernels() { return kernels_for(active_backend()); }

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  check(a.size(), m * k, "gemm_nn A");
  check(b.size(), k * n, "gemm_nn B");
  check(c.size(), m * n, "gemm_nn C");
  active_kernels().gemm_nn(m, k, n, a.data(), b.data(), c.data(), accumulate);
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  check(a.size(), m * k, "gemm_tn A");
  check(b.size(), m * n, "gemm_tn B");
  check(c.size(), k * n, "gemm_tn C");
  active_kernels().gemm_tn(m, k, n, a.data(), b.data(), c.data(), accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c, bool accumulate) {
  check(a.size(), m * n, "gemm_nt A");
  check(b.size(), k * n, "gemm_nt B");
  check(c.size(), m * k, "gemm_nt C");
  active_kernels().gemm_nt(m, n, k, a.data(), b.data(), c.data(), accumulate);
}

}  // namespace sentcast::simd
