#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "sentcast/error.hpp"
#include "sentcast/nn/adam.hpp"
#include "sentcast/nn/kernels.hpp"

namespace sentcast::nn {
namespace {

struct Block {
  Tensor value;
  Tensor grad;
  std::vector<Parameter> params() { return {{"w", &value, &grad}}; }
};

TEST(Adam, ZeroGradientLeavesParameters) {
  Block b{Tensor::from({0.5, -1.0}), Tensor({2})};
  auto state = make_adam_state(b.params(), {0.01});
  adam_step(state, b.params());
  EXPECT_EQ(b.value, Tensor::from({0.5, -1.0}));
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, FirstStepWithUnitGradient) {
  Block b{Tensor::from({0.0}), Tensor::from({1.0})};
  auto state = make_adam_state(b.params(), {0.01, 0.9, 0.999, 1e-8});
  adam_step(state, b.params());
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  EXPECT_NEAR(b.value[0], -0.01 / (1.0 + 1e-8), 1e-18);
  EXPECT_NEAR(b.value[0], -0.00999999999, 1e-10);
}

// Textbook Adam on one scalar.
double reference_adam(double theta, const std::vector<double>& grads, double lr) {
  double m = 0.0;
  double v = 0.0;
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    const double g = grads[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(0.999, static_cast<double>(t)));
    theta -= lr * mhat / (std::sqrt(vhat) + 1e-8);
  }
  return theta;
}

TEST(Adam, MatchesScalarReferenceOnEveryBackend) {
  std::vector<simd::Backend> backends{simd::Backend::scalar};
  if (simd::backend_supported(simd::Backend::avx2)) backends.push_back(simd::Backend::avx2);
  const auto original = simd::active_backend();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (auto backend : backends) {
    simd::set_backend(backend);
    // Two steps of a constant gradient.
    Block b{Tensor::from({0.3}), Tensor::from({0.7})};
    auto state = make_adam_state(b.params(), {0.02});
    adam_step(state, b.params());
    adam_step(state, b.params());
    EXPECT_NEAR(b.value[0], reference_adam(0.3, {0.7, 0.7}, 0.02), 1e-12);

    // Longer random runs across a 37-element block.
    Block big{Tensor({37}), Tensor({37})};
    std::vector<double> start(37);
    for (auto& s : start) s = d(rng);
    std::copy(start.begin(), start.end(), big.value.values().begin());
    std::vector<std::vector<double>> history(37);
    auto st = make_adam_state(big.params(), {0.01});
    for (int step = 0; step < 25; ++step) {
      for (std::size_t i = 0; i < 37; ++i) {
        big.grad[i] = d(rng);
        history[i].push_back(big.grad[i]);
      }
      adam_step(st, big.params());
    }
    for (std::size_t i = 0; i < 37; ++i) EXPECT_NEAR(big.value[i], reference_adam(start[i], history[i], 0.01), 1e-12);
  }
  simd::set_backend(original);
}

TEST(Adam, NonFiniteGradientAbortsWithoutChanges) {
  Block a{Tensor::from({1.0, 2.0}), Tensor::from({0.5, 0.5})};
  Block b{Tensor::from({3.0}), Tensor::from({std::numeric_limits<double>::infinity()})};
  std::vector<Parameter> params{{"a", &a.value, &a.grad}, {"layer.b", &b.value, &b.grad}};
  auto state = make_adam_state(params, {0.01});
  try {
    adam_step(state, params);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.b"), std::string::npos);
  }
  EXPECT_EQ(a.value, Tensor::from({1.0, 2.0}));
  EXPECT_EQ(state.step, 0);
}

TEST(Adam, SecondMomentStaysNonNegative) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d(0.0, 10.0);
  Block b{Tensor({50}), Tensor({50})};
  auto state = make_adam_state(b.params(), {0.01});
  for (int step = 0; step < 100; ++step) {
    for (double& g : b.grad.values()) g = d(rng);
    adam_step(state, b.params());
    for (double v : state.v[0].values()) ASSERT_GE(v, 0.0);
  }
}

}  // namespace
}  // namespace sentcast::nn
