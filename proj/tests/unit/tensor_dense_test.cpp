#include <random>

#include <gtest/gtest.h>

#include "sentcast/error.hpp"
#include "sentcast/nn/dense.hpp"
#include "sentcast/nn/network.hpp"

namespace sentcast::nn {
namespace {

TEST(Tensor, ShapeAndValues) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6U);
  EXPECT_EQ(t.rank(), 2U);
  EXPECT_EQ(t.shape_string(), "[2 x 3]");
  t.at(1, 2) = 4.0;
  EXPECT_EQ(t[5], 4.0);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW((void)t.reshaped({4}), ShapeError);
  EXPECT_EQ(t.reshaped({3, 2}).values()[5], 4.0);
  t[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

DenseParams make_params(std::size_t in, std::size_t out, Activation act, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  DenseParams p{Tensor({in, out}), Tensor({out}), act};
  for (double& w : p.weights.values()) w = d(rng);
  for (double& b : p.bias.values()) b = d(rng);
  return p;
}

TEST(DenseForward, ZeroWeightsReluGivesZero) {
  DenseParams p{Tensor({3, 2}), Tensor({2}), Activation::relu};
  const auto y = dense_forward(p, Tensor::from({1.0, -4.0, 9.0}));
  EXPECT_EQ(y, Tensor::from({0.0, 0.0}));
}

TEST(DenseForward, OneByOne) {
  DenseParams p{Tensor({1, 1}, std::vector<double>{2.0}), Tensor::from({1.0}), Activation::linear};
  EXPECT_EQ(dense_forward(p, Tensor::from({3.0})), Tensor::from({7.0}));
}

TEST(DenseForward, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (auto act : {Activation::linear, Activation::relu, Activation::tanh}) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = make_params(4, 3, act, rng);
      const std::size_t batch = 1 + rng() % 5;
      Tensor x({batch, 4});
      for (double& v : x.values()) v = d(rng);
      const auto y = dense_forward(p, x);
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t j = 0; j < 3; ++j) {
          double s = p.bias[j];
          for (std::size_t i = 0; i < 4; ++i) s += x.at(r, i) * p.weights.at(i, j);
          if (act == Activation::relu) s = s > 0.0 ? s : 0.0;
          if (act == Activation::tanh) s = std::tanh(s);
          EXPECT_NEAR(y.at(r, j), s, 1e-12);
        }
      }
    }
  }
}

TEST(DenseForward, LinearIsAdditiveInBias) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = make_params(5, 4, Activation::linear, rng);
    const Tensor x = Tensor::from({0.3, -1.2, 2.0, 0.7, -0.1});
    const auto with_bias = dense_forward(p, x);
    const Tensor bias = p.bias;
    p.bias.fill(0.0);
    const auto without = dense_forward(p, x);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(with_bias[j], without[j] + bias[j], 1e-12);
  }
}

TEST(DenseForward, ShapeMismatch) {
  DenseParams p{Tensor({3, 2}), Tensor({2}), Activation::linear};
  EXPECT_THROW((void)dense_forward(p, Tensor::from({1.0, 2.0})), ShapeError);
  EXPECT_THROW((void)dense_forward(p, Tensor({2, 4})), ShapeError);
}

TEST(Backward, SingleLinearNeuron) {
  Network net;
  net.add(std::make_unique<Dense>(DenseParams{Tensor({1, 1}, std::vector<double>{1.0}), Tensor({1}), Activation::linear}));
  const double loss = net.loss_and_gradients(Tensor({1, 1}, std::vector<double>{2.0}), Tensor({1, 1}), true);
  EXPECT_DOUBLE_EQ(loss, 4.0);
  const auto params = net.parameters();
  ASSERT_EQ(params.size(), 2U);
  EXPECT_DOUBLE_EQ((*params[0].grad)[0], 8.0);  // 2 x (w x - t)
  EXPECT_DOUBLE_EQ((*params[1].grad)[0], 4.0);
}

TEST(Backward, ExactFitGivesZeroGradients) {
  std::mt19937_64 rng(2);
  Network net;
  net.add(std::make_unique<Dense>(3, 4, Activation::tanh, rng));
  net.add(std::make_unique<Dense>(4, 1, Activation::linear, rng));
  Tensor x({2, 3}, std::vector<double>{0.1, 0.2, 0.3, -0.4, 0.5, -0.6});
  const Tensor target = net.forward(x, false);
  net.loss_and_gradients(x, target, true);
  for (const auto& p : net.parameters()) {
    for (double g : p.grad->values()) EXPECT_EQ(g, 0.0) << p.name;
  }
}

TEST(Backward, RequiresForward) {
  std::mt19937_64 rng(2);
  Network net;
  net.add(std::make_unique<Dense>(3, 1, Activation::linear, rng));
  EXPECT_THROW(net.backward(Tensor({1, 1})), std::logic_error);
  (void)net.forward(Tensor({1, 3}), true);
  EXPECT_NO_THROW(net.backward(Tensor({1, 1})));
  EXPECT_THROW(net.backward(Tensor({1, 1})), std::logic_error);
}

}  // namespace
}  // namespace sentcast::nn
