#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lstm_oracle.hpp"
#include "sentcast/error.hpp"
#include "sentcast/nn/lstm.hpp"

namespace sentcast::nn {
namespace {

using testing::random_lstm_params;
using testing::scalar_lstm_step;

std::vector<double> to_vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

TEST(LstmCell, ZeroWeightsHalveCellState) {
  std::mt19937_64 rng(1);
  auto p = random_lstm_params(2, 3, rng);
  for (Tensor* t : {&p.w_input, &p.w_forget, &p.w_output, &p.w_candidate, &p.b_input, &p.b_forget, &p.b_output,
                    &p.b_candidate}) {
    t->fill(0.0);
  }
  LstmState prev{Tensor({3}), Tensor::from({0.8, -2.0, 0.0})};
  const auto next = lstm_cell_step(p, prev, Tensor::from({5.0, -7.0}));
  for (std::size_t j = 0; j < 3; ++j) {
    const double c0 = prev.c[j];
    EXPECT_DOUBLE_EQ(next.c[j], 0.5 * c0);
    EXPECT_DOUBLE_EQ(next.h[j], 0.5 * std::tanh(0.5 * c0));
  }
  const auto zero = lstm_cell_step(p, LstmState::zeros(3), Tensor({2}));
  EXPECT_EQ(zero.h, Tensor({3}));
  EXPECT_EQ(zero.c, Tensor({3}));
}

TEST(LstmCell, MatchesScalarOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t hidden = 1 + rng() % 6;
    const std::size_t inputs = 1 + rng() % 4;
    const auto p = random_lstm_params(inputs, hidden, rng);
    LstmState prev{Tensor({hidden}), Tensor({hidden})};
    for (double& v : prev.h.values()) v = d(rng);
    for (double& v : prev.c.values()) v = 3.0 * d(rng);
    Tensor x({inputs});
    for (double& v : x.values()) v = d(rng);
    const auto got = lstm_cell_step(p, prev, x);
    const auto ref = scalar_lstm_step(p, to_vec(prev.h), to_vec(prev.c), to_vec(x));
    for (std::size_t j = 0; j < hidden; ++j) {
      worst = std::max({worst, std::abs(got.h[j] - ref.h[j]), std::abs(got.c[j] - ref.c[j])});
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(LstmCell, GateAndStateBounds) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = random_lstm_params(2, 4, rng, 3.0);
    LstmState state = LstmState::zeros(4);
    for (int t = 0; t < 20; ++t) {
      const auto next = lstm_cell_step(p, state, Tensor::from({5.0 * d(rng), 5.0 * d(rng)}));
      for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_LE(std::abs(next.h[j]), 1.0);
        EXPECT_LE(std::abs(next.c[j]), std::abs(state.c[j]) + 1.0);
      }
      state = next;
    }
  }
}

TEST(LstmLayer, SingleStepEqualsCell) {
  std::mt19937_64 rng(5);
  const auto p = random_lstm_params(3, 2, rng);
  const Tensor seq({1, 3}, std::vector<double>{0.2, -0.5, 0.9});
  const auto h = lstm_layer_forward(p, seq, false);
  const auto cell = lstm_cell_step(p, LstmState::zeros(2), Tensor::from({0.2, -0.5, 0.9}));
  EXPECT_EQ(h, cell.h);
}

TEST(LstmLayer, FourStepsMatchManualUnrolling) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_lstm_params(2, 3, rng);
    Tensor seq({4, 2});
    for (double& v : seq.values()) v = d(rng);
    const auto all = lstm_layer_forward(p, seq, true);
    ASSERT_EQ(all.shape(), (std::vector<std::size_t>{4, 3}));
    std::vector<double> h(3, 0.0), c(3, 0.0);
    for (std::size_t t = 0; t < 4; ++t) {
      const auto next = scalar_lstm_step(p, h, c, {seq.at(t, 0), seq.at(t, 1)});
      h = next.h;
      c = next.c;
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(all.at(t, j), h[j], 1e-12);
    }
    const auto last = lstm_layer_forward(p, seq, false);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(last[j], all.at(3, j));
  }
}

TEST(LstmLayer, ZeroWeightsIgnoreInputs) {
  std::mt19937_64 rng(1);
  auto p = random_lstm_params(1, 4, rng);
  for (Tensor* t : {&p.w_input, &p.w_forget, &p.w_output, &p.w_candidate, &p.b_input, &p.b_forget, &p.b_output,
                    &p.b_candidate}) {
    t->fill(0.0);
  }
  const auto h = lstm_layer_forward(p, Tensor({5, 1}, std::vector<double>{1, -9, 3, 100, 2}), false);
  for (std::size_t j = 1; j < 4; ++j) EXPECT_EQ(h[j], h[0]);
}

TEST(LstmLayer, BatchedForwardMatchesPerSample) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Lstm layer(random_lstm_params(2, 5, rng), true);
  Tensor batch({3, 6, 2});
  for (double& v : batch.values()) v = d(rng);
  const auto out = layer.forward(batch, false);
  ASSERT_EQ(out.shape(), (std::vector<std::size_t>{3, 6, 5}));
  for (std::size_t b = 0; b < 3; ++b) {
    Tensor seq({6, 2}, std::vector<double>(batch.values().begin() + static_cast<long>(b * 12),
                                           batch.values().begin() + static_cast<long>((b + 1) * 12)));
    const auto single = lstm_layer_forward(layer.params(), seq, true);
    for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(out[b * 30 + i], single[i], 1e-14);
  }
}

TEST(LstmLayer, ShapeErrors) {
  std::mt19937_64 rng(1);
  auto p = random_lstm_params(2, 3, rng);
  EXPECT_THROW((void)lstm_layer_forward(p, Tensor({4, 3}), false), ShapeError);
  p.b_forget = Tensor({2});
  EXPECT_THROW(p.validate(), ShapeError);
}

TEST(LstmLayer, DefaultInitHasUnitForgetBias) {
  Rng rng(3);
  Lstm layer(4, 6, false, rng);
  for (double b : layer.params().b_forget.values()) EXPECT_EQ(b, 1.0);
  for (double b : layer.params().b_input.values()) EXPECT_EQ(b, 0.0);
  const double limit = std::sqrt(6.0 / (10.0 + 6.0));
  for (double w : layer.params().w_candidate.values()) EXPECT_LE(std::abs(w), limit);
}

}  // namespace
}  // namespace sentcast::nn
