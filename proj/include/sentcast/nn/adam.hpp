#pragma once

#include <span>
#include <vector>

#include "sentcast/nn/layer.hpp"

namespace sentcast::nn {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  long step = 0;
  std::vector<Tensor> m;  // first moments, one per parameter
  std::vector<Tensor> v;  // second moments
};

AdamState make_adam_state(std::span<const Parameter> params, AdamConfig config);

/// One bias-corrected Adam update of every parameter from its `grad`.
/// Throws DivergenceError (naming the parameter) on a non-finite gradient;
/// nothing is modified in that case.
void adam_step(AdamState& state, std::span<const Parameter> params);

}  // namespace sentcast::nn
