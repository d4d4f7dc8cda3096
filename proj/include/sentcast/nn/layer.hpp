#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sentcast/nn/tensor.hpp"

namespace sentcast::nn {

/// A trainable tensor and its gradient accumulator, owned by a layer.
struct Parameter {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
};

/// One stage of a sequential network. `forward` caches whatever `backward`
/// needs; `backward` accumulates parameter gradients and returns the gradient
/// with respect to the layer input.
class Layer {
 public:
  virtual ~Layer() = default;

  [[nodiscard]] virtual std::string_view kind() const = 0;
  virtual Tensor forward(const Tensor& input, bool training) = 0;
  virtual Tensor backward(const Tensor& grad_output) = 0;
  virtual std::vector<Parameter> parameters() { return {}; }
  [[nodiscard]] virtual std::unique_ptr<Layer> clone() const = 0;
};

using Rng = std::mt19937_64;

/// Uniform(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace sentcast::nn
