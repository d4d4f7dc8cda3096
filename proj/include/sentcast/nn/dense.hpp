#pragma once

#include <string_view>

#include "sentcast/nn/layer.hpp"

namespace sentcast::nn {

enum class Activation { relu, tanh, linear };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

struct DenseParams {
  Tensor weights;  // [in x out]
  Tensor bias;     // [out]
  Activation activation = Activation::linear;

  [[nodiscard]] std::size_t inputs() const { return weights.dim(0); }
  [[nodiscard]] std::size_t outputs() const { return weights.dim(1); }
};

/// activation(x * W + b) for x of shape [in] or [batch x in].
Tensor dense_forward(const DenseParams& layer, const Tensor& x);

class Dense final : public Layer {
 public:
  Dense(std::size_t inputs, std::size_t outputs, Activation activation, Rng& rng);
  explicit Dense(DenseParams params);

  [[nodiscard]] std::string_view kind() const override { return "dense"; }
  Tensor forward(const Tensor& input, bool training) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Parameter> parameters() override;
  [[nodiscard]] std::unique_ptr<Layer> clone() const override;

  [[nodiscard]] const DenseParams& params() const { return params_; }

 private:
  DenseParams params_;
  Tensor grad_weights_;
  Tensor grad_bias_;
  Tensor input_;
  Tensor output_;
  bool cached_ = false;
  bool rank1_ = false;
};

}  // namespace sentcast::nn
