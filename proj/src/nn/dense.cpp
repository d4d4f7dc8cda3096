#include "sentcast/nn/dense.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sentcast/error.hpp"
#include "sentcast/nn/kernels.hpp"

namespace sentcast::nn {

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.values()) v = dist(rng);
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "linear";
}

Activation parse_activation(std::string_view text) {
  if (text == "relu") return Activation::relu;
  if (text == "tanh") return Activation::tanh;
  if (text == "linear") return Activation::linear;
  throw DataError(fmt::format("unknown activation '{}'", text));
}

namespace {

void apply_activation(Activation a, std::span<double> v) {
  switch (a) {
    case Activation::relu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::tanh:
      for (double& x : v) x = std::tanh(x);
      break;
    case Activation::linear:
      break;
  }
}

// Returns [batch x in] view information; rank-1 input is a batch of one.
std::size_t batch_of(const DenseParams& p, const Tensor& x) {
  if (x.rank() == 1 && x.dim(0) == p.inputs()) return 1;
  if (x.rank() == 2 && x.dim(1) == p.inputs()) return x.dim(0);
  throw ShapeError(fmt::format("dense layer expects [{}] or [batch x {}], got {}", p.inputs(), p.inputs(),
                               x.shape_string()));
}

void check_params(const DenseParams& p) {
  if (p.weights.rank() != 2 || p.bias.rank() != 1 || p.bias.dim(0) != p.weights.dim(1)) {
    throw ShapeError(fmt::format("dense weights {} and bias {} disagree", p.weights.shape_string(),
                                 p.bias.shape_string()));
  }
}

}  // namespace

Tensor dense_forward(const DenseParams& layer, const Tensor& x) {
  check_params(layer);
  const std::size_t batch = batch_of(layer, x);
  const std::size_t out_n = layer.outputs();
  Tensor y = x.rank() == 1 ? Tensor({out_n}) : Tensor({batch, out_n});
  auto yv = y.values();
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t j = 0; j < out_n; ++j) yv[r * out_n + j] = layer.bias[j];
  }
  simd::gemm_nn(batch, layer.inputs(), out_n, x.values(), layer.weights.values(), yv, true);
  apply_activation(layer.activation, yv);
  return y;
}

Dense::Dense(std::size_t inputs, std::size_t outputs, Activation activation, Rng& rng)
    : params_{Tensor({inputs, outputs}), Tensor({outputs}), activation},
      grad_weights_({inputs, outputs}),
      grad_bias_({outputs}) {
  glorot_uniform(params_.weights, inputs, outputs, rng);
}

Dense::Dense(DenseParams params)
    : params_(std::move(params)),
      grad_weights_(params_.weights.shape()),
      grad_bias_(params_.bias.shape()) {
  check_params(params_);
}

Tensor Dense::forward(const Tensor& input, bool /*training*/) {
  Tensor out = dense_forward(params_, input);
  rank1_ = input.rank() == 1;
  input_ = input;
  output_ = out;
  cached_ = true;
  return out;
}

Tensor Dense::backward(const Tensor& grad_output) {
  if (!cached_) throw std::logic_error("dense backward called before forward");
  if (grad_output.size() != output_.size()) {
    throw ShapeError(fmt::format("dense backward got {} for output {}", grad_output.shape_string(),
                                 output_.shape_string()));
  }
  const std::size_t in_n = params_.inputs();
  const std::size_t out_n = params_.outputs();
  const std::size_t batch = output_.size() / out_n;

  std::vector<double> dz(grad_output.values().begin(), grad_output.values().end());
  const auto y = output_.values();
  switch (params_.activation) {
    case Activation::relu:
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = y[i] > 0.0 ? dz[i] : 0.0;
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= 1.0 - y[i] * y[i];
      break;
    case Activation::linear:
      break;
  }

  simd::gemm_tn(batch, in_n, out_n, input_.values(), dz, grad_weights_.values(), true);
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t j = 0; j < out_n; ++j) grad_bias_[j] += dz[r * out_n + j];
  }
  Tensor dx = rank1_ ? Tensor({in_n}) : Tensor({batch, in_n});
  simd::gemm_nt(batch, out_n, in_n, dz, params_.weights.values(), dx.values(), false);
  return dx;
}

std::vector<Parameter> Dense::parameters() {
  return {{"weights", &params_.weights, &grad_weights_}, {"bias", &params_.bias, &grad_bias_}};
}

std::unique_ptr<Layer> Dense::clone() const { return std::make_unique<Dense>(*this); }

}  // namespace sentcast::nn
