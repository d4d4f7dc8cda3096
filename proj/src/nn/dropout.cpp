#include "sentcast/nn/dropout.hpp"

#include <fmt/format.h>

#include "sentcast/error.hpp"

namespace sentcast::nn {

namespace {

void check_rate(const DropoutSpec& spec) {
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
    throw std::invalid_argument(fmt::format("dropout rate {} outside [0, 1)", spec.rate));
  }
}

void draw_mask(const DropoutSpec& spec, std::size_t n, Rng& rng, std::vector<double>& mask) {
  const double keep_scale = 1.0 / (1.0 - spec.rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  mask.resize(n);
  for (double& m : mask) m = unit(rng) < spec.rate ? 0.0 : keep_scale;
}

}  // namespace

Tensor dropout_forward(const DropoutSpec& spec, const Tensor& x, bool training, std::uint64_t rng_seed) {
  check_rate(spec);
  if (!training || spec.rate == 0.0) return x;
  Rng rng(rng_seed);
  std::vector<double> mask;
  draw_mask(spec, x.size(), rng, mask);
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  return y;
}

Dropout::Dropout(DropoutSpec spec, std::uint64_t seed) : spec_(spec), rng_(seed) { check_rate(spec_); }

Tensor Dropout::forward(const Tensor& input, bool training) {
  training_pass_ = training && spec_.rate > 0.0;
  if (!training_pass_) return input;
  if (!frozen_ || mask_.size() != input.size()) draw_mask(spec_, input.size(), rng_, mask_);
  Tensor y = input;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask_[i];
  return y;
}

Tensor Dropout::backward(const Tensor& grad_output) {
  if (!training_pass_) return grad_output;
  if (grad_output.size() != mask_.size()) {
    throw ShapeError(fmt::format("dropout backward got {} values for a mask of {}", grad_output.size(), mask_.size()));
  }
  Tensor dx = grad_output;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask_[i];
  return dx;
}

std::unique_ptr<Layer> Dropout::clone() const { return std::make_unique<Dropout>(*this); }

}  // namespace sentcast::nn
