#include "sentcast/nn/loss.hpp"

#include <fmt/format.h>

#include "sentcast/error.hpp"

namespace sentcast::nn {

namespace {

void check(const Tensor& pred, const Tensor& target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw ShapeError(fmt::format("MSE needs equal non-empty shapes, got {} and {}", pred.shape_string(),
                                 target.shape_string()));
  }
}

}  // namespace

double mse_loss(const Tensor& pred, const Tensor& target) {
  check(pred, target);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

Tensor mse_gradient(const Tensor& pred, const Tensor& target) {
  check(pred, target);
  Tensor g(pred.shape());
  const double scale = 2.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = scale * (pred[i] - target[i]);
  return g;
}

}  // namespace sentcast::nn
