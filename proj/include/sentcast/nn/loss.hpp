#pragma once

#include "sentcast/nn/tensor.hpp"

namespace sentcast::nn {

/// Mean over elements of (pred - target)^2.
double mse_loss(const Tensor& pred, const Tensor& target);
/// d mse_loss / d pred = 2 (pred - target) / n, shaped like `pred`.
Tensor mse_gradient(const Tensor& pred, const Tensor& target);

}  // namespace sentcast::nn
