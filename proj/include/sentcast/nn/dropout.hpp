#pragma once

#include <cstdint>

#include "sentcast/nn/layer.hpp"

namespace sentcast::nn {

struct DropoutSpec {
  double rate = 0.0;  // in [0, 1)
};

/// Inverted dropout: during training each element is zeroed with probability
/// `rate` and survivors are scaled by 1 / (1 - rate). Identity at inference.
Tensor dropout_forward(const DropoutSpec& spec, const Tensor& x, bool training, std::uint64_t rng_seed);

class Dropout final : public Layer {
 public:
  Dropout(DropoutSpec spec, std::uint64_t seed);

  [[nodiscard]] std::string_view kind() const override { return "dropout"; }
  Tensor forward(const Tensor& input, bool training) override;
  Tensor backward(const Tensor& grad_output) override;
  [[nodiscard]] std::unique_ptr<Layer> clone() const override;

  [[nodiscard]] const DropoutSpec& spec() const { return spec_; }
  /// Reuse the current mask on later training passes instead of drawing a new
  /// one. Gradient checks need a fixed function to differentiate.
  void freeze_mask(bool frozen) { frozen_ = frozen; }

 private:
  DropoutSpec spec_;
  Rng rng_;
  std::vector<double> mask_;  // already scaled by 1 / (1 - rate)
  bool frozen_ = false;
  bool training_pass_ = false;
};

}  // namespace sentcast::nn
