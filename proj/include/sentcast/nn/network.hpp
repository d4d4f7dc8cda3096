#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentcast/nn/layer.hpp"

namespace sentcast::nn {

/// Sequential stack of layers.
class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;
  ~Network() = default;

  void add(std::unique_ptr<Layer> layer);

  Tensor forward(const Tensor& input, bool training);
  /// Backpropagates `grad_output` through every layer, accumulating parameter
  /// gradients. Throws std::logic_error unless a forward pass came first.
  Tensor backward(const Tensor& grad_output);

  /// zero_grad + forward + MSE + backward; returns the batch loss.
  double loss_and_gradients(const Tensor& input, const Tensor& target, bool training);

  std::vector<Parameter> parameters();
  void zero_grad();
  [[nodiscard]] std::size_t parameter_count() const;

  [[nodiscard]] std::span<const std::unique_ptr<Layer>> layers() const { return layers_; }
  [[nodiscard]] std::span<std::unique_ptr<Layer>> layers() { return layers_; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  bool forward_done_ = false;
};

/// JSON checkpoint: layer list with configuration, shapes and values. Doubles
/// are written in round-trip form, so a reload predicts bit-identically.
std::string serialize_checkpoint(const Network& net);
Network parse_checkpoint(std::string_view text);
void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace sentcast::nn
