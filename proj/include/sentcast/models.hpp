#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentcast/nn/network.hpp"
#include "sentcast/preprocess.hpp"

namespace sentcast {

enum class ModelKind { mlp, lstm, finbert_lstm };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Architecture description. `layer_sizes` lists the three hidden widths and
/// the 1-unit head; `dropout_rates` is empty or holds one rate per hidden layer.
struct ModelSpec {
  ModelKind kind = ModelKind::mlp;
  std::vector<std::size_t> layer_sizes;
  std::vector<double> dropout_rates;
  double learning_rate = 0.01;
  std::size_t input_features = kDefaultWindow;

  /// The published configuration for `kind`:
  ///   mlp          dense 50-30-20-1 (relu), dropout 0.1/0.05/0.01, lr 0.01, 10 inputs
  ///   lstm         LSTM 50-30-20, dense 1, dropout 0.1/0.05/0.01, lr 0.02, 10 steps
  ///   finbert_lstm LSTM 70-30-10, dense 1, no dropout, lr 0.02, 11 steps
  /// A different `window` changes only the input length.
  static ModelSpec reference(ModelKind kind, std::size_t window = kDefaultWindow);

  /// Price-window length (finbert_lstm spends one input on sentiment).
  [[nodiscard]] std::size_t window() const;
  [[nodiscard]] bool uses_sentiment() const { return kind == ModelKind::finbert_lstm; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Checks internal consistency (positive widths, 1-unit head, dropout count,
/// learning rate). Throws ConfigError.
void validate_structure(const ModelSpec& spec);
/// Additionally requires `spec == ModelSpec::reference(spec.kind, spec.window())`.
void validate_reference(const ModelSpec& spec);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::optional<std::size_t> early_stop_patience;
  bool shuffle = true;
};

struct Model {
  ModelSpec spec;
  nn::Network network;
};

/// Builds an untrained network. Same (spec, seed) gives identical weights.
///   mlp:  dense(relu) -> dropout, x3, then dense(1, linear)
///   lstm: LSTM(seq) -> [dropout] -> LSTM(seq) -> [dropout] -> LSTM(last) -> [dropout] -> dense(1, linear)
Model build(const ModelSpec& spec, std::uint64_t seed);

struct TrainedModel {
  ModelSpec spec;
  nn::Network network;
  Scaler scaler;
  std::vector<double> loss_history;  // mean train MSE per epoch (normalized units)
  TrainConfig config;
};

/// Mini-batch Adam on `data.train`. Throws DivergenceError naming the epoch
/// when the loss or a gradient goes non-finite.
TrainedModel train(Model model, const SplitDataset& data, const TrainConfig& cfg);

struct Prediction {
  Date target_date;
  double price = 0.0;
};

/// Inference-mode forward pass, denormalized with the model's scaler.
std::vector<Prediction> predict(const TrainedModel& model, const WindowedDataset& dataset,
                                std::size_t batch_size = 256);

/// Packs samples into the network input layout: [batch x features] for mlp,
/// [batch x features x 1] for the recurrent models.
nn::Tensor pack_inputs(const ModelSpec& spec, std::span<const Sample> samples);
nn::Tensor pack_targets(std::span<const Sample> samples);

}  // namespace sentcast
