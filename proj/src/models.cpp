#include "sentcast/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "sentcast/error.hpp"
#include "sentcast/nn/adam.hpp"
#include "sentcast/nn/dense.hpp"
#include "sentcast/nn/dropout.hpp"
#include "sentcast/nn/lstm.hpp"

namespace sentcast {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::lstm: return "lstm";
    case ModelKind::finbert_lstm: return "finbert_lstm";
  }
  return "mlp";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "mlp") return ModelKind::mlp;
  if (text == "lstm") return ModelKind::lstm;
  if (text == "finbert_lstm") return ModelKind::finbert_lstm;
  throw ConfigError(fmt::format("unknown model kind '{}' (expected mlp, lstm or finbert_lstm)", text));
}

ModelSpec ModelSpec::reference(ModelKind kind, std::size_t window) {
  switch (kind) {
    case ModelKind::mlp: return {kind, {50, 30, 20, 1}, {0.1, 0.05, 0.01}, 0.01, window};
    case ModelKind::lstm: return {kind, {50, 30, 20, 1}, {0.1, 0.05, 0.01}, 0.02, window};
    case ModelKind::finbert_lstm: return {kind, {70, 30, 10, 1}, {}, 0.02, window + 1};
  }
  throw ConfigError("unknown model kind");
}

std::size_t ModelSpec::window() const { return uses_sentiment() ? input_features - 1 : input_features; }

void validate_structure(const ModelSpec& spec) {
  const auto name = to_string(spec.kind);
  if (spec.layer_sizes.size() < 2) throw ConfigError(fmt::format("{}: need hidden layers plus a head", name));
  if (spec.layer_sizes.back() != 1) throw ConfigError(fmt::format("{}: output layer must have 1 unit", name));
  if (std::find(spec.layer_sizes.begin(), spec.layer_sizes.end(), 0U) != spec.layer_sizes.end()) {
    throw ConfigError(fmt::format("{}: layer widths must be positive", name));
  }
  const std::size_t hidden = spec.layer_sizes.size() - 1;
  if (!spec.dropout_rates.empty() && spec.dropout_rates.size() != hidden) {
    throw ConfigError(fmt::format("{}: {} dropout rates for {} hidden layers", name, spec.dropout_rates.size(), hidden));
  }
  for (double r : spec.dropout_rates) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError(fmt::format("{}: dropout rate {} outside [0, 1)", name, r));
  }
  if (!(spec.learning_rate > 0.0) || !std::isfinite(spec.learning_rate)) {
    throw ConfigError(fmt::format("{}: learning rate must be positive", name));
  }
  const std::size_t min_inputs = spec.uses_sentiment() ? 2 : 1;
  if (spec.input_features < min_inputs) throw ConfigError(fmt::format("{}: too few input features", name));
}

void validate_reference(const ModelSpec& spec) {
  validate_structure(spec);
  if (!(spec == ModelSpec::reference(spec.kind, spec.window()))) {
    throw ConfigError(fmt::format("{}: spec differs from the reference architecture", to_string(spec.kind)));
  }
}

Model build(const ModelSpec& spec, std::uint64_t seed) {
  validate_structure(spec);
  nn::Rng rng(seed);
  nn::Network net;
  const std::size_t hidden = spec.layer_sizes.size() - 1;
  std::size_t width = spec.kind == ModelKind::mlp ? spec.input_features : 1;
  for (std::size_t l = 0; l < hidden; ++l) {
    const std::size_t units = spec.layer_sizes[l];
    if (spec.kind == ModelKind::mlp) {
      net.add(std::make_unique<nn::Dense>(width, units, nn::Activation::relu, rng));
    } else {
      net.add(std::make_unique<nn::Lstm>(width, units, l + 1 < hidden, rng));
    }
    if (!spec.dropout_rates.empty()) {
      net.add(std::make_unique<nn::Dropout>(nn::DropoutSpec{spec.dropout_rates[l]}, rng()));
    }
    width = units;
  }
  net.add(std::make_unique<nn::Dense>(width, 1, nn::Activation::linear, rng));
  return Model{spec, std::move(net)};
}

nn::Tensor pack_inputs(const ModelSpec& spec, std::span<const Sample> samples) {
  const std::size_t f = spec.input_features;
  std::vector<double> values;
  values.reserve(samples.size() * f);
  for (const auto& s : samples) {
    if (s.features.size() != f) {
      throw DataError(fmt::format("{} expects {} features, sample for {} has {}", to_string(spec.kind), f,
                                  s.target_date.iso(), s.features.size()));
    }
    values.insert(values.end(), s.features.begin(), s.features.end());
  }
  if (spec.kind == ModelKind::mlp) return nn::Tensor({samples.size(), f}, std::move(values));
  return nn::Tensor({samples.size(), f, 1}, std::move(values));
}

nn::Tensor pack_targets(std::span<const Sample> samples) {
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.target);
  return nn::Tensor({samples.size(), 1}, std::move(values));
}

TrainedModel train(Model model, const SplitDataset& data, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (data.train.empty()) throw DataError("training partition is empty");
  if (data.train.feature_count != model.spec.input_features) {
    throw DataError(fmt::format("{} expects {} features, dataset has {}", to_string(model.spec.kind),
                                model.spec.input_features, data.train.feature_count));
  }

  TrainedModel out{model.spec, std::move(model.network), data.train.scaler, {}, cfg};
  auto params = out.network.parameters();
  auto adam = nn::make_adam_state(params, nn::AdamConfig{.learning_rate = out.spec.learning_rate});

  const auto& samples = data.train.samples;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x5EED5EED5EED5EEDULL);
  std::vector<Sample> batch;

  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(samples[order[k]]);
      const double loss =
          out.network.loss_and_gradients(pack_inputs(out.spec, batch), pack_targets(batch), true);
      if (!std::isfinite(loss)) {
        throw DivergenceError(fmt::format("{}: non-finite loss in epoch {}", to_string(out.spec.kind), epoch + 1));
      }
      try {
        nn::adam_step(adam, params);
      } catch (const DivergenceError& e) {
        throw DivergenceError(fmt::format("{}: epoch {}: {}", to_string(out.spec.kind), epoch + 1, e.what()));
      }
      weighted += loss * static_cast<double>(end - start);
    }
    const double epoch_loss = weighted / static_cast<double>(order.size());
    out.loss_history.push_back(epoch_loss);
    if (cfg.early_stop_patience) {
      if (epoch_loss < best) {
        best = epoch_loss;
        since_best = 0;
      } else if (++since_best >= *cfg.early_stop_patience) {
        break;
      }
    }
  }
  return out;
}

std::vector<Prediction> predict(const TrainedModel& model, const WindowedDataset& dataset, std::size_t batch_size) {
  if (dataset.feature_count != model.spec.input_features) {
    throw DataError(fmt::format("{} expects {} features, dataset has {}", to_string(model.spec.kind),
                                model.spec.input_features, dataset.feature_count));
  }
  batch_size = std::max<std::size_t>(batch_size, 1);
  nn::Network net = model.network;
  std::vector<Prediction> out;
  out.reserve(dataset.size());
  const std::span<const Sample> all(dataset.samples);
  for (std::size_t start = 0; start < all.size(); start += batch_size) {
    const auto chunk = all.subspan(start, std::min(batch_size, all.size() - start));
    const nn::Tensor y = net.forward(pack_inputs(model.spec, chunk), false);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      out.push_back(Prediction{chunk[i].target_date, model.scaler.denormalize(y[i])});
    }
  }
  return out;
}

}  // namespace sentcast
