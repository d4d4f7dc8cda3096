#include "sentcast/nn/network.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sentcast/error.hpp"
#include "sentcast/format.hpp"
#include "sentcast/nn/dense.hpp"
#include "sentcast/nn/dropout.hpp"
#include "sentcast/nn/loss.hpp"
#include "sentcast/nn/lstm.hpp"

namespace sentcast::nn {

Network::Network(const Network& other) : forward_done_(false) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

Tensor Network::forward(const Tensor& input, bool training) {
  Tensor x = input;
  for (auto& layer : layers_) x = layer->forward(x, training);
  forward_done_ = true;
  return x;
}

Tensor Network::backward(const Tensor& grad_output) {
  if (!forward_done_) throw std::logic_error("backward called before forward");
  Tensor g = grad_output;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  forward_done_ = false;
  return g;
}

double Network::loss_and_gradients(const Tensor& input, const Tensor& target, bool training) {
  zero_grad();
  const Tensor pred = forward(input, training);
  const double loss = mse_loss(pred, target);
  backward(mse_gradient(pred, target));
  return loss;
}

std::vector<Parameter> Network::parameters() {
  std::vector<Parameter> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto p : layers_[i]->parameters()) {
      p.name = fmt::format("{}.{}.{}", i, layers_[i]->kind(), p.name);
      out.push_back(std::move(p));
    }
  }
  return out;
}

void Network::zero_grad() {
  for (auto& p : parameters()) p.grad->fill(0.0);
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    for (const auto& p : layer->parameters()) n += p.value->size();
  }
  return n;
}

namespace {

using json = nlohmann::ordered_json;

json tensor_json(const Tensor& t) {
  json j;
  j["shape"] = t.shape();
  j["values"] = std::vector<double>(t.values().begin(), t.values().end());
  return j;
}

Tensor tensor_from(const json& j) {
  return Tensor(j.at("shape").get<std::vector<std::size_t>>(), j.at("values").get<std::vector<double>>());
}

}  // namespace

std::string serialize_checkpoint(const Network& net) {
  json doc;
  doc["format"] = "sentcast-checkpoint";
  doc["version"] = 1;
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    json l;
    l["type"] = std::string(layer->kind());
    if (const auto* d = dynamic_cast<const Dense*>(layer.get())) {
      l["activation"] = std::string(to_string(d->params().activation));
      l["weights"] = tensor_json(d->params().weights);
      l["bias"] = tensor_json(d->params().bias);
    } else if (const auto* r = dynamic_cast<const Lstm*>(layer.get())) {
      const auto& p = r->params();
      l["return_sequences"] = r->return_sequences();
      l["w_input"] = tensor_json(p.w_input);
      l["w_forget"] = tensor_json(p.w_forget);
      l["w_output"] = tensor_json(p.w_output);
      l["w_candidate"] = tensor_json(p.w_candidate);
      l["b_input"] = tensor_json(p.b_input);
      l["b_forget"] = tensor_json(p.b_forget);
      l["b_output"] = tensor_json(p.b_output);
      l["b_candidate"] = tensor_json(p.b_candidate);
    } else if (const auto* dr = dynamic_cast<const Dropout*>(layer.get())) {
      l["rate"] = dr->spec().rate;
    } else {
      throw std::logic_error(fmt::format("cannot checkpoint layer kind '{}'", layer->kind()));
    }
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);
  return doc.dump(1) + "\n";
}

Network parse_checkpoint(std::string_view text) {
  Network net;
  try {
    const auto doc = json::parse(text);
    if (doc.at("format") != "sentcast-checkpoint" || doc.at("version") != 1) {
      throw DataError("not a sentcast checkpoint (format/version mismatch)");
    }
    std::uint64_t dropout_seed = 0;
    for (const auto& l : doc.at("layers")) {
      const auto type = l.at("type").get<std::string>();
      if (type == "dense") {
        net.add(std::make_unique<Dense>(DenseParams{tensor_from(l.at("weights")), tensor_from(l.at("bias")),
                                                    parse_activation(l.at("activation").get<std::string>())}));
      } else if (type == "lstm") {
        LstmCellParams p{tensor_from(l.at("w_input")),  tensor_from(l.at("w_forget")),
                         tensor_from(l.at("w_output")), tensor_from(l.at("w_candidate")),
                         tensor_from(l.at("b_input")),  tensor_from(l.at("b_forget")),
                         tensor_from(l.at("b_output")), tensor_from(l.at("b_candidate"))};
        net.add(std::make_unique<Lstm>(std::move(p), l.at("return_sequences").get<bool>()));
      } else if (type == "dropout") {
        net.add(std::make_unique<Dropout>(DropoutSpec{l.at("rate").get<double>()}, dropout_seed++));
      } else {
        throw DataError(fmt::format("unknown layer type '{}' in checkpoint", type));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("malformed checkpoint: {}", e.what()));
  } catch (const ShapeError& e) {
    throw DataError(fmt::format("malformed checkpoint: {}", e.what()));
  }
  return net;
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(net));
}

Network load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

}  // namespace sentcast::nn
