#include "sentcast/nn/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sentcast/error.hpp"
#include "sentcast/nn/kernels.hpp"

namespace sentcast::nn {

AdamState make_adam_state(std::span<const Parameter> params, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const auto& p : params) {
    state.m.emplace_back(p.value->shape());
    state.v.emplace_back(p.value->shape());
  }
  return state;
}

void adam_step(AdamState& state, std::span<const Parameter> params) {
  if (params.size() != state.m.size()) {
    throw ShapeError(fmt::format("Adam state tracks {} parameters, got {}", state.m.size(), params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = params[k];
    if (p.grad->size() != p.value->size() || state.m[k].size() != p.value->size()) {
      throw ShapeError(fmt::format("Adam: parameter '{}' shape changed", p.name));
    }
    const auto g = p.grad->values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw DivergenceError(fmt::format("non-finite gradient {} in parameter '{}' at index {} (step {})", g[i],
                                          p.name, i, state.step + 1));
      }
    }
  }
  ++state.step;
  const auto& cfg = state.config;
  const simd::AdamCoefficients coef{cfg.learning_rate,
                                    cfg.beta1,
                                    cfg.beta2,
                                    cfg.epsilon,
                                    1.0 - std::pow(cfg.beta1, static_cast<double>(state.step)),
                                    1.0 - std::pow(cfg.beta2, static_cast<double>(state.step))};
  const auto& kernels = simd::active_kernels();
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    kernels.adam_update(p.value->size(), p.value->data(), p.grad->data(), state.m[k].data(), state.v[k].data(),
                        coef);
  }
}

}  // namespace sentcast::nn
