#include "sentcast/nn/lstm.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "sentcast/error.hpp"
#include "sentcast/nn/kernels.hpp"

namespace sentcast::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

enum Gate { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

std::array<const Tensor*, 4> weights_of(const LstmCellParams& p) {
  return {&p.w_input, &p.w_forget, &p.w_output, &p.w_candidate};
}
std::array<const Tensor*, 4> biases_of(const LstmCellParams& p) {
  return {&p.b_input, &p.b_forget, &p.b_output, &p.b_candidate};
}
std::array<Tensor*, 4> weights_of(LstmCellParams& p) {
  return {&p.w_input, &p.w_forget, &p.w_output, &p.w_candidate};
}
std::array<Tensor*, 4> biases_of(LstmCellParams& p) {
  return {&p.b_input, &p.b_forget, &p.b_output, &p.b_candidate};
}

LstmCellParams zeros_like(std::size_t inputs, std::size_t hidden) {
  const std::size_t rows = inputs + hidden;
  return LstmCellParams{Tensor({rows, hidden}), Tensor({rows, hidden}), Tensor({rows, hidden}),
                        Tensor({rows, hidden}), Tensor({hidden}),       Tensor({hidden}),
                        Tensor({hidden}),       Tensor({hidden})};
}

// Advances a batch by one step. `h_prev`/`c_prev` may be null for a zero state.
void step_forward(const LstmCellParams& p, std::size_t batch, const double* h_prev, const double* c_prev,
                  const double* x, Lstm::StepCache& s) {
  const std::size_t hidden = p.hidden();
  const std::size_t inputs = p.input_size();
  const std::size_t width = hidden + inputs;

  s.z.assign(batch * width, 0.0);
  for (std::size_t r = 0; r < batch; ++r) {
    double* zr = s.z.data() + r * width;
    if (h_prev != nullptr) {
      for (std::size_t j = 0; j < hidden; ++j) zr[j] = h_prev[r * hidden + j];
    }
    for (std::size_t j = 0; j < inputs; ++j) zr[hidden + j] = x[r * inputs + j];
  }

  const auto weights = weights_of(p);
  const auto biases = biases_of(p);
  std::array<std::vector<double>*, 4> out = {&s.i, &s.f, &s.o, &s.g};
  for (int gate = 0; gate < 4; ++gate) {
    auto& buf = *out[gate];
    buf.resize(batch * hidden);
    const auto b = biases[gate]->values();
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < hidden; ++j) buf[r * hidden + j] = b[j];
    }
    simd::gemm_nn(batch, width, hidden, s.z, weights[gate]->values(), buf, true);
    if (gate == kCandidate) {
      for (double& v : buf) v = std::tanh(v);
    } else {
      for (double& v : buf) v = sigmoid(v);
    }
  }

  const std::size_t n = batch * hidden;
  s.c.resize(n);
  s.tanh_c.resize(n);
  s.h.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = c_prev != nullptr ? c_prev[k] : 0.0;
    s.c[k] = s.f[k] * prev + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
}

}  // namespace

void LstmCellParams::validate() const {
  const auto w = weights_of(*this);
  const auto b = biases_of(*this);
  for (int g = 0; g < 4; ++g) {
    if (w[g]->rank() != 2 || w[g]->shape() != w_input.shape()) {
      throw ShapeError(fmt::format("LSTM gate weight shapes disagree: {} vs {}", w[g]->shape_string(),
                                   w_input.shape_string()));
    }
    if (b[g]->rank() != 1 || b[g]->dim(0) != w_input.dim(1)) {
      throw ShapeError(fmt::format("LSTM gate bias {} does not match hidden size {}", b[g]->shape_string(),
                                   w_input.dim(1)));
    }
  }
  if (w_input.dim(0) <= w_input.dim(1)) {
    throw ShapeError("LSTM gate weights need (hidden + input) rows with input >= 1");
  }
}

LstmState LstmState::zeros(std::size_t hidden) { return {Tensor({hidden}), Tensor({hidden})}; }

LstmState lstm_cell_step(const LstmCellParams& p, const LstmState& prev, const Tensor& x_t) {
  p.validate();
  const std::size_t hidden = p.hidden();
  if (prev.h.size() != hidden || prev.c.size() != hidden) {
    throw ShapeError(fmt::format("LSTM state {} / {} does not match hidden size {}", prev.h.shape_string(),
                                 prev.c.shape_string(), hidden));
  }
  if (x_t.size() != p.input_size()) {
    throw ShapeError(fmt::format("LSTM input {} does not match input size {}", x_t.shape_string(), p.input_size()));
  }
  Lstm::StepCache s;
  step_forward(p, 1, prev.h.data(), prev.c.data(), x_t.data(), s);
  return {Tensor({hidden}, std::move(s.h)), Tensor({hidden}, std::move(s.c))};
}

Tensor lstm_layer_forward(const LstmCellParams& p, const Tensor& sequence, bool return_sequences) {
  Lstm layer(p, return_sequences);
  return layer.forward(sequence, false);
}

Lstm::Lstm(std::size_t inputs, std::size_t hidden, bool return_sequences, Rng& rng)
    : params_(zeros_like(inputs, hidden)), grads_(zeros_like(inputs, hidden)), return_sequences_(return_sequences) {
  for (Tensor* w : weights_of(params_)) glorot_uniform(*w, inputs + hidden, hidden, rng);
  params_.b_forget.fill(1.0);
}

Lstm::Lstm(LstmCellParams params, bool return_sequences)
    : params_(std::move(params)), return_sequences_(return_sequences) {
  params_.validate();
  grads_ = zeros_like(params_.input_size(), params_.hidden());
}

Tensor Lstm::forward(const Tensor& input, bool /*training*/) {
  const std::size_t hidden = params_.hidden();
  const std::size_t inputs = params_.input_size();
  std::size_t batch = 0;
  std::size_t steps = 0;
  if (input.rank() == 2 && input.dim(1) == inputs) {
    batch = 1;
    steps = input.dim(0);
    rank2_input_ = true;
  } else if (input.rank() == 3 && input.dim(2) == inputs) {
    batch = input.dim(0);
    steps = input.dim(1);
    rank2_input_ = false;
  } else {
    throw ShapeError(fmt::format("LSTM layer expects [T x {}] or [batch x T x {}], got {}", inputs, inputs,
                                 input.shape_string()));
  }
  if (steps == 0) throw ShapeError("LSTM sequence must have at least one step");
  batch_ = batch;
  steps_.resize(steps);

  std::vector<double> x_t(batch * inputs);
  const auto in = input.values();
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < inputs; ++j) x_t[r * inputs + j] = in[(r * steps + t) * inputs + j];
    }
    const double* h_prev = t == 0 ? nullptr : steps_[t - 1].h.data();
    const double* c_prev = t == 0 ? nullptr : steps_[t - 1].c.data();
    step_forward(params_, batch, h_prev, c_prev, x_t.data(), steps_[t]);
  }
  cached_ = true;

  if (return_sequences_) {
    Tensor out = rank2_input_ ? Tensor({steps, hidden}) : Tensor({batch, steps, hidden});
    auto ov = out.values();
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t j = 0; j < hidden; ++j) ov[(r * steps + t) * hidden + j] = steps_[t].h[r * hidden + j];
      }
    }
    return out;
  }
  Tensor out = rank2_input_ ? Tensor({hidden}) : Tensor({batch, hidden});
  std::copy(steps_.back().h.begin(), steps_.back().h.end(), out.values().begin());
  return out;
}

Tensor Lstm::backward(const Tensor& grad_output) {
  if (!cached_) throw std::logic_error("LSTM backward called before forward");
  const std::size_t hidden = params_.hidden();
  const std::size_t inputs = params_.input_size();
  const std::size_t width = hidden + inputs;
  const std::size_t batch = batch_;
  const std::size_t steps = steps_.size();
  const std::size_t expected = return_sequences_ ? batch * steps * hidden : batch * hidden;
  if (grad_output.size() != expected) {
    throw ShapeError(fmt::format("LSTM backward got {} values, expected {}", grad_output.size(), expected));
  }
  const auto gout = grad_output.values();

  const auto weights = weights_of(params_);
  const auto grad_w = weights_of(grads_);
  const auto grad_b = biases_of(grads_);

  const std::size_t n = batch * hidden;
  std::vector<double> dh_next(n, 0.0);
  std::vector<double> dc_next(n, 0.0);
  std::array<std::vector<double>, 4> dgate;
  for (auto& d : dgate) d.resize(n);
  std::vector<double> dz(batch * width);

  Tensor dx = rank2_input_ ? Tensor({steps, inputs}) : Tensor({batch, steps, inputs});
  auto dxv = dx.values();

  for (std::size_t t = steps; t-- > 0;) {
    const StepCache& s = steps_[t];
    const double* c_prev = t == 0 ? nullptr : steps_[t - 1].c.data();
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < hidden; ++j) {
        const std::size_t k = r * hidden + j;
        double dh = dh_next[k];
        if (return_sequences_) {
          dh += gout[(r * steps + t) * hidden + j];
        } else if (t + 1 == steps) {
          dh += gout[k];
        }
        const double d_o = dh * s.tanh_c[k];
        const double dc = dc_next[k] + dh * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
        const double d_i = dc * s.g[k];
        const double d_g = dc * s.i[k];
        const double d_f = c_prev != nullptr ? dc * c_prev[k] : 0.0;
        dc_next[k] = dc * s.f[k];
        dgate[kInput][k] = d_i * s.i[k] * (1.0 - s.i[k]);
        dgate[kForget][k] = d_f * s.f[k] * (1.0 - s.f[k]);
        dgate[kOutput][k] = d_o * s.o[k] * (1.0 - s.o[k]);
        dgate[kCandidate][k] = d_g * (1.0 - s.g[k] * s.g[k]);
      }
    }
    for (int gate = 0; gate < 4; ++gate) {
      simd::gemm_tn(batch, width, hidden, s.z, dgate[gate], grad_w[gate]->values(), true);
      auto gb = grad_b[gate]->values();
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t j = 0; j < hidden; ++j) gb[j] += dgate[gate][r * hidden + j];
      }
      simd::gemm_nt(batch, hidden, width, dgate[gate], weights[gate]->values(), dz, gate > 0);
    }
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < hidden; ++j) dh_next[r * hidden + j] = dz[r * width + j];
      for (std::size_t j = 0; j < inputs; ++j) dxv[(r * steps + t) * inputs + j] = dz[r * width + hidden + j];
    }
  }
  return dx;
}

std::vector<Parameter> Lstm::parameters() {
  return {{"w_input", &params_.w_input, &grads_.w_input},
          {"w_forget", &params_.w_forget, &grads_.w_forget},
          {"w_output", &params_.w_output, &grads_.w_output},
          {"w_candidate", &params_.w_candidate, &grads_.w_candidate},
          {"b_input", &params_.b_input, &grads_.b_input},
          {"b_forget", &params_.b_forget, &grads_.b_forget},
          {"b_output", &params_.b_output, &grads_.b_output},
          {"b_candidate", &params_.b_candidate, &grads_.b_candidate}};
}

std::unique_ptr<Layer> Lstm::clone() const { return std::make_unique<Lstm>(*this); }

}  // namespace sentcast::nn
