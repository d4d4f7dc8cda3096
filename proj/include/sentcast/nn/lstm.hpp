#pragma once

#include "sentcast/nn/layer.hpp"

namespace sentcast::nn {

/// Gate weights act on the concatenation [h_{t-1}, x_t]: the first `hidden`
/// rows multiply the previous hidden state, the remaining rows the input.
struct LstmCellParams {
  Tensor w_input, w_forget, w_output, w_candidate;  // [(hidden + input) x hidden]
  Tensor b_input, b_forget, b_output, b_candidate;  // [hidden]

  [[nodiscard]] std::size_t hidden() const { return w_input.dim(1); }
  [[nodiscard]] std::size_t input_size() const { return w_input.dim(0) - w_input.dim(1); }
  /// Throws ShapeError unless all four gates agree.
  void validate() const;
};

struct LstmState {
  Tensor h;  // [hidden]
  Tensor c;  // [hidden]

  static LstmState zeros(std::size_t hidden);
};

/// One time step for a single sample:
///   i = sigma(W_i z + b_i), f = sigma(W_f z + b_f), o = sigma(W_o z + b_o),
///   g = tanh(W_c z + b_c), c' = f*c + i*g, h' = o*tanh(c')  with z = [h, x].
LstmState lstm_cell_step(const LstmCellParams& p, const LstmState& prev, const Tensor& x_t);

/// Runs the cell over `sequence` ([T x features], zero initial state).
/// Returns [T x hidden] when `return_sequences`, else the final h ([hidden]).
Tensor lstm_layer_forward(const LstmCellParams& p, const Tensor& sequence, bool return_sequences);

/// Batched LSTM layer over [batch x T x features] (or [T x features]) with
/// full backpropagation through time.
class Lstm final : public Layer {
 public:
  /// Glorot-uniform gate weights, zero biases except the forget bias (1.0).
  Lstm(std::size_t inputs, std::size_t hidden, bool return_sequences, Rng& rng);
  Lstm(LstmCellParams params, bool return_sequences);

  [[nodiscard]] std::string_view kind() const override { return "lstm"; }
  Tensor forward(const Tensor& input, bool training) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Parameter> parameters() override;
  [[nodiscard]] std::unique_ptr<Layer> clone() const override;

  [[nodiscard]] const LstmCellParams& params() const { return params_; }
  [[nodiscard]] bool return_sequences() const { return return_sequences_; }

  /// Per-step activations for a batch; one entry per time step.
  struct StepCache {
    std::vector<double> z;       // [B x (H + F)]
    std::vector<double> i, f, o, g;
    std::vector<double> c;       // c_t
    std::vector<double> tanh_c;
    std::vector<double> h;       // h_t
  };

 private:
  LstmCellParams params_;
  LstmCellParams grads_;
  bool return_sequences_ = false;
  std::vector<StepCache> steps_;
  std::size_t batch_ = 0;
  bool rank2_input_ = false;
  bool cached_ = false;
};

}  // namespace sentcast::nn
