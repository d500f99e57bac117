#include "stua/nn.hpp"

#include "stua/errors.hpp"

#include <cmath>

namespace stua::nn {

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

LstmLayer make_lstm_layer(Eigen::Index input, Eigen::Index hidden, Rng& rng) {
  LstmLayer layer;
  layer.input_weights = glorot_uniform(input, 4 * hidden, rng);
  layer.recurrent_weights = glorot_uniform(hidden, 4 * hidden, rng);
  layer.bias = Matrix::Zero(1, 4 * hidden);
  layer.bias.middleCols(hidden, hidden).setConstant(1.0);
  return layer;
}

ad::Var run_lstm(ad::Tape& tape, std::span<const LstmLayer> layers, std::span<const ad::Var> steps) {
  if (layers.empty() || steps.empty()) fail(ErrorKind::DimensionMismatch, "run_lstm: empty layers or sequence");
  const Eigen::Index batch = tape.value(steps.front()).rows();

  std::vector<ad::Var> sequence(steps.begin(), steps.end());
  ad::Var top;
  for (const LstmLayer& layer : layers) {
    const Eigen::Index h = layer.hidden();
    ad::Var wx = tape.param(layer.input_weights);
    ad::Var wh = tape.param(layer.recurrent_weights);
    ad::Var b = tape.param(layer.bias);
    ad::Var hidden = tape.constant(Matrix::Zero(batch, h));
    ad::Var cell = tape.constant(Matrix::Zero(batch, h));
    for (ad::Var& x : sequence) {
      ad::Var pre = tape.add_row(tape.add(tape.matmul(x, wx), tape.matmul(hidden, wh)), b);
      ad::Var in_gate = tape.sigmoid(tape.slice_cols(pre, 0, h));
      ad::Var forget_gate = tape.sigmoid(tape.slice_cols(pre, h, h));
      ad::Var candidate = tape.tanh(tape.slice_cols(pre, 2 * h, h));
      ad::Var out_gate = tape.sigmoid(tape.slice_cols(pre, 3 * h, h));
      cell = tape.add(tape.hadamard(forget_gate, cell), tape.hadamard(in_gate, candidate));
      hidden = tape.hadamard(out_gate, tape.tanh(cell));
      x = hidden;
    }
    top = hidden;
  }
  return top;
}

ad::Var graph_conv(ad::Tape& tape, ad::Var adj, ad::Var x, ad::Var w, bool activate) {
  ad::Var out = tape.matmul(tape.matmul(adj, x), w);
  return activate ? tape.relu(out) : out;
}

}  // namespace stua::nn
