#pragma once

#include "stua/autodiff.hpp"

#include <random>
#include <span>
#include <string>
#include <vector>

namespace stua::nn {

using Rng = std::mt19937_64;

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// One LSTM layer with gates packed as [input | forget | candidate | output].
struct LstmLayer {
  Matrix input_weights;      // in x 4H
  Matrix recurrent_weights;  // H x 4H
  Matrix bias;               // 1 x 4H

  Eigen::Index hidden() const noexcept { return recurrent_weights.rows(); }
  Eigen::Index input() const noexcept { return input_weights.rows(); }
};

/// Glorot weights, zero bias except +1 on the forget gate.
LstmLayer make_lstm_layer(Eigen::Index input, Eigen::Index hidden, Rng& rng);

/// Stacked LSTM over `steps` (each batch x input). Returns the final hidden
/// state of the top layer (batch x H). Initial states are zero.
ad::Var run_lstm(ad::Tape& tape, std::span<const LstmLayer> layers, std::span<const ad::Var> steps);

/// ReLU(adj * x * w) when `activate`, otherwise adj * x * w.
ad::Var graph_conv(ad::Tape& tape, ad::Var adj, ad::Var x, ad::Var w, bool activate = true);

template <class F>
void visit_lstm(const std::string& prefix, std::vector<LstmLayer>& layers, F&& f) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string base = prefix + ".layer" + std::to_string(k);
    f(base + ".wx", layers[k].input_weights);
    f(base + ".wh", layers[k].recurrent_weights);
    f(base + ".b", layers[k].bias);
  }
}

}  // namespace stua::nn
