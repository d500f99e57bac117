#pragma once

#include "stua/autodiff.hpp"
#include "stua/datagen.hpp"
#include "stua/nn.hpp"

#include <string>
#include <vector>

namespace stua::predictor {

/// Graph-convolution weights, one matrix per layer (in x out).
struct GcnParams {
  std::vector<Matrix> weights;
};

/// Mobility sequence encoder: step context embedding, stacked LSTM and a
/// region-shared readout.
struct SequenceParams {
  Matrix context_weights;  // Q x G
  std::vector<nn::LstmLayer> lstm;
  Matrix readout;       // H x 1
  Matrix readout_bias;  // 1 x 1
  Matrix skip;          // S x 1 linear map over the raw step intensities; empty without residual
};

struct PredictorDims {
  int context_categories = 3;
  int gcn_hidden = 8;
  int gcn_layers = 2;
  int lstm_hidden = 16;
  int lstm_layers = 2;
  /// Feed each step's raw intensity to the sequence encoder next to the
  /// graph features.
  bool input_skip = true;
  /// Add a learnable region-shared linear combination of the raw step
  /// intensities to the readout. Starts as the identity on the last
  /// closeness interval, so the encoder first predicts the change from it.
  bool residual = true;
  /// Sequence length S; p + 2, or p + 1 when q = 0. Filled in by the model.
  int steps = 0;
};

struct PredictorParams {
  GcnParams gcn;
  SequenceParams sequence;
  bool input_skip = true;
  bool residual = true;
};

PredictorParams init_predictor(const PredictorDims& dims, nn::Rng& rng);

/// H^k = ReLU(adj * H^{k-1} * W^{k-1}), K layers, H^0 = features.
Matrix gcn_forward(const Matrix& normalized_adjacency, const Matrix& features, const GcnParams& params);
ad::Var gcn_forward(ad::Tape& tape, ad::Var normalized_adjacency, ad::Var features, const GcnParams& params);

/// The p + 2 compressed steps fed to the sequence encoder, oldest first:
/// weekly summary, daily summary (omitted when q = 0), then the p closeness
/// intervals. Each step carries N x 1 intensities, its period's normalized
/// adjacency and N x Q context.
struct PredictorInput {
  std::vector<Matrix> steps;
  std::vector<Matrix> adjacency;
  std::vector<Matrix> context;
};

PredictorInput predictor_input(const datagen::Sample& sample);

/// Point estimate for the next interval, N x 1.
ad::Var predict_mobility(ad::Tape& tape, const PredictorInput& input, const PredictorParams& params);
Vector predict_mobility(const PredictorInput& input, const PredictorParams& params);

template <class Params, class F>
void visit_gcn(Params& p, F&& f) {
  for (std::size_t k = 0; k < p.weights.size(); ++k) f("predictor.gcn.w" + std::to_string(k), p.weights[k]);
}

template <class Params, class F>
void visit_sequence(Params& p, F&& f) {
  f(std::string("predictor.context"), p.context_weights);
  for (std::size_t k = 0; k < p.lstm.size(); ++k) {
    const std::string base = "predictor.lstm.layer" + std::to_string(k);
    f(base + ".wx", p.lstm[k].input_weights);
    f(base + ".wh", p.lstm[k].recurrent_weights);
    f(base + ".b", p.lstm[k].bias);
  }
  f(std::string("predictor.readout.w"), p.readout);
  f(std::string("predictor.readout.b"), p.readout_bias);
  if (p.skip.size() > 0) f(std::string("predictor.skip"), p.skip);
}

}  // namespace stua::predictor
