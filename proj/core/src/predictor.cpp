#include "stua/predictor.hpp"

#include "stua/errors.hpp"

namespace stua::predictor {

PredictorParams init_predictor(const PredictorDims& dims, nn::Rng& rng) {
  if (dims.gcn_layers < 1 || dims.lstm_layers < 1 || dims.gcn_hidden < 1 || dims.lstm_hidden < 1 ||
      dims.context_categories < 1) {
    fail(ErrorKind::InvalidConfig, "predictor dimensions must be positive");
  }
  PredictorParams p;
  p.input_skip = dims.input_skip;
  p.residual = dims.residual;
  Eigen::Index in = 1;
  for (int k = 0; k < dims.gcn_layers; ++k) {
    p.gcn.weights.push_back(nn::glorot_uniform(in, dims.gcn_hidden, rng));
    in = dims.gcn_hidden;
  }
  p.sequence.context_weights = nn::glorot_uniform(dims.context_categories, dims.gcn_hidden, rng);
  Eigen::Index lstm_in = dims.gcn_hidden + (dims.input_skip ? 1 : 0);
  for (int k = 0; k < dims.lstm_layers; ++k) {
    p.sequence.lstm.push_back(nn::make_lstm_layer(lstm_in, dims.lstm_hidden, rng));
    lstm_in = dims.lstm_hidden;
  }
  p.sequence.readout = nn::glorot_uniform(dims.lstm_hidden, 1, rng);
  p.sequence.readout_bias = Matrix::Zero(1, 1);
  if (dims.residual) {
    if (dims.steps < 1) fail(ErrorKind::InvalidConfig, "predictor residual needs the sequence length");
    p.sequence.skip = Matrix::Zero(dims.steps, 1);
    p.sequence.skip(dims.steps - 1, 0) = 1.0;
  }
  return p;
}

Matrix gcn_forward(const Matrix& normalized_adjacency, const Matrix& features, const GcnParams& params) {
  if (normalized_adjacency.rows() != features.rows() || normalized_adjacency.cols() != features.rows()) {
    fail(ErrorKind::DimensionMismatch, "gcn_forward: adjacency does not match feature rows");
  }
  Matrix h = features;
  for (const Matrix& w : params.weights) {
    if (w.rows() != h.cols()) fail(ErrorKind::DimensionMismatch, "gcn_forward: layer width does not chain");
    h = (normalized_adjacency * h * w).cwiseMax(0.0);
  }
  return h;
}

ad::Var gcn_forward(ad::Tape& tape, ad::Var normalized_adjacency, ad::Var features, const GcnParams& params) {
  ad::Var h = features;
  for (const Matrix& w : params.weights) h = nn::graph_conv(tape, normalized_adjacency, h, tape.param(w));
  return h;
}

namespace {

Matrix context_mean(const std::vector<Matrix>& factors) {
  Matrix out(factors.front().cols(), static_cast<Eigen::Index>(factors.size()));
  for (std::size_t f = 0; f < factors.size(); ++f) out.col(static_cast<Eigen::Index>(f)) = factors[f].colwise().mean().transpose();
  return out;
}

}  // namespace

PredictorInput predictor_input(const datagen::Sample& s) {
  const auto count = static_cast<int>(s.periods.size());
  if (count < 2 || s.contexts.size() != s.periods.size() || s.period_adjacency.size() != s.periods.size()) {
    fail(ErrorKind::DimensionMismatch, "predictor_input: malformed sample");
  }
  const int q = count - 2;
  const Matrix& closeness = s.periods.back();
  const Eigen::Index n = closeness.cols();
  const auto factors = static_cast<Eigen::Index>(s.contexts.front().size());

  PredictorInput in;
  in.steps.push_back(s.periods.front().colwise().mean().transpose());
  in.adjacency.push_back(s.period_adjacency.front());
  in.context.push_back(context_mean(s.contexts.front()));

  if (q > 0) {
    Vector daily = Vector::Zero(n);
    Matrix ctx = Matrix::Zero(n, factors);
    for (int m = 1; m <= q; ++m) {
      daily += s.periods[static_cast<std::size_t>(m)].colwise().mean().transpose();
      ctx += context_mean(s.contexts[static_cast<std::size_t>(m)]);
    }
    in.steps.push_back(daily / q);
    in.adjacency.push_back(s.daily_adjacency);
    in.context.push_back(ctx / q);
  }

  for (Eigen::Index j = 0; j < closeness.rows(); ++j) {
    in.steps.push_back(closeness.row(j).transpose());
    in.adjacency.push_back(s.period_adjacency.back());
    Matrix ctx(n, factors);
    for (Eigen::Index f = 0; f < factors; ++f) {
      ctx.col(f) = s.contexts.back()[static_cast<std::size_t>(f)].row(j).transpose();
    }
    in.context.push_back(std::move(ctx));
  }
  return in;
}

ad::Var predict_mobility(ad::Tape& tape, const PredictorInput& input, const PredictorParams& params) {
  if (input.steps.empty() || input.steps.size() != input.adjacency.size() || input.steps.size() != input.context.size()) {
    fail(ErrorKind::DimensionMismatch, "predict_mobility: steps, adjacency and context differ in length");
  }
  ad::Var ctx_w = tape.param(params.sequence.context_weights);
  std::vector<ad::Var> sequence;
  sequence.reserve(input.steps.size());
  for (std::size_t k = 0; k < input.steps.size(); ++k) {
    if (input.adjacency[k].size() == 0) fail(ErrorKind::DimensionMismatch, "predict_mobility: missing adjacency");
    ad::Var x = tape.constant(input.steps[k]);
    ad::Var graph = gcn_forward(tape, tape.constant(input.adjacency[k]), x, params.gcn);
    ad::Var feature = tape.add(graph, tape.matmul(tape.constant(input.context[k]), ctx_w));
    if (params.input_skip) {
      const ad::Var parts[] = {feature, x};
      feature = tape.concat_cols(parts);
    }
    sequence.push_back(feature);
  }
  ad::Var hidden = nn::run_lstm(tape, params.sequence.lstm, sequence);
  ad::Var out =
      tape.add_row(tape.matmul(hidden, tape.param(params.sequence.readout)), tape.param(params.sequence.readout_bias));
  if (!params.residual) return out;
  if (params.sequence.skip.rows() != static_cast<Eigen::Index>(input.steps.size())) {
    fail(ErrorKind::DimensionMismatch, "predict_mobility: skip length differs from the step count");
  }
  Matrix raw(input.steps.front().rows(), static_cast<Eigen::Index>(input.steps.size()));
  for (std::size_t k = 0; k < input.steps.size(); ++k) raw.col(static_cast<Eigen::Index>(k)) = input.steps[k];
  return tape.add(out, tape.matmul(tape.constant(raw), tape.param(params.sequence.skip)));
}

Vector predict_mobility(const PredictorInput& input, const PredictorParams& params) {
  ad::Tape tape;
  return tape.value(predict_mobility(tape, input, params)).col(0);
}

}  // namespace stua::predictor
