#include "stua/model.hpp"

#include "stua/errors.hpp"

namespace stua::model {

ModelDims ModelDims::resolved() const {
  if (regions < 2 || p < 1 || q < 0 || context_categories < 1) {
    fail(ErrorKind::InvalidConfig, "model geometry must have N >= 2, p >= 1, q >= 0, Q >= 1");
  }
  ModelDims d = *this;
  d.predictor.context_categories = context_categories;
  d.predictor.steps = p + 1 + (q > 0 ? 1 : 0);
  d.uncertainty.regions = regions;
  d.uncertainty.p = p;
  d.uncertainty.context_categories = context_categories;
  return d;
}

ModelParams init_model(const ModelDims& dims, std::uint64_t seed) {
  const ModelDims d = dims.resolved();
  nn::Rng rng(seed);
  ModelParams m;
  m.predictor = predictor::init_predictor(d.predictor, rng);
  m.uncertainty = c2uq::init_c2uq(d.uncertainty, rng);
  m.gate = gmur::init_gate(d.regions);
  return m;
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  visit_params(params, [&](const std::string&, const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

Matrix period_block(const datagen::Sample& s, std::size_t period) { return s.periods.at(period).transpose(); }

Matrix period_context(const datagen::Sample& s, std::size_t period) {
  const auto& factors = s.contexts.at(period);
  if (factors.empty()) fail(ErrorKind::DimensionMismatch, "sample carries no context factors");
  const Eigen::Index p = factors.front().rows();
  const Eigen::Index n = factors.front().cols();
  Matrix out(n, p * static_cast<Eigen::Index>(factors.size()));
  for (std::size_t f = 0; f < factors.size(); ++f) out.middleCols(static_cast<Eigen::Index>(f) * p, p) = factors[f].transpose();
  return out;
}

Matrix period_factor_means(const datagen::Sample& s, std::size_t period) {
  const auto& factors = s.contexts.at(period);
  if (factors.empty()) fail(ErrorKind::DimensionMismatch, "sample carries no context factors");
  Matrix out(factors.front().cols(), static_cast<Eigen::Index>(factors.size()));
  for (std::size_t f = 0; f < factors.size(); ++f) out.col(static_cast<Eigen::Index>(f)) = factors[f].colwise().mean().transpose();
  return out;
}

ForwardVars forward(ad::Tape& tape, const datagen::Sample& s, const ModelParams& params) {
  const std::size_t count = s.periods.size();
  if (count < 2) fail(ErrorKind::DimensionMismatch, "forward: sample needs at least two periods");
  const Eigen::Index n = s.periods.front().cols();
  if (params.gate.weights.rows() != n) fail(ErrorKind::DimensionMismatch, "forward: model and sample region counts differ");

  ForwardVars out;
  out.h_hat = predictor::predict_mobility(tape, predictor::predictor_input(s), params.predictor);

  const auto& u = params.uncertainty;
  std::vector<ad::Var> embeddings;
  for (std::size_t m = 0; m < count; ++m) {
    embeddings.push_back(
        c2uq::embed_periods(tape, tape.constant(period_block(s, m)), tape.constant(period_context(s, m)), u.embed));
  }
  const auto similarity = c2uq::period_similarity(tape, embeddings);
  for (std::size_t m = 0; m < count; ++m) {
    out.internal.push_back(c2uq::internal_uncertainty(tape, similarity[m], u.internal));
    ad::Var e = c2uq::fm_interactions(tape, tape.constant(period_factor_means(s, m)), u.fm);
    out.external.push_back(c2uq::external_uncertainty(tape, tape.constant(s.period_adjacency.at(m)), e, u.fm.gcn));
    out.overall.push_back(c2uq::aggregate(tape, out.internal.back(), out.external.back(), u.aggr));
  }
  out.u_next = c2uq::evolve_uncertainty(tape, out.overall, u.evolve);

  const auto r = gmur::recalibrate(tape, out.h_hat, out.u_next, params.gate);
  out.h_recal = r.h_recal;
  out.sigma_hat = r.sigma_hat;
  out.f_gate = r.f_gate;
  return out;
}

PredictionBundle predict(const datagen::Sample& s, const ModelParams& params) {
  ad::Tape tape;
  const ForwardVars v = forward(tape, s, params);
  auto stack = [&](const std::vector<ad::Var>& vars) {
    Matrix m(static_cast<Eigen::Index>(vars.size()), tape.value(vars.front()).rows());
    for (std::size_t k = 0; k < vars.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = tape.value(vars[k]).col(0).transpose();
    return m;
  };
  PredictionBundle b;
  b.h_hat = tape.value(v.h_hat).col(0);
  b.internal = stack(v.internal);
  b.external = stack(v.external);
  b.overall = stack(v.overall);
  b.u_next = tape.value(v.u_next).col(0);
  b.h_recal = tape.value(v.h_recal).col(0);
  b.sigma_hat = tape.value(v.sigma_hat).col(0);
  b.f_gate = tape.value(v.f_gate).col(0);
  return b;
}

}  // namespace stua::model
