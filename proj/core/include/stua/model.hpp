#pragma once

#include "stua/c2uq.hpp"
#include "stua/datagen.hpp"
#include "stua/gmur.hpp"
#include "stua/predictor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stua::model {

struct ModelDims {
  int regions = 6;
  int p = 6;
  int q = 3;
  int context_categories = 3;
  predictor::PredictorDims predictor;
  c2uq::C2uqDims uncertainty;

  /// Copies the shared geometry into the sub-module dims.
  ModelDims resolved() const;
};

struct ModelParams {
  predictor::PredictorParams predictor;
  c2uq::C2uqParams uncertainty;
  gmur::GateParams gate;
};

ModelParams init_model(const ModelDims& dims, std::uint64_t seed);

/// Parameter groups, in visiting order.
inline constexpr const char* kParamGroups[] = {"gcn", "sequence", "embed", "internal", "fm", "c2lstm", "aggr", "gate"};

/// Calls f(group, name, matrix) for every parameter tensor in a fixed order.
template <class F>
void visit_params(ModelParams& p, F&& f) {
  auto in = [&](const char* group) {
    return [&f, group](const std::string& name, Matrix& m) { f(std::string(group), name, m); };
  };
  predictor::visit_gcn(p.predictor.gcn, in("gcn"));
  predictor::visit_sequence(p.predictor.sequence, in("sequence"));
  c2uq::visit_embed(p.uncertainty.embed, in("embed"));
  c2uq::visit_internal(p.uncertainty.internal, in("internal"));
  c2uq::visit_fm(p.uncertainty.fm, in("fm"));
  c2uq::visit_evolve(p.uncertainty.evolve, in("c2lstm"));
  c2uq::visit_aggr(p.uncertainty.aggr, in("aggr"));
  gmur::visit_gate(p.gate, in("gate"));
}

template <class F>
void visit_params(const ModelParams& p, F&& f) {
  visit_params(const_cast<ModelParams&>(p),
               [&f](const std::string& g, const std::string& n, Matrix& m) { f(g, n, static_cast<const Matrix&>(m)); });
}

std::size_t parameter_count(const ModelParams& params);

/// Tape handles for every output and intermediate of one forward pass.
struct ForwardVars {
  ad::Var h_hat;                  // N x 1
  std::vector<ad::Var> internal;  // q+2 of N x 1
  std::vector<ad::Var> external;
  std::vector<ad::Var> overall;
  ad::Var u_next;
  ad::Var h_recal;
  ad::Var sigma_hat;
  ad::Var f_gate;
};

ForwardVars forward(ad::Tape& tape, const datagen::Sample& sample, const ModelParams& params);

/// Numeric outputs of one forward pass. Period fields are (q+2) x N.
struct PredictionBundle {
  Vector h_hat;
  Matrix internal;
  Matrix external;
  Matrix overall;
  Vector u_next;
  Vector h_recal;
  Vector sigma_hat;
  Vector f_gate;
};

PredictionBundle predict(const datagen::Sample& sample, const ModelParams& params);

/// N x p mobility block of period m (regions along rows).
Matrix period_block(const datagen::Sample& sample, std::size_t period);
/// N x (p*Q) concatenated context of period m, factor-major.
Matrix period_context(const datagen::Sample& sample, std::size_t period);
/// N x Q period mean of every factor.
Matrix period_factor_means(const datagen::Sample& sample, std::size_t period);

}  // namespace stua::model
