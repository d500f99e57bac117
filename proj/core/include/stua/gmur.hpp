#pragma once

#include "stua/autodiff.hpp"

#include <string>

namespace stua::gmur {

struct GateParams {
  Matrix weights;  // N x 2N
};

/// Zero gate: training starts from the identity re-calibration.
GateParams init_gate(Eigen::Index regions);

struct Recalibration {
  Vector h_recal;
  Vector sigma_hat;
  Vector f_gate;
};

/// f = tanh(W [U; H]); H' = H + U .* f; sigma = U - U .* f.
Recalibration recalibrate(const Vector& h_hat, const Vector& u_hat, const GateParams& params);

struct RecalibrationVars {
  ad::Var h_recal;
  ad::Var sigma_hat;
  ad::Var f_gate;
};

RecalibrationVars recalibrate(ad::Tape& tape, ad::Var h_hat, ad::Var u_hat, const GateParams& params);

template <class F>
void visit_gate(GateParams& p, F&& f) {
  f(std::string("gmur.gate"), p.weights);
}

}  // namespace stua::gmur
