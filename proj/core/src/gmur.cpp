#include "stua/gmur.hpp"

#include "stua/errors.hpp"

namespace stua::gmur {

GateParams init_gate(Eigen::Index regions) { return {Matrix::Zero(regions, 2 * regions)}; }

Recalibration recalibrate(const Vector& h_hat, const Vector& u_hat, const GateParams& params) {
  const Eigen::Index n = h_hat.size();
  if (u_hat.size() != n || params.weights.rows() != n || params.weights.cols() != 2 * n) {
    fail(ErrorKind::DimensionMismatch, "recalibrate: shapes do not match");
  }
  Vector joined(2 * n);
  joined << u_hat, h_hat;
  Recalibration r;
  r.f_gate = (params.weights * joined).array().tanh().matrix();
  const Vector moved = u_hat.cwiseProduct(r.f_gate);
  r.h_recal = h_hat + moved;
  r.sigma_hat = u_hat - moved;
  return r;
}

RecalibrationVars recalibrate(ad::Tape& tape, ad::Var h_hat, ad::Var u_hat, const GateParams& params) {
  const ad::Var parts[] = {u_hat, h_hat};
  ad::Var f = tape.tanh(tape.matmul(tape.param(params.weights), tape.concat_rows(parts)));
  ad::Var moved = tape.hadamard(u_hat, f);
  return {tape.add(h_hat, moved), tape.sub(u_hat, moved), f};
}

}  // namespace stua::gmur
