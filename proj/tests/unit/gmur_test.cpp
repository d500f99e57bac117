#include "stua/gmur.hpp"

#include "test_util.hpp"

#include <cmath>
#include <random>

namespace {

using namespace stua;
using namespace stua::gmur;

TEST(Recalibrate, ZeroGateIsIdentity) {
  Vector h(3), u(3);
  h << 1, 2, 3;
  u << 0.5, -1, 4;
  const auto r = recalibrate(h, u, init_gate(3));
  EXPECT_EQ(r.f_gate, Vector::Zero(3));
  EXPECT_EQ(r.h_recal, h);
  EXPECT_EQ(r.sigma_hat, u);
}

TEST(Recalibrate, HalfGateSplitsTheUncertainty) {
  // one region; tanh(w * [U; H]) = 0.5 with U = 1, H = 2 and w = [atanh(0.5), 0]
  GateParams g{Matrix(1, 2)};
  g.weights << std::atanh(0.5), 0.0;
  Vector h(1), u(1);
  h << 2;
  u << 1;
  const auto r = recalibrate(h, u, g);
  EXPECT_NEAR(r.f_gate(0), 0.5, 1e-15);
  EXPECT_NEAR(r.h_recal(0), 2.5, 1e-15);
  EXPECT_NEAR(r.sigma_hat(0), 0.5, 1e-15);
  EXPECT_NEAR(r.h_recal(0) + r.sigma_hat(0), 3.0, 1e-15);
}

TEST(Recalibrate, SaturatedGateMovesEverything) {
  GateParams g{Matrix(1, 2)};
  g.weights << 100.0, 0.0;
  Vector h(1), u(1);
  h << 2;
  u << 1;
  const auto r = recalibrate(h, u, g);
  EXPECT_NEAR(r.sigma_hat(0), 0.0, 1e-12);
  EXPECT_NEAR(r.h_recal(0), 3.0, 1e-12);
}

TEST(Recalibrate, ConservesTheSumOnRandomTriples) {
  std::mt19937_64 rng(1);
  // Scaled units: tanh rounds to exactly +-1 beyond |x| ~ 19.
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 7;
    Vector h(n), un(n);
    GateParams g{Matrix(n, 2 * n)};
    for (int i = 0; i < n; ++i) {
      h(i) = 0.5 * (1.0 + u(rng));
      un(i) = u(rng);
    }
    for (Eigen::Index k = 0; k < g.weights.size(); ++k) g.weights.data()[k] = u(rng);
    const auto r = recalibrate(h, un, g);
    ASSERT_LE(((r.h_recal + r.sigma_hat) - (h + un)).cwiseAbs().maxCoeff(), 1e-12);
    ASSERT_TRUE((r.f_gate.array().abs() < 1.0).all());
    if ((un.array() > 0).all()) {
      ASSERT_TRUE((r.sigma_hat.array() > 0).all());
    }
  }
}

TEST(Recalibrate, TapeMatchesReference) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 4;
  Vector h(n), un(n);
  GateParams g{Matrix(n, 2 * n)};
  for (int i = 0; i < n; ++i) {
    h(i) = u(rng);
    un(i) = u(rng);
  }
  for (Eigen::Index k = 0; k < g.weights.size(); ++k) g.weights.data()[k] = u(rng);
  const auto ref = recalibrate(h, un, g);
  ad::Tape t;
  const auto vars = recalibrate(t, t.constant(h), t.constant(un), g);
  EXPECT_TRUE(t.value(vars.h_recal).col(0).isApprox(ref.h_recal, 1e-15));
  EXPECT_TRUE(t.value(vars.sigma_hat).col(0).isApprox(ref.sigma_hat, 1e-15));
  EXPECT_TRUE(t.value(vars.f_gate).col(0).isApprox(ref.f_gate, 1e-15));
}

TEST(Recalibrate, ShapeMismatch) {
  EXPECT_STUA_ERROR(recalibrate(Vector::Zero(2), Vector::Zero(3), init_gate(2)), ErrorKind::DimensionMismatch);
  EXPECT_STUA_ERROR(recalibrate(Vector::Zero(2), Vector::Zero(2), init_gate(3)), ErrorKind::DimensionMismatch);
}

}  // namespace
