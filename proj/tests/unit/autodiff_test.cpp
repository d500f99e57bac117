#include "stua/autodiff.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

namespace {

using stua::Matrix;
using stua::ad::Tape;
using stua::ad::Var;

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

// Builds loss = sum(W .* f(params)) with a fixed random W so that every
// output entry carries a distinct adjoint.
using Builder = std::function<Var(Tape&, std::vector<Var>&)>;

double max_rel_error(std::vector<Matrix> params, const Builder& build, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix weights;
  auto loss_of = [&](Tape& tape) {
    std::vector<Var> vars;
    for (auto& p : params) vars.push_back(tape.param(p));
    Var out = build(tape, vars);
    if (weights.size() == 0) weights = random_matrix(tape.value(out).rows(), tape.value(out).cols(), rng);
    return tape.sum(tape.hadamard(out, tape.constant(weights)));
  };
  Tape tape;
  Var root = loss_of(tape);
  tape.backward(root);
  std::vector<Matrix> analytic;
  for (auto& p : params) {
    const Matrix* g = tape.gradient(p);
    analytic.push_back(g ? *g : Matrix::Zero(p.rows(), p.cols()));
  }
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (Eigen::Index e = 0; e < params[i].size(); ++e) {
      const double saved = params[i].data()[e];
      params[i].data()[e] = saved + h;
      Tape up;
      const double fu = up.scalar(loss_of(up));
      params[i].data()[e] = saved - h;
      Tape down;
      const double fd = down.scalar(loss_of(down));
      params[i].data()[e] = saved;
      const double numeric = (fu - fd) / (2 * h);
      const double a = analytic[i].data()[e];
      worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6}));
    }
  }
  return worst;
}

struct OpCase {
  const char* name;
  std::vector<std::pair<int, int>> shapes;
  Builder build;
};

class AutodiffOps : public ::testing::TestWithParam<OpCase> {};

TEST_P(AutodiffOps, MatchesCentralDifferences) {
  const OpCase& c = GetParam();
  std::mt19937_64 rng(7);
  std::vector<Matrix> params;
  for (auto [r, k] : c.shapes) params.push_back(random_matrix(r, k, rng));
  EXPECT_LT(max_rel_error(params, c.build, 11), 1e-6) << c.name;
}

INSTANTIATE_TEST_SUITE_P(
    Ops, AutodiffOps,
    ::testing::Values(
        OpCase{"matmul", {{3, 4}, {4, 2}}, [](Tape& t, std::vector<Var>& v) { return t.matmul(v[0], v[1]); }},
        OpCase{"add", {{3, 2}, {3, 2}}, [](Tape& t, std::vector<Var>& v) { return t.add(v[0], v[1]); }},
        OpCase{"sub", {{3, 2}, {3, 2}}, [](Tape& t, std::vector<Var>& v) { return t.sub(v[0], v[1]); }},
        OpCase{"add_row", {{4, 3}, {1, 3}}, [](Tape& t, std::vector<Var>& v) { return t.add_row(v[0], v[1]); }},
        OpCase{"hadamard", {{3, 3}, {3, 3}}, [](Tape& t, std::vector<Var>& v) { return t.hadamard(v[0], v[1]); }},
        OpCase{"scale", {{2, 5}}, [](Tape& t, std::vector<Var>& v) { return t.scale(v[0], -1.7); }},
        OpCase{"tanh", {{3, 3}}, [](Tape& t, std::vector<Var>& v) { return t.tanh(v[0]); }},
        OpCase{"sigmoid", {{3, 3}}, [](Tape& t, std::vector<Var>& v) { return t.sigmoid(v[0]); }},
        OpCase{"exp", {{3, 3}}, [](Tape& t, std::vector<Var>& v) { return t.exp(v[0]); }},
        OpCase{"transpose", {{2, 4}}, [](Tape& t, std::vector<Var>& v) { return t.transpose(v[0]); }},
        OpCase{"concat_rows", {{2, 3}, {1, 3}},
               [](Tape& t, std::vector<Var>& v) {
                 const Var parts[] = {v[0], v[1], v[0]};
                 return t.concat_rows(parts);
               }},
        OpCase{"concat_cols", {{3, 2}, {3, 1}},
               [](Tape& t, std::vector<Var>& v) {
                 const Var parts[] = {v[1], v[0]};
                 return t.concat_cols(parts);
               }},
        OpCase{"slice_rows", {{5, 2}}, [](Tape& t, std::vector<Var>& v) { return t.slice_rows(v[0], 1, 3); }},
        OpCase{"slice_cols", {{2, 5}}, [](Tape& t, std::vector<Var>& v) { return t.slice_cols(v[0], 2, 2); }},
        OpCase{"row_dot", {{4, 3}, {4, 3}}, [](Tape& t, std::vector<Var>& v) { return t.row_dot(v[0], v[1]); }},
        OpCase{"sum", {{3, 4}}, [](Tape& t, std::vector<Var>& v) { return t.sum(v[0]); }},
        OpCase{"sum_squares", {{3, 4}}, [](Tape& t, std::vector<Var>& v) { return t.sum_squares(v[0]); }},
        OpCase{"shared_param", {{3, 3}},
               [](Tape& t, std::vector<Var>& v) { return t.matmul(t.tanh(v[0]), v[0]); }}),
    [](const ::testing::TestParamInfo<OpCase>& info) { return std::string(info.param.name); });

TEST(Autodiff, ReluGradientAwayFromKink) {
  Matrix x(1, 4);
  x << -2.0, -0.5, 0.5, 2.0;
  Tape t;
  Var v = t.param(x);
  t.backward(t.sum(t.relu(v)));
  Matrix expected(1, 4);
  expected << 0, 0, 1, 1;
  EXPECT_EQ(*t.gradient(x), expected);
}

TEST(Autodiff, UnusedParameterHasNoGradient) {
  Matrix used = Matrix::Ones(2, 2), unused = Matrix::Ones(2, 2);
  Tape t;
  t.backward(t.sum(t.param(used)));
  EXPECT_NE(t.gradient(used), nullptr);
  EXPECT_EQ(t.gradient(unused), nullptr);
}

TEST(Autodiff, SameAddressBindsOneNode) {
  Matrix w = Matrix::Constant(1, 1, 3.0);
  Tape t;
  Var a = t.param(w);
  Var b = t.param(w);
  EXPECT_EQ(a.id, b.id);
  t.backward(t.hadamard(a, b));
  EXPECT_DOUBLE_EQ((*t.gradient(w))(0, 0), 6.0);
}

TEST(Autodiff, BackwardNeedsScalarRoot) {
  Tape t;
  Var v = t.constant(Matrix::Ones(2, 2));
  EXPECT_ANY_THROW(t.backward(v));
}

TEST(Autodiff, ShapeMismatchThrows) {
  Tape t;
  Var a = t.constant(Matrix::Ones(2, 3));
  Var b = t.constant(Matrix::Ones(2, 3));
  EXPECT_ANY_THROW(t.matmul(a, b));
  EXPECT_ANY_THROW(t.add(a, t.constant(Matrix::Ones(3, 2))));
}

}  // namespace
