#include "stua/c2uq.hpp"
#include "stua/graphcore.hpp"

#include "test_util.hpp"

#include <cmath>
#include <random>

namespace {

using namespace stua;
using namespace stua::c2uq;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

C2uqDims small_dims() {
  C2uqDims d;
  d.regions = 4;
  d.p = 3;
  d.context_categories = 3;
  d.embed_width = 5;
  d.field_width = 2;
  d.interaction_width = 3;
  d.fm_hidden = 4;
  d.evolve_hidden = 6;
  return d;
}

TEST(EmbedPeriod, ZeroMapGivesZero) {
  EmbedParams p{Matrix::Zero(2, 3), Matrix::Zero(4, 2), Matrix::Zero(4, 1)};
  EXPECT_EQ(embed_period(vec({1, 2}), vec({5, 6, 7}), p), Vector::Zero(4));
}

TEST(EmbedPeriod, IdentityWithoutContext) {
  EmbedParams p{Matrix::Zero(3, 2), Matrix::Identity(3, 3), Matrix::Zero(3, 1)};
  const Vector h = vec({4, -1, 2.5});
  EXPECT_EQ(embed_period(h, vec({9, 9}), p), h);
}

TEST(EmbedPeriod, ContextShiftsThePeriod) {
  // ex contributes [1, 1]
  EmbedParams p{Matrix::Ones(2, 1), Matrix::Identity(2, 2), Matrix::Ones(2, 1)};
  EXPECT_EQ(embed_period(vec({1, 2}), vec({1}), p), vec({3, 4}));
}

TEST(EmbedPeriod, BatchedFormMatchesPerRegion) {
  std::mt19937_64 rng(3);
  nn::Rng init(4);
  const auto d = small_dims();
  const auto params = init_c2uq(d, init);
  const Matrix h = random_matrix(d.regions, d.p, rng);
  const Matrix ex = random_matrix(d.regions, d.context_width(), rng);
  ad::Tape t;
  const Matrix batched = t.value(embed_periods(t, t.constant(h), t.constant(ex), params.embed));
  for (Eigen::Index i = 0; i < d.regions; ++i) {
    const Vector ref = embed_period(h.row(i).transpose(), ex.row(i).transpose(), params.embed);
    EXPECT_TRUE(batched.row(i).transpose().isApprox(ref, 1e-13));
  }
}

TEST(PeriodSimilarity, IdenticalPeriodsGiveSquaredNorm) {
  const Vector i = vec({1, -2, 3});
  const Vector all[] = {i, i, i, i};
  EXPECT_EQ(period_similarity(all), Vector::Constant(4, 14.0));
}

TEST(PeriodSimilarity, OrthogonalPeriodsGiveZero) {
  const Vector all[] = {vec({1, 0, 0}), vec({0, 2, 0}), vec({0, 0, 3})};
  EXPECT_EQ(period_similarity(all), Vector::Zero(3));
}

TEST(PeriodSimilarity, TwoPeriods) {
  const Vector all[] = {vec({1, 2}), vec({3, 4})};
  EXPECT_EQ(period_similarity(all), vec({11, 11}));
}

TEST(PeriodSimilarity, DependsOnlyOnTheMultisetOfOthers) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> e;
    for (int m = 0; m < 5; ++m) e.push_back(random_matrix(4, 1, rng).col(0));
    const Vector s = period_similarity(e);
    std::vector<Vector> swapped = e;
    std::swap(swapped[1], swapped[3]);
    const Vector t = period_similarity(swapped);
    EXPECT_NEAR(s(0), t(0), 1e-14);
    EXPECT_NEAR(s(2), t(2), 1e-14);
    EXPECT_NEAR(s(4), t(4), 1e-14);
    EXPECT_NEAR(s(1), t(3), 1e-14);
  }
}

TEST(PeriodSimilarity, NeedsTwoPeriods) {
  const Vector one[] = {vec({1})};
  EXPECT_STUA_ERROR(period_similarity(one), ErrorKind::DimensionMismatch);
}

TEST(PeriodSimilarity, BatchedFormMatchesPerRegion) {
  std::mt19937_64 rng(6);
  std::vector<Matrix> periods;
  for (int m = 0; m < 4; ++m) periods.push_back(random_matrix(3, 5, rng));
  ad::Tape t;
  std::vector<ad::Var> vars;
  for (const auto& m : periods) vars.push_back(t.constant(m));
  const auto batched = period_similarity(t, vars);
  ASSERT_EQ(batched.size(), 4u);
  for (Eigen::Index i = 0; i < 3; ++i) {
    std::vector<Vector> region;
    for (const auto& m : periods) region.push_back(m.row(i).transpose());
    const Vector ref = period_similarity(region);
    for (int m = 0; m < 4; ++m) EXPECT_NEAR(t.value(batched[m])(i, 0), ref(m), 1e-13);
  }
}

TEST(InternalUncertainty, ZeroSimilarityWithIdentity) {
  InternalParams p{Matrix::Identity(3, 3), Matrix::Zero(3, 1)};
  EXPECT_EQ(internal_uncertainty(Vector::Zero(3), p), Vector::Ones(3));
}

TEST(InternalUncertainty, DoubledIdentityAtLogTwo) {
  InternalParams p{2.0 * Matrix::Identity(3, 3), Matrix::Zero(3, 1)};
  EXPECT_TRUE(internal_uncertainty(Vector::Constant(3, std::log(2.0)), p).isApprox(Vector::Ones(3), 1e-15));
}

TEST(InternalUncertainty, LargeSimilarityLeavesTheBias) {
  std::mt19937_64 rng(7);
  InternalParams p{random_matrix(3, 3, rng), random_matrix(3, 1, rng)};
  EXPECT_TRUE(internal_uncertainty(Vector::Constant(3, 800.0), p).isApprox(p.bias.col(0), 1e-15));
}

TEST(InternalUncertainty, NonincreasingInSimilarityForNonnegativeWeights) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> step(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    InternalParams p{random_matrix(4, 4, rng).cwiseAbs(), random_matrix(4, 1, rng)};
    Vector s = random_matrix(4, 1, rng).col(0);
    const Vector before = internal_uncertainty(s, p);
    s(trial % 4) += step(rng);
    const Vector after = internal_uncertainty(s, p);
    EXPECT_TRUE((after.array() <= before.array()).all());
  }
}

TEST(FmInteractions, DisjointSupportsCancel) {
  const Vector fields[] = {vec({1, 0}), vec({0, 1})};
  const Matrix maps[] = {Matrix::Identity(2, 2)};
  const Vector out = pairwise_interactions(fields, maps);
  ASSERT_EQ(out.size(), 6);
  EXPECT_EQ(out.tail(2), Vector::Zero(2));
  EXPECT_EQ(out.head(4), vec({1, 0, 0, 1}));
}

TEST(FmInteractions, EqualFieldsWithIdentityMap) {
  const Vector fields[] = {vec({1, 1}), vec({1, 1})};
  const Matrix maps[] = {Matrix::Identity(2, 2)};
  EXPECT_EQ(pairwise_interactions(fields, maps).tail(2), vec({1, 1}));
}

TEST(FmInteractions, ClosedFormWidth) {
  EXPECT_EQ(fm_output_width(3, 4, 2), 18);
  for (int q = 1; q <= 4; ++q)
    for (int lce = 1; lce <= 8; ++lce)
      for (int lie = 1; lie <= 8; ++lie) {
        auto d = small_dims();
        d.context_categories = q;
        d.field_width = lce;
        d.interaction_width = lie;
        nn::Rng init(static_cast<std::uint64_t>(q * 100 + lce * 10 + lie));
        const auto params = init_c2uq(d, init);
        const Vector out = fm_interactions(Vector::Ones(q), params.fm);
        ASSERT_EQ(out.size(), fm_output_width(q, lce, lie));
        ASSERT_EQ(out.size(), q * lce + q * (q - 1) / 2 * lie);
      }
}

TEST(FmInteractions, BatchedFormMatchesPerRegion) {
  std::mt19937_64 rng(9);
  nn::Rng init(10);
  const auto d = small_dims();
  const auto params = init_c2uq(d, init);
  const Matrix x = random_matrix(d.regions, d.context_categories, rng);
  ad::Tape t;
  const Matrix batched = t.value(fm_interactions(t, t.constant(x), params.fm));
  for (Eigen::Index i = 0; i < d.regions; ++i) {
    EXPECT_TRUE(batched.row(i).transpose().isApprox(fm_interactions(x.row(i).transpose(), params.fm), 1e-13));
  }
}

TEST(ExternalUncertainty, ZeroGraphIsAPerRegionMap) {
  std::mt19937_64 rng(11);
  const Matrix e = random_matrix(5, 4, rng);
  const Matrix k0 = random_matrix(4, 3, rng), k1 = random_matrix(3, 1, rng);
  const Matrix kernels[] = {k0, k1};
  const Matrix adj = graphcore::normalize_adjacency({Matrix::Zero(5, 5)}).values;
  const Vector out = external_uncertainty(adj, e, kernels);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double ref = ((e.row(i) * k0).cwiseMax(0.0) * k1)(0, 0);
    EXPECT_NEAR(out(i), ref, 1e-14);
  }
}

TEST(ExternalUncertainty, LastLayerIsLinear) {
  const Matrix e = -Matrix::Ones(2, 1);
  const Matrix kernels[] = {Matrix::Ones(1, 1)};
  EXPECT_EQ(external_uncertainty(Matrix::Identity(2, 2), e, kernels), -Vector::Ones(2));
}

TEST(Aggregate, Projection) {
  const Vector ui = vec({1, 2}), ue = vec({5, 7});
  AggrParams p{Matrix::Zero(2, 4)};
  p.weights.leftCols(2).setIdentity();
  EXPECT_EQ(aggregate(ui, ue, p), ui);
}

TEST(Aggregate, HalfAndHalfIsTheMean) {
  const Vector ui = vec({1, 2}), ue = vec({5, 7});
  AggrParams p{Matrix::Zero(2, 4)};
  p.weights.leftCols(2) = 0.5 * Matrix::Identity(2, 2);
  p.weights.rightCols(2) = 0.5 * Matrix::Identity(2, 2);
  EXPECT_EQ(aggregate(ui, ue, p), vec({3, 4.5}));
}

TEST(Aggregate, ZeroWeights) {
  AggrParams p{Matrix::Zero(2, 4)};
  EXPECT_EQ(aggregate(vec({1, 2}), vec({3, 4}), p), Vector::Zero(2));
}

TEST(EvolveUncertainty, ZeroParametersGiveZero) {
  nn::Rng init(12);
  auto params = init_c2uq(small_dims(), init);
  visit_evolve(params.evolve, [](const std::string&, Matrix& m) { m.setZero(); });
  std::mt19937_64 rng(13);
  std::vector<Vector> steps;
  for (int m = 0; m < 5; ++m) steps.push_back(random_matrix(4, 1, rng).col(0));
  EXPECT_EQ(evolve_uncertainty(steps, params.evolve), Vector::Zero(4));
}

TEST(EvolveUncertainty, ShapeAndDeterminism) {
  nn::Rng init(14);
  const auto params = init_c2uq(small_dims(), init);
  std::mt19937_64 rng(15);
  std::vector<Vector> steps;
  for (int m = 0; m < 3; ++m) steps.push_back(random_matrix(4, 1, rng).col(0));
  const Vector a = evolve_uncertainty(steps, params.evolve);
  EXPECT_EQ(a.size(), 4);
  EXPECT_EQ(a, evolve_uncertainty(steps, params.evolve));
}

TEST(EvolveUncertainty, ReadsPeriodsInOrder) {
  nn::Rng init(16);
  const auto params = init_c2uq(small_dims(), init);
  std::vector<Vector> steps{vec({1, 0, 0, 0}), vec({0, 0, 0, 3})};
  std::vector<Vector> reversed{steps[1], steps[0]};
  EXPECT_FALSE(evolve_uncertainty(steps, params.evolve).isApprox(evolve_uncertainty(reversed, params.evolve)));
}

TEST(InitC2uq, InternalWeightsStartNonnegative) {
  nn::Rng init(17);
  const auto params = init_c2uq(small_dims(), init);
  EXPECT_GE(params.internal.weights.minCoeff(), 0.0);
  EXPECT_EQ(params.embed.ex_weights.rows(), 3);
  EXPECT_EQ(params.embed.ex_weights.cols(), 9);
  EXPECT_EQ(params.fm.interactions.size(), 3u);
  EXPECT_EQ(params.fm.gcn.back().cols(), 1);
}

}  // namespace
