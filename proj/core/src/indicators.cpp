#include "stua/indicators.hpp"

#include "stua/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stua::indicators {

std::size_t neighbor_count(Eigen::Index regions, double fraction) {
  const double raw = std::ceil(fraction * static_cast<double>(regions));
  return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

NeighborSet nearest_neighbors(const graphcore::UrbanGraph& graph, double fraction) {
  const Eigen::Index n = graph.size();
  const std::size_t k = std::min<std::size_t>(neighbor_count(n, fraction), static_cast<std::size_t>(n - 1));
  const Matrix dist = graphcore::distance_matrix(graph);
  NeighborSet out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> others;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::stable_sort(others.begin(), others.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return dist(i, a) < dist(i, b); });
    others.resize(k);
    out[static_cast<std::size_t>(i)] = std::move(others);
  }
  return out;
}

const char* to_string(IndicatorKind kind) {
  switch (kind) {
    case IndicatorKind::Quality: return "quality";
    case IndicatorKind::VarS: return "var_S";
    case IndicatorKind::VarEp: return "var_ep";
    case IndicatorKind::VarIp: return "var_ip";
    case IndicatorKind::VarST: return "var_ST";
  }
  return "unknown";
}

IndicatorField quality_indicator(const Matrix& clean, const Matrix& corrupted) {
  if (clean.rows() != corrupted.rows() || clean.cols() != corrupted.cols()) {
    fail(ErrorKind::DimensionMismatch, "quality_indicator: window shapes differ");
  }
  return {(clean - corrupted).cwiseAbs(), IndicatorKind::Quality};
}

Eigen::RowVectorXd period_average(const Matrix& interval_level) {
  if (interval_level.rows() == 0) fail(ErrorKind::EmptyPeriod, "period_average: no intervals");
  return interval_level.colwise().mean();
}

double population_stdv(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

double st_variance(double spatial, double inter_period, double intra_period) {
  return (spatial + inter_period + intra_period) / 3.0;
}

double st_variance(const VarianceViews& v) { return st_variance(v.spatial, v.inter_period, v.intra_period); }

Matrix st_variance(const Matrix& spatial, const Matrix& inter_period, const Matrix& intra_period) {
  if (spatial.rows() != inter_period.rows() || spatial.cols() != inter_period.cols() ||
      spatial.rows() != intra_period.rows() || spatial.cols() != intra_period.cols()) {
    fail(ErrorKind::DimensionMismatch, "st_variance: view shapes differ");
  }
  return (spatial + inter_period + intra_period) / 3.0;
}

namespace {

// Population stdv of each row of `m` (rows x cols -> rows).
Vector row_stdv(const Matrix& m) {
  const Vector mean = m.rowwise().mean();
  return ((m.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
}

}  // namespace

VarianceFields variance_fields(std::span<const Matrix> periods, const NeighborSet& neighbors) {
  if (periods.size() < 2) fail(ErrorKind::DimensionMismatch, "variance_fields: need at least 2 periods");
  const Eigen::Index p = periods.front().rows();
  const Eigen::Index n = periods.front().cols();
  if (static_cast<Eigen::Index>(neighbors.size()) != n) {
    fail(ErrorKind::DimensionMismatch, "variance_fields: neighbor set size differs from region count");
  }
  const auto count = static_cast<Eigen::Index>(periods.size());
  VarianceFields f;
  f.spatial = Matrix::Zero(count, n);
  f.inter_period = Matrix::Zero(count, n);
  f.intra_period = Matrix::Zero(count, n);
  f.degenerate = p < 2;

  for (Eigen::Index m = 0; m < count; ++m) {
    const Matrix& x = periods[static_cast<std::size_t>(m)];
    if (x.rows() != p || x.cols() != n) fail(ErrorKind::DimensionMismatch, "variance_fields: ragged periods");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& nb = neighbors[static_cast<std::size_t>(i)];
      Matrix slots(p, static_cast<Eigen::Index>(nb.size()));
      for (std::size_t k = 0; k < nb.size(); ++k) slots.col(static_cast<Eigen::Index>(k)) = x.col(nb[k]);
      f.spatial(m, i) = row_stdv(slots).mean();
    }
    if (p >= 2) f.intra_period.row(m) = row_stdv(x.transpose()).transpose();
  }

  // Inter-period: per slot j and region i, dispersion across the periods.
  Eigen::RowVectorXd inter = Eigen::RowVectorXd::Zero(n);
  for (Eigen::Index j = 0; j < p; ++j) {
    Matrix across(count, n);
    for (Eigen::Index m = 0; m < count; ++m) across.row(m) = periods[static_cast<std::size_t>(m)].row(j);
    inter += row_stdv(across.transpose()).transpose();
  }
  inter /= static_cast<double>(p);
  f.inter_period = inter.replicate(count, 1);
  f.st = st_variance(f.spatial, f.inter_period, f.intra_period);
  return f;
}

VarianceViews variance_views(const Matrix& series, const NeighborSet& neighbors, const graphcore::PeriodStack& stack,
                             int period, Eigen::Index region) {
  if (period < 0 || period >= stack.period_count()) fail(ErrorKind::DimensionMismatch, "period index out of range");
  if (region < 0 || region >= series.cols()) fail(ErrorKind::DimensionMismatch, "region index out of range");
  const auto periods = graphcore::materialize_periods(series, stack);
  const VarianceFields f = variance_fields(periods, neighbors);
  return {f.spatial(period, region), f.inter_period(period, region), f.intra_period(period, region), f.degenerate};
}

Vector target_variance(const Matrix& series, const NeighborSet& neighbors, long target, int p, int q,
                       int intervals_per_day) {
  if (target >= series.rows()) fail(ErrorKind::InsufficientHistory, "target interval beyond the series");
  const auto stack = graphcore::build_period_stack(target, p, q, intervals_per_day);
  const auto periods = graphcore::materialize_periods(series, stack);
  const VarianceFields f = variance_fields(periods, neighbors);
  return f.st.row(stack.period_count() - 1).transpose();
}

VarianceViews oracle_st_variance(const Matrix& series, const NeighborSet& neighbors, const OracleLayout& layout,
                                 int period, Eigen::Index region) {
  const int p = layout.p;
  const int q = layout.q;
  const long day = layout.intervals_per_day;

  // value of period b, slot j, region r straight from the raw series
  auto at = [&](int b, int j, Eigen::Index r) -> double {
    const long base = layout.last - p + 1 + j;
    if (b == 0) {
      double s = 0.0;
      for (int k = 1; k <= 7; ++k) s += series(base - k * day, r);
      return s / 7.0;
    }
    if (b == q + 1) return series(base, r);
    const int days_back = q + 1 - b;
    return series(base - days_back * day, r);
  };
  auto stdv = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
  };

  VarianceViews out;
  double spatial = 0.0;
  for (int j = 0; j < p; ++j) {
    std::vector<double> vals;
    for (Eigen::Index r : neighbors[static_cast<std::size_t>(region)]) vals.push_back(at(period, j, r));
    spatial += stdv(vals);
  }
  out.spatial = spatial / p;

  double inter = 0.0;
  for (int j = 0; j < p; ++j) {
    std::vector<double> vals;
    for (int b = 0; b <= q + 1; ++b) vals.push_back(at(b, j, region));
    inter += stdv(vals);
  }
  out.inter_period = inter / p;

  if (p < 2) {
    out.degenerate = true;
  } else {
    std::vector<double> vals;
    for (int j = 0; j < p; ++j) vals.push_back(at(period, j, region));
    out.intra_period = stdv(vals);
  }
  return out;
}

}  // namespace stua::indicators
