#pragma once

#include "stua/autodiff.hpp"
#include "stua/graphcore.hpp"

#include <span>
#include <vector>

namespace stua::indicators {

/// Per-region neighbor lists (self excluded).
using NeighborSet = std::vector<std::vector<Eigen::Index>>;

/// max(1, ceil(fraction * N)).
std::size_t neighbor_count(Eigen::Index regions, double fraction = 0.05);

/// Nearest regions by Euclidean distance; ties resolved by lower index.
NeighborSet nearest_neighbors(const graphcore::UrbanGraph& graph, double fraction = 0.05);

enum class IndicatorKind { Quality, VarS, VarEp, VarIp, VarST };
const char* to_string(IndicatorKind kind);

/// Rows are intervals or periods, columns are regions.
struct IndicatorField {
  Matrix values;
  IndicatorKind kind = IndicatorKind::Quality;
};

/// |H - H_C| elementwise (interval level).
IndicatorField quality_indicator(const Matrix& clean, const Matrix& corrupted);

/// Column means: interval-level labels to one period label per region.
Eigen::RowVectorXd period_average(const Matrix& interval_level);

/// Population standard deviation (divides by the count).
double population_stdv(std::span<const double> values);

struct VarianceViews {
  double spatial = 0.0;
  double inter_period = 0.0;
  double intra_period = 0.0;
  /// Set when p < 2 and the intra-period view is forced to 0.
  bool degenerate = false;
};

/// Mean of the three views.
double st_variance(double spatial, double inter_period, double intra_period);
double st_variance(const VarianceViews& views);
Matrix st_variance(const Matrix& spatial, const Matrix& inter_period, const Matrix& intra_period);

/// The three dispersion views of period m (0 = weekly ... q+1 = closeness)
/// for region i, computed on the periods of `series` described by `stack`.
VarianceViews variance_views(const Matrix& series, const NeighborSet& neighbors, const graphcore::PeriodStack& stack,
                             int period, Eigen::Index region);

/// All views for all periods and regions from materialized periods
/// (each p x N). Every field is (q+2) x N; the inter-period view is the
/// same for every period.
struct VarianceFields {
  Matrix spatial;
  Matrix inter_period;
  Matrix intra_period;
  Matrix st;
  bool degenerate = false;
};
VarianceFields variance_fields(std::span<const Matrix> periods, const NeighborSet& neighbors);

/// var_ST for the interval being predicted: views over the closeness window
/// shifted to end at `target`, with the same-slot periods of that window.
Vector target_variance(const Matrix& series, const NeighborSet& neighbors, long target, int p, int q,
                       int intervals_per_day);

/// Period geometry for the oracle, stated without PeriodStack.
struct OracleLayout {
  long last = 0;
  int p = 0;
  int q = 0;
  int intervals_per_day = 0;
};

/// Direct nested-loop recomputation of the three views from raw indices.
/// Shares no code with variance_views / variance_fields.
VarianceViews oracle_st_variance(const Matrix& series, const NeighborSet& neighbors, const OracleLayout& layout,
                                 int period, Eigen::Index region);

}  // namespace stua::indicators
