#pragma once

#include "stua/autodiff.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stua::graphcore {

/// Regions of the study area with planar coordinates in km.
class UrbanGraph {
 public:
  /// Validates ids (unique, non-empty), coordinates (finite, pairwise
  /// distinct) and N >= 2.
  UrbanGraph(std::vector<std::string> region_ids, Eigen::MatrixX2d coords);

  Eigen::Index size() const noexcept { return coords_.rows(); }
  const std::vector<std::string>& region_ids() const noexcept { return ids_; }
  const Eigen::MatrixX2d& coords() const noexcept { return coords_; }
  /// Index of a region id, or -1.
  Eigen::Index index_of(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixX2d coords_;
};

enum class AdjacencyKind { StaticDistance, Gravity, PeriodAveraged, Normalized };

struct AdjacencyMatrix {
  Matrix values;
  AdjacencyKind kind = AdjacencyKind::Gravity;
};

/// Pairwise Euclidean distances (km). Throws DegenerateGeometry on a zero
/// off-diagonal distance.
Matrix distance_matrix(const UrbanGraph& graph);

/// Default floor applied to intensities inside the gravity logarithm.
inline constexpr double kDefaultFlowFloor = 1.0;

/// Mobility-involved adjacency for one interval:
/// A_ij = exp(-d_ij) + rho * log(max(H_i, floor) * max(H_j, floor) / d_ij), A_ii = 0.
AdjacencyMatrix gravity_adjacency(const Matrix& distances, const Eigen::Ref<const Vector>& intensity, double rho,
                                  double flow_floor = kDefaultFlowFloor);
AdjacencyMatrix gravity_adjacency(const UrbanGraph& graph, const Eigen::Ref<const Vector>& intensity, double rho,
                                  double flow_floor = kDefaultFlowFloor);

/// Elementwise mean over a period. Throws EmptyPeriod on an empty list.
AdjacencyMatrix period_adjacency(std::span<const AdjacencyMatrix> adjacencies);

/// Negative entries set to zero (keeps degrees of A + I positive).
AdjacencyMatrix clip_negative(AdjacencyMatrix adjacency);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
/// Throws DegenerateDegree when a degree is not strictly positive.
AdjacencyMatrix normalize_adjacency(const AdjacencyMatrix& adjacency);

/// Index layout of the layered historical windows ending at interval T.
struct PeriodStack {
  int p = 0;
  int q = 0;
  int intervals_per_day = 0;
  long last = 0;                        // T
  std::vector<long> closeness;          // T-p+1 .. T
  std::vector<std::vector<long>> daily; // daily[k-1] = closeness - k days, k = 1..q
  std::vector<std::vector<long>> weekly_sources;  // closeness - k days, k = 1..7; averaged

  int period_count() const noexcept { return q + 2; }
};

inline constexpr int kWeekDays = 7;

/// Requires T + 1 >= 7 * intervals_per_day + p; throws InsufficientHistory.
PeriodStack build_period_stack(long last, int p, int q, int intervals_per_day);

/// Materializes the q + 2 periods of `series` (T_total x N) as p x N blocks
/// in chronological order: weekly summary, oldest day .. most recent day,
/// closeness.
std::vector<Matrix> materialize_periods(const Matrix& series, const PeriodStack& stack);

/// Reads `region_id,x_km,y_km`.
UrbanGraph read_regions_csv(const std::filesystem::path& path);
void write_regions_csv(const UrbanGraph& graph, const std::filesystem::path& path);

}  // namespace stua::graphcore
