#include "stua/graphcore.hpp"

#include "stua/csv_io.hpp"
#include "stua/errors.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace stua::graphcore {

UrbanGraph::UrbanGraph(std::vector<std::string> region_ids, Eigen::MatrixX2d coords)
    : ids_(std::move(region_ids)), coords_(std::move(coords)) {
  const auto n = static_cast<Eigen::Index>(ids_.size());
  if (n != coords_.rows()) fail(ErrorKind::DimensionMismatch, "region ids and coordinates differ in count");
  if (n < 2) fail(ErrorKind::DegenerateGeometry, "an urban graph needs at least 2 regions");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    if (id.empty()) fail(ErrorKind::Parse, "empty region id");
    if (!seen.insert(id).second) fail(ErrorKind::DuplicateCell, "duplicate region id '" + id + "'");
  }
  if (!coords_.allFinite()) fail(ErrorKind::DegenerateGeometry, "non-finite region coordinate");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (coords_.row(i) == coords_.row(j)) {
        fail(ErrorKind::DegenerateGeometry, "regions '" + ids_[i] + "' and '" + ids_[j] + "' share coordinates");
      }
}

Eigen::Index UrbanGraph::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return static_cast<Eigen::Index>(i);
  return -1;
}

Matrix distance_matrix(const UrbanGraph& graph) {
  const Eigen::Index n = graph.size();
  const auto& xy = graph.coords();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (xy.row(i) - xy.row(j)).norm();
      if (!(dist > 0.0)) fail(ErrorKind::DegenerateGeometry, "zero distance between distinct regions");
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

AdjacencyMatrix gravity_adjacency(const Matrix& distances, const Eigen::Ref<const Vector>& intensity, double rho,
                                  double flow_floor) {
  const Eigen::Index n = distances.rows();
  if (distances.cols() != n || intensity.size() != n) {
    fail(ErrorKind::DimensionMismatch, "gravity_adjacency: distance/intensity shape mismatch");
  }
  AdjacencyMatrix a{Matrix::Zero(n, n), AdjacencyKind::Gravity};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = std::max(intensity(i), flow_floor);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = distances(i, j);
      if (!(d > 0.0)) fail(ErrorKind::DegenerateGeometry, "zero distance between distinct regions");
      const double hj = std::max(intensity(j), flow_floor);
      const double v = std::exp(-d) + rho * std::log(hi * hj / d);
      a.values(i, j) = v;
      a.values(j, i) = v;
    }
  }
  return a;
}

AdjacencyMatrix gravity_adjacency(const UrbanGraph& graph, const Eigen::Ref<const Vector>& intensity, double rho,
                                  double flow_floor) {
  return gravity_adjacency(distance_matrix(graph), intensity, rho, flow_floor);
}

AdjacencyMatrix period_adjacency(std::span<const AdjacencyMatrix> adjacencies) {
  if (adjacencies.empty()) fail(ErrorKind::EmptyPeriod, "period_adjacency: no adjacency matrices");
  const auto& first = adjacencies.front().values;
  Matrix sum = Matrix::Zero(first.rows(), first.cols());
  for (const auto& a : adjacencies) {
    if (a.values.rows() != first.rows() || a.values.cols() != first.cols() || a.kind != adjacencies.front().kind) {
      fail(ErrorKind::DimensionMismatch, "period_adjacency: inputs differ in shape or kind");
    }
    sum += a.values;
  }
  return {sum / static_cast<double>(adjacencies.size()), AdjacencyKind::PeriodAveraged};
}

AdjacencyMatrix clip_negative(AdjacencyMatrix adjacency) {
  adjacency.values = adjacency.values.cwiseMax(0.0);
  return adjacency;
}

AdjacencyMatrix normalize_adjacency(const AdjacencyMatrix& adjacency) {
  const Matrix& a = adjacency.values;
  if (a.rows() != a.cols()) fail(ErrorKind::DimensionMismatch, "normalize_adjacency: matrix not square");
  Matrix tilde = a;
  tilde.diagonal().array() += 1.0;
  const Vector degree = tilde.rowwise().sum();
  for (Eigen::Index i = 0; i < degree.size(); ++i) {
    if (!(degree(i) > 0.0)) {
      fail(ErrorKind::DegenerateDegree, "non-positive degree at row " + std::to_string(i));
    }
  }
  const Vector inv_sqrt = degree.array().rsqrt().matrix();
  // (s_i * s_j) is commutative in floating point, so symmetric input stays
  // exactly symmetric.
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = tilde(i, j) * (inv_sqrt(i) * inv_sqrt(j));
  return {std::move(out), AdjacencyKind::Normalized};
}

PeriodStack build_period_stack(long last, int p, int q, int intervals_per_day) {
  if (p < 1 || q < 0 || intervals_per_day < 1) {
    fail(ErrorKind::InvalidConfig, "period geometry requires p >= 1, q >= 0, intervals_per_day >= 1");
  }
  const long needed = static_cast<long>(kWeekDays) * intervals_per_day + p;
  if (last + 1 < needed) {
    fail(ErrorKind::InsufficientHistory, "target predecessor " + std::to_string(last) + " needs " +
                                             std::to_string(needed) + " intervals of history");
  }
  if (q > kWeekDays) fail(ErrorKind::InvalidConfig, "q must not exceed 7 days of history");
  PeriodStack s;
  s.p = p;
  s.q = q;
  s.intervals_per_day = intervals_per_day;
  s.last = last;
  for (long j = last - p + 1; j <= last; ++j) s.closeness.push_back(j);
  auto shifted = [&](int days) {
    std::vector<long> out;
    for (long j : s.closeness) out.push_back(j - static_cast<long>(days) * intervals_per_day);
    return out;
  };
  for (int k = 1; k <= q; ++k) s.daily.push_back(shifted(k));
  for (int k = 1; k <= kWeekDays; ++k) s.weekly_sources.push_back(shifted(k));
  return s;
}

std::vector<Matrix> materialize_periods(const Matrix& series, const PeriodStack& stack) {
  const Eigen::Index n = series.cols();
  if (stack.last >= series.rows()) fail(ErrorKind::InsufficientHistory, "period stack exceeds the series");
  auto gather = [&](const std::vector<long>& idx) {
    Matrix m(static_cast<Eigen::Index>(idx.size()), n);
    for (std::size_t j = 0; j < idx.size(); ++j) m.row(static_cast<Eigen::Index>(j)) = series.row(idx[j]);
    return m;
  };
  std::vector<Matrix> periods;
  periods.reserve(static_cast<std::size_t>(stack.period_count()));
  Matrix weekly = Matrix::Zero(stack.p, n);
  for (const auto& src : stack.weekly_sources) weekly += gather(src);
  periods.push_back(weekly / static_cast<double>(stack.weekly_sources.size()));
  for (auto it = stack.daily.rbegin(); it != stack.daily.rend(); ++it) periods.push_back(gather(*it));
  periods.push_back(gather(stack.closeness));
  return periods;
}

UrbanGraph read_regions_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path, "region_id,x_km,y_km");
  std::vector<std::string> ids;
  Eigen::MatrixX2d coords(static_cast<Eigen::Index>(table.rows.size()), 2);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string ctx = path.string() + ":" + std::to_string(table.line_numbers[r]);
    ids.push_back(row[0]);
    coords(static_cast<Eigen::Index>(r), 0) = io::parse_double(row[1], ctx);
    coords(static_cast<Eigen::Index>(r), 1) = io::parse_double(row[2], ctx);
  }
  return UrbanGraph(std::move(ids), std::move(coords));
}

void write_regions_csv(const UrbanGraph& graph, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "region_id,x_km,y_km\n";
  for (Eigen::Index i = 0; i < graph.size(); ++i) {
    out << graph.region_ids()[static_cast<std::size_t>(i)] << ',' << io::format_double(graph.coords()(i, 0)) << ','
        << io::format_double(graph.coords()(i, 1)) << '\n';
  }
  io::write_file_atomic(path, out.str());
}

}  // namespace stua::graphcore
