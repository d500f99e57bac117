#include "stua/datagen.hpp"

#include "stua/csv_io.hpp"
#include "stua/errors.hpp"
#include "stua/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

namespace stua::datagen {

namespace {

constexpr const char* kFactorNames[] = {"weather", "hour_phase", "event", "weekday_phase"};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

}  // namespace

int Dataset::intervals_per_day() const {
  if (mobility.interval_minutes <= 0 || 1440 % mobility.interval_minutes != 0) {
    fail(ErrorKind::InvalidConfig, "interval_minutes must divide a day");
  }
  return 1440 / mobility.interval_minutes;
}

std::span<const char* const> synthetic_factor_names() { return kFactorNames; }

Dataset synth_mobility(const SynthConfig& c, std::uint64_t seed) {
  if (c.regions < 2) fail(ErrorKind::InvalidConfig, "data.regions must be >= 2");
  if (c.days <= 0) fail(ErrorKind::InvalidConfig, "data.days must be positive");
  if (c.intervals_per_day <= 0 || 1440 % c.intervals_per_day != 0) {
    fail(ErrorKind::InvalidConfig, "data.intervals_per_day must divide 1440");
  }
  if (c.context_factors < 1 || c.context_factors > 4) fail(ErrorKind::InvalidConfig, "data.context_factors must be 1..4");
  if (c.base_amplitude <= 0.0 || c.extent_km <= 0.0) {
    fail(ErrorKind::InvalidConfig, "data.base_amplitude and data.extent_km must be positive");
  }
  if (c.event_rate < 0.0 || c.event_rate > 1.0) fail(ErrorKind::InvalidConfig, "data.event_rate must lie in [0, 1]");

  const int n = c.regions;
  const int day = c.intervals_per_day;
  const long total = static_cast<long>(c.days) * day;
  const long week = 7L * day;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  nn::Rng geo(stream_seed(seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixX2d coords(n, 2);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    coords(i, 0) = c.extent_km * unit(geo);
    coords(i, 1) = c.extent_km * unit(geo);
    ids.push_back("r" + std::to_string(i));
  }
  Vector base(n), daily_phase(n), weekly_phase(n);
  for (int i = 0; i < n; ++i) {
    base(i) = c.base_amplitude * (0.5 + unit(geo));
    daily_phase(i) = two_pi * unit(geo);
    weekly_phase(i) = two_pi * unit(geo);
  }

  // citywide weather in [0, 1]: a clipped AR(1) walk
  nn::Rng wx(stream_seed(seed, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector weather(total);
  double w = 0.3;
  for (long t = 0; t < total; ++t) {
    w = std::clamp(0.9 * w + 0.03 + 0.1 * gauss(wx), 0.0, 1.0);
    weather(t) = w;
  }

  nn::Rng ev(stream_seed(seed, 3));
  std::bernoulli_distribution event_draw(c.event_rate);
  Matrix events(total, n);
  for (long t = 0; t < total; ++t)
    for (int i = 0; i < n; ++i) events(t, i) = event_draw(ev) ? 1.0 : 0.0;

  nn::Rng noise(stream_seed(seed, 4));
  Matrix values(total, n);
  for (long t = 0; t < total; ++t) {
    // phases from t mod period keep the series exactly periodic
    const double dphase = two_pi * static_cast<double>(t % day) / day;
    const double wphase = two_pi * static_cast<double>(t % week) / static_cast<double>(week);
    for (int i = 0; i < n; ++i) {
      double v = base(i) * (1.0 + c.daily_weight * std::sin(dphase + daily_phase(i)) +
                            c.weekly_weight * std::sin(wphase + weekly_phase(i)));
      v *= 1.0 - c.weather_weight * weather(t);
      v += c.event_amplitude * base(i) * events(t, i);
      if (c.noise_weight > 0.0) v += c.noise_weight * base(i) * gauss(noise);
      values(t, i) = std::max(v, 0.0);
    }
  }

  ContextTensor ctx;
  for (int f = 0; f < c.context_factors; ++f) {
    Matrix m(total, n);
    for (long t = 0; t < total; ++t) {
      for (int i = 0; i < n; ++i) {
        switch (f) {
          case 0: m(t, i) = weather(t); break;
          case 1: m(t, i) = static_cast<double>(t % day) / day; break;
          case 2: m(t, i) = events(t, i); break;
          default: m(t, i) = static_cast<double>((t / day) % 7) / 7.0; break;
        }
      }
    }
    ctx.factors.push_back(std::move(m));
    ctx.names.emplace_back(kFactorNames[f]);
  }

  MobilityTensor mob{std::move(values), 1440 / day, c.start_time};
  return Dataset{graphcore::UrbanGraph(std::move(ids), std::move(coords)), std::move(mob), std::move(ctx)};
}

namespace {

struct TimeAxis {
  std::int64_t start = 0;
  std::int64_t step = 0;

  long index(std::int64_t ts, const std::string& ctx) const {
    const std::int64_t offset = ts - start;
    if (offset < 0 || offset % step != 0) {
      fail(ErrorKind::IrregularTimestamp, ctx + ": timestamp is not on the " + std::to_string(step / 60) +
                                              "-minute grid starting at " + io::format_timestamp(start));
    }
    return static_cast<long>(offset / step);
  }
};

}  // namespace

Dataset ingest_csv(const std::filesystem::path& regions_path, const std::filesystem::path& mobility_path,
                   const std::filesystem::path& context_path, int interval_minutes) {
  graphcore::UrbanGraph graph = graphcore::read_regions_csv(regions_path);
  const Eigen::Index n = graph.size();
  std::unordered_map<std::string, Eigen::Index> region_index;
  for (Eigen::Index i = 0; i < n; ++i) region_index.emplace(graph.region_ids()[static_cast<std::size_t>(i)], i);
  auto lookup_region = [&](const std::string& id, const std::string& ctx) {
    auto it = region_index.find(id);
    if (it == region_index.end()) fail(ErrorKind::UnknownRegion, ctx + ": region '" + id + "' not in regions.csv");
    return it->second;
  };

  const auto mob = io::read_csv(mobility_path, "timestamp_iso8601,region_id,intensity");
  if (mob.rows.empty()) fail(ErrorKind::MissingData, mobility_path.string() + ": no rows");

  std::vector<std::int64_t> stamps;
  stamps.reserve(mob.rows.size());
  for (std::size_t r = 0; r < mob.rows.size(); ++r) {
    const std::string ctx = mobility_path.string() + ":" + std::to_string(mob.line_numbers[r]);
    stamps.push_back(io::parse_timestamp(mob.rows[r][0], ctx));
    if (r > 0 && stamps[r] < stamps[r - 1]) fail(ErrorKind::NonmonotonicTimestamp, ctx + ": timestamp goes backwards");
  }

  TimeAxis axis{stamps.front(), 0};
  if (interval_minutes > 0) {
    axis.step = static_cast<std::int64_t>(interval_minutes) * 60;
  } else {
    for (std::size_t r = 1; r < stamps.size(); ++r) {
      const std::int64_t gap = stamps[r] - stamps[r - 1];
      if (gap > 0 && (axis.step == 0 || gap < axis.step)) axis.step = gap;
    }
    if (axis.step == 0) axis.step = 3600;
  }
  if (axis.step % 60 != 0 || 86400 % axis.step != 0) {
    fail(ErrorKind::InvalidConfig, "interval must be a whole number of minutes dividing a day");
  }

  const long total = axis.index(stamps.back(), mobility_path.string()) + 1;
  Matrix values = Matrix::Constant(total, n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < mob.rows.size(); ++r) {
    const std::string ctx = mobility_path.string() + ":" + std::to_string(mob.line_numbers[r]);
    const long t = axis.index(stamps[r], ctx);
    const Eigen::Index i = lookup_region(mob.rows[r][1], ctx);
    const double v = io::parse_double(mob.rows[r][2], ctx);
    if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::Parse, ctx + ": intensity must be finite and non-negative");
    if (!std::isnan(values(t, i))) fail(ErrorKind::DuplicateCell, ctx + ": duplicate (timestamp, region) cell");
    values(t, i) = v;
  }
  for (long t = 0; t < total; ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::isnan(values(t, i))) {
        fail(ErrorKind::MissingData, "mobility cell missing at " + io::format_timestamp(axis.start + t * axis.step) +
                                         ", region '" + graph.region_ids()[static_cast<std::size_t>(i)] + "'");
      }

  const auto ctx_rows = io::read_csv(context_path, "timestamp_iso8601,region_id,factor_name,value");
  ContextTensor context;
  std::map<std::string, int> factor_index;
  std::int64_t prev = std::numeric_limits<std::int64_t>::min();
  for (std::size_t r = 0; r < ctx_rows.rows.size(); ++r) {
    const auto& row = ctx_rows.rows[r];
    const std::string ctx = context_path.string() + ":" + std::to_string(ctx_rows.line_numbers[r]);
    const std::int64_t ts = io::parse_timestamp(row[0], ctx);
    if (ts < prev) fail(ErrorKind::NonmonotonicTimestamp, ctx + ": timestamp goes backwards");
    prev = ts;
    const long t = axis.index(ts, ctx);
    if (t >= total) fail(ErrorKind::IrregularTimestamp, ctx + ": context timestamp beyond the mobility range");
    const Eigen::Index i = lookup_region(row[1], ctx);
    auto [it, inserted] = factor_index.emplace(row[2], context.categories());
    if (inserted) {
      context.names.push_back(row[2]);
      context.factors.push_back(Matrix::Constant(total, n, std::numeric_limits<double>::quiet_NaN()));
    }
    Matrix& m = context.factors[static_cast<std::size_t>(it->second)];
    const double v = io::parse_double(row[3], ctx);
    if (!std::isfinite(v)) fail(ErrorKind::Parse, ctx + ": context value must be finite");
    if (!std::isnan(m(t, i))) fail(ErrorKind::DuplicateCell, ctx + ": duplicate (timestamp, region, factor) cell");
    m(t, i) = v;
  }
  if (context.categories() == 0) fail(ErrorKind::MissingData, context_path.string() + ": no context factors");
  for (int f = 0; f < context.categories(); ++f) {
    const Matrix& m = context.factors[static_cast<std::size_t>(f)];
    for (long t = 0; t < total; ++t)
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::isnan(m(t, i))) {
          fail(ErrorKind::MissingData, "context factor '" + context.names[static_cast<std::size_t>(f)] +
                                           "' missing at " + io::format_timestamp(axis.start + t * axis.step) +
                                           ", region '" + graph.region_ids()[static_cast<std::size_t>(i)] + "'");
        }
  }

  MobilityTensor mobility{std::move(values), static_cast<int>(axis.step / 60), axis.start};
  return Dataset{std::move(graph), std::move(mobility), std::move(context)};
}

void write_dataset_csv(const Dataset& d, const std::filesystem::path& dir) {
  graphcore::write_regions_csv(d.graph, dir / "regions.csv");
  const auto& ids = d.graph.region_ids();
  const std::int64_t step = static_cast<std::int64_t>(d.mobility.interval_minutes) * 60;

  std::ostringstream mob;
  mob << "timestamp_iso8601,region_id,intensity\n";
  std::ostringstream ctx;
  ctx << "timestamp_iso8601,region_id,factor_name,value\n";
  for (Eigen::Index t = 0; t < d.mobility.intervals(); ++t) {
    const std::string ts = io::format_timestamp(d.mobility.start_time + t * step);
    for (Eigen::Index i = 0; i < d.mobility.regions(); ++i) {
      const auto& id = ids[static_cast<std::size_t>(i)];
      mob << ts << ',' << id << ',' << io::format_double(d.mobility.values(t, i)) << '\n';
      for (int f = 0; f < d.context.categories(); ++f) {
        ctx << ts << ',' << id << ',' << d.context.names[static_cast<std::size_t>(f)] << ','
            << io::format_double(d.context.factors[static_cast<std::size_t>(f)](t, i)) << '\n';
      }
    }
  }
  io::write_file_atomic(dir / "mobility.csv", mob.str());
  io::write_file_atomic(dir / "context.csv", ctx.str());
}

const char* to_string(Layer layer) {
  switch (layer) {
    case Layer::Pure: return "pure";
    case Layer::Noisy: return "noisy";
    case Layer::Ood: return "ood";
  }
  return "unknown";
}

Layer parse_layer(const std::string& name) {
  if (name == "pure") return Layer::Pure;
  if (name == "noisy") return Layer::Noisy;
  if (name == "ood") return Layer::Ood;
  fail(ErrorKind::InvalidConfig, "unknown turbulence layer '" + name + "' (expected pure, noisy or ood)");
}

Matrix apply_perturbation(const Matrix& window, const Matrix& perturbation) {
  if (window.rows() != perturbation.rows() || window.cols() != perturbation.cols()) {
    fail(ErrorKind::DimensionMismatch, "apply_perturbation: shape mismatch");
  }
  return (window + perturbation).cwiseMax(0.0);
}

Eigen::RowVectorXd region_std(const Matrix& series) {
  const Eigen::RowVectorXd mean = series.colwise().mean();
  return ((series.rowwise() - mean).array().square().colwise().mean()).sqrt().matrix();
}

Matrix inject_noise(const Matrix& window, const TurbulenceSpec& spec, const Eigen::RowVectorXd& region_scale) {
  if (spec.layer == Layer::Pure || spec.noise_std_fraction == 0.0) return window;
  if (spec.noise_std_fraction < 0.0) fail(ErrorKind::InvalidConfig, "noise_std_fraction must be non-negative");
  const Eigen::RowVectorXd scale = region_scale.size() == 0 ? region_std(window) : region_scale;
  if (scale.size() != window.cols()) fail(ErrorKind::DimensionMismatch, "inject_noise: region scale width mismatch");
  nn::Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix perturbation(window.rows(), window.cols());
  for (Eigen::Index r = 0; r < window.rows(); ++r)
    for (Eigen::Index c = 0; c < window.cols(); ++c) perturbation(r, c) = spec.noise_std_fraction * scale(c) * gauss(rng);
  return apply_perturbation(window, perturbation);
}

std::uint64_t sample_seed(std::uint64_t base, long target, Layer layer) {
  return stream_seed(base, static_cast<std::uint64_t>(target) * 8 + static_cast<std::uint64_t>(layer) + 16);
}

Standardization fit_standardization(const Dataset& d, Eigen::Index prefix_rows) {
  prefix_rows = std::clamp<Eigen::Index>(prefix_rows, 1, d.mobility.intervals());
  Standardization s;
  const double peak = d.mobility.values.topRows(prefix_rows).maxCoeff();
  s.mobility_scale = peak > 0.0 ? peak : 1.0;
  const int q = d.context.categories();
  s.context_mean.resize(q);
  s.context_std.resize(q);
  for (int f = 0; f < q; ++f) {
    const auto block = d.context.factors[static_cast<std::size_t>(f)].topRows(prefix_rows);
    const double mean = block.mean();
    const double sd = std::sqrt((block.array() - mean).square().mean());
    s.context_mean(f) = mean;
    s.context_std(f) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

double TurbulenceSchedule::fraction(Layer layer) const {
  switch (layer) {
    case Layer::Pure: return 0.0;
    case Layer::Noisy: return noisy_fraction;
    case Layer::Ood: return ood_fraction;
  }
  return 0.0;
}

long first_admissible_target(const SampleGeometry& g) {
  return static_cast<long>(graphcore::kWeekDays) * g.intervals_per_day + g.p;
}

Sample make_sample(const Dataset& d, const Matrix& distances, const indicators::NeighborSet& neighbors,
                   const SampleGeometry& g, const Standardization& st, const Eigen::RowVectorXd& noise_scale,
                   long target, Layer layer, double noise_fraction, std::uint64_t seed) {
  if (target >= d.mobility.intervals()) fail(ErrorKind::InsufficientHistory, "target beyond the end of the series");
  const auto stack = graphcore::build_period_stack(target - 1, g.p, g.q, g.intervals_per_day);
  const Matrix& raw = d.mobility.values;
  const auto clean = graphcore::materialize_periods(raw, stack);
  const int count = stack.period_count();
  const Eigen::Index n = raw.cols();

  Matrix stacked(static_cast<Eigen::Index>(count) * g.p, n);
  for (int m = 0; m < count; ++m) stacked.middleRows(static_cast<Eigen::Index>(m) * g.p, g.p) = clean[m];
  const Matrix corrupted = inject_noise(stacked, {layer, noise_fraction, seed}, noise_scale);
  const Matrix qual = indicators::quality_indicator(stacked, corrupted).values;

  const double inv_scale = 1.0 / st.mobility_scale;
  Sample s;
  s.target = target;
  s.layer = layer;
  s.quality.resize(count, n);
  std::vector<Matrix> raw_periods;
  std::vector<graphcore::AdjacencyMatrix> averaged;
  for (int m = 0; m < count; ++m) {
    Matrix block = corrupted.middleRows(static_cast<Eigen::Index>(m) * g.p, g.p);
    s.quality.row(m) = indicators::period_average(qual.middleRows(static_cast<Eigen::Index>(m) * g.p, g.p)) * inv_scale;
    std::vector<graphcore::AdjacencyMatrix> per_interval;
    for (Eigen::Index j = 0; j < block.rows(); ++j) {
      per_interval.push_back(graphcore::gravity_adjacency(distances, block.row(j).transpose(), g.rho, g.flow_floor));
    }
    averaged.push_back(graphcore::period_adjacency(per_interval));
    s.period_adjacency.push_back(graphcore::normalize_adjacency(graphcore::clip_negative(averaged.back())).values);
    s.periods.push_back(block * inv_scale);
    raw_periods.push_back(std::move(block));
  }
  if (g.q > 0) {
    const std::span<const graphcore::AdjacencyMatrix> daily(averaged.data() + 1, static_cast<std::size_t>(g.q));
    s.daily_adjacency = graphcore::normalize_adjacency(graphcore::clip_negative(graphcore::period_adjacency(daily))).values;
  }

  const auto fields = indicators::variance_fields(raw_periods, neighbors);
  s.period_variance = fields.st * inv_scale;
  s.target_variance = indicators::target_variance(raw, neighbors, target, g.p, g.q, g.intervals_per_day) * inv_scale;
  s.target_mobility = raw.row(target).transpose() * inv_scale;

  s.contexts.resize(static_cast<std::size_t>(count));
  for (int f = 0; f < d.context.categories(); ++f) {
    const Matrix standardized =
        (d.context.factors[static_cast<std::size_t>(f)].array() - st.context_mean(f)) / st.context_std(f);
    auto periods = graphcore::materialize_periods(standardized, stack);
    for (int m = 0; m < count; ++m) s.contexts[static_cast<std::size_t>(m)].push_back(std::move(periods[m]));
  }
  return s;
}

std::vector<Sample> make_training_samples(const Dataset& d, const SampleGeometry& g, const TurbulenceSchedule& schedule,
                                          std::span<const long> targets, const Standardization& st,
                                          const Eigen::RowVectorXd& noise_scale, std::uint64_t base_seed) {
  if (schedule.layers.empty()) fail(ErrorKind::InvalidConfig, "turbulence schedule has no layers");
  const Matrix distances = graphcore::distance_matrix(d.graph);
  const auto neighbors = indicators::nearest_neighbors(d.graph);
  std::vector<Sample> out;
  out.reserve(targets.size() * schedule.layers.size());
  for (long target : targets) {
    for (Layer layer : schedule.layers) {
      out.push_back(make_sample(d, distances, neighbors, g, st, noise_scale, target, layer, schedule.fraction(layer),
                                sample_seed(base_seed, target, layer)));
    }
  }
  return out;
}

}  // namespace stua::datagen
