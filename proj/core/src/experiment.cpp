#include "stua/experiment.hpp"

#include "stua/csv_io.hpp"
#include "stua/errors.hpp"
#include "stua/graphcore.hpp"
#include "stua/plot.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#ifndef STUA_VERSION
#define STUA_VERSION "0.0.0"
#endif

namespace stua::experiment {

namespace {

constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kEvalStream = 100;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string fmt(double v) { return io::format_double(v); }

}  // namespace

std::string version() { return STUA_VERSION; }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x51ED27ULL));
}

datagen::Dataset load_dataset(const config::Config& c) {
  if (c.source == "synth") return datagen::synth_mobility(c.synth, derive_seed(c.seed(), kDataStream));
  if (c.source == "csv") return datagen::ingest_csv(c.regions_csv, c.mobility_csv, c.context_csv, c.interval_minutes);
  fail(ErrorKind::InvalidConfig, "data.source must be 'synth' or 'csv'");
}

Split split_targets(long first, long last, double train_fraction, double test_fraction) {
  const long n = last - first + 1;
  if (n < 2) fail(ErrorKind::InsufficientHistory, "need at least two admissible targets to split");
  long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
  long n_test = std::clamp(std::lround(test_fraction * static_cast<double>(n)), 1L, n - n_train);
  Split s;
  for (long t = first; t <= last; ++t) {
    const long k = t - first;
    if (k < n_train) s.train.push_back(t);
    else if (k < n_train + n_test) s.test.push_back(t);
    else s.validation.push_back(t);
  }
  return s;
}

Prepared prepare(const config::Config& c) { return prepare(c, load_dataset(c)); }

Prepared prepare(const config::Config& c, datagen::Dataset dataset) {
  c.validate();
  Prepared p{c, std::move(dataset), {}, {}, {}, {}, {}, {}, {}};
  p.geometry.p = c.model.p;
  p.geometry.q = c.model.q;
  p.geometry.intervals_per_day = p.dataset.intervals_per_day();
  p.geometry.rho = c.rho;
  p.geometry.flow_floor = c.flow_floor;

  const long first = datagen::first_admissible_target(p.geometry);
  const long last = static_cast<long>(p.dataset.mobility.intervals()) - 1;
  if (first > last) {
    fail(ErrorKind::InsufficientHistory, "series has " + std::to_string(last + 1) + " intervals, the first target needs " +
                                             std::to_string(first + 1));
  }
  p.split = split_targets(first, last, c.train_fraction, c.test_fraction);

  const Eigen::Index prefix = p.split.train.back() + 1;
  p.standardization = datagen::fit_standardization(p.dataset, prefix);
  p.noise_scale = datagen::region_std(p.dataset.mobility.values.topRows(prefix));

  p.dims = c.model;
  p.dims.regions = static_cast<int>(p.dataset.graph.size());
  p.dims.context_categories = p.dataset.context.categories();
  p.dims = p.dims.resolved();

  p.distances = graphcore::distance_matrix(p.dataset.graph);
  p.neighbors = indicators::nearest_neighbors(p.dataset.graph);
  return p;
}

namespace {

std::vector<datagen::Sample> samples_for(const Prepared& p, const std::vector<long>& targets,
                                         const datagen::TurbulenceSchedule& schedule) {
  return datagen::make_training_samples(p.dataset, p.geometry, schedule, targets, p.standardization, p.noise_scale,
                                        derive_seed(p.config.seed(), kNoiseStream));
}

}  // namespace

std::vector<datagen::Sample> training_samples(const Prepared& p) {
  return samples_for(p, p.split.train, p.config.turbulence);
}

std::vector<datagen::Sample> validation_samples(const Prepared& p) {
  return samples_for(p, p.split.validation, p.config.turbulence);
}

std::vector<datagen::Sample> test_samples(const Prepared& p) {
  datagen::TurbulenceSchedule pure = p.config.turbulence;
  pure.layers = {datagen::Layer::Pure};
  return samples_for(p, p.split.test, pure);
}

std::vector<datagen::Sample> corrupted_test_samples(const Prepared& p, datagen::Layer layer, int draws) {
  std::vector<datagen::Sample> out;
  const double fraction = p.config.turbulence.fraction(layer);
  for (long target : p.split.test) {
    for (int d = 0; d < draws; ++d) {
      const std::uint64_t base = derive_seed(p.config.seed(), kEvalStream + static_cast<std::uint64_t>(d));
      out.push_back(datagen::make_sample(p.dataset, p.distances, p.neighbors, p.geometry, p.standardization,
                                         p.noise_scale, target, layer, fraction,
                                         datagen::sample_seed(base, target, layer)));
    }
  }
  return out;
}

TrainOutcome run_train(const Prepared& p, const std::filesystem::path& out_dir) {
  const auto init = model::init_model(p.dims, derive_seed(p.config.seed(), kInitStream));
  const auto train_set = training_samples(p);
  const auto val_set = validation_samples(p);
  trainer::TrainConfig tc = p.config.train;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    tc.metrics_log = out_dir / "metrics.jsonl";
  }

  TrainOutcome o;
  o.result = trainer::train(init, train_set, val_set, tc);
  const auto& h = o.result.history;
  o.metadata["version"] = version();
  o.metadata["seed"] = std::to_string(p.config.seed());
  o.metadata["config_hash"] = config::hash(p.config);
  o.metadata["epochs"] = std::to_string(h.size());
  o.metadata["best_epoch"] = std::to_string(o.result.best_epoch);
  o.metadata["initial_train_total"] = fmt(o.result.initial_train.total);
  o.metadata["final_train_total"] = fmt(h.empty() ? o.result.initial_train.total : h.back().train.total);
  if (o.result.best_epoch > 0) {
    o.metadata["best_val_total"] = fmt(h[static_cast<std::size_t>(o.result.best_epoch - 1)].validation.total);
  }
  o.metadata["train_samples"] = std::to_string(train_set.size());
  o.metadata["validation_samples"] = std::to_string(val_set.size());
  if (!out_dir.empty()) checkpoint::save(out_dir / "checkpoint.txt", o.result.best, o.metadata);
  return o;
}

namespace {

std::int64_t timestamp_of(const Prepared& p, long target) {
  return p.dataset.mobility.start_time + static_cast<std::int64_t>(target) * p.dataset.mobility.interval_minutes * 60;
}

void render(const Prepared& p, const std::vector<IntervalRecord>& records, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& ids = p.dataset.graph.region_ids();
  const auto n = static_cast<Eigen::Index>(ids.size());
  std::map<std::string, Eigen::Index> index;
  for (Eigen::Index i = 0; i < n; ++i) index[ids[static_cast<std::size_t>(i)]] = i;

  std::vector<std::vector<const IntervalRecord*>> per_region(ids.size());
  long last_target = -1;
  for (const auto& r : records) {
    auto it = index.find(r.region_id);
    if (it == index.end()) fail(ErrorKind::UnknownRegion, "predictions refer to unknown region " + r.region_id);
    per_region[static_cast<std::size_t>(it->second)].push_back(&r);
    last_target = std::max(last_target, r.target);
  }
  Vector last_pred = Vector::Zero(n), last_sigma = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rs = per_region[static_cast<std::size_t>(i)];
    const auto len = static_cast<Eigen::Index>(rs.size());
    Vector truth(len), pred(len), sigma(len);
    for (Eigen::Index k = 0; k < len; ++k) {
      truth(k) = rs[static_cast<std::size_t>(k)]->h_true;
      pred(k) = rs[static_cast<std::size_t>(k)]->h_pred;
      sigma(k) = rs[static_cast<std::size_t>(k)]->sigma;
      if (rs[static_cast<std::size_t>(k)]->target == last_target) {
        last_pred(i) = pred(k);
        last_sigma(i) = std::abs(sigma(k));
      }
    }
    plot::write_png(dir / ("interval_" + ids[static_cast<std::size_t>(i)] + ".png"),
                    plot::interval_chart(truth, pred, sigma));
  }
  plot::write_png(dir / "heatmap_h_pred.png", plot::spatial_heatmap(p.dataset.graph.coords(), last_pred));
  plot::write_png(dir / "heatmap_sigma.png", plot::spatial_heatmap(p.dataset.graph.coords(), last_sigma));
}

double mean_internal(const std::vector<datagen::Sample>& samples, const model::ModelParams& params) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += model::predict(s, params).internal.mean();
  return acc / static_cast<double>(samples.size());
}

}  // namespace

EvalReport run_eval(const Prepared& p, const model::ModelParams& params, const checkpoint::Metadata& training,
                    const std::filesystem::path& out_dir) {
  const auto tests = test_samples(p);
  const double scale = p.standardization.mobility_scale;
  const auto& ids = p.dataset.graph.region_ids();
  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto rows = static_cast<Eigen::Index>(tests.size());

  EvalReport r;
  r.seed = p.config.seed();
  r.config_hash = config::hash(p.config);
  r.version = version();
  r.training = training;

  Matrix truth(rows, n), pred(rows, n), sigma(rows, n);
  std::string uncertainty = "region_id,period,kind,value\n";
  for (Eigen::Index k = 0; k < rows; ++k) {
    const auto& s = tests[static_cast<std::size_t>(k)];
    const auto b = model::predict(s, params);
    r.test_loss += trainer::compute_loss(trainer::inputs_of(b), trainer::labels_of(s));
    truth.row(k) = p.dataset.mobility.values.row(s.target);
    pred.row(k) = b.h_recal.transpose() * scale;
    sigma.row(k) = b.sigma_hat.transpose() * scale;
    if (k + 1 == rows) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::string& id = ids[static_cast<std::size_t>(i)];
        for (Eigen::Index m = 0; m < b.internal.rows(); ++m) {
          const std::string period = std::to_string(m);
          uncertainty += id + "," + period + ",U_I," + fmt(b.internal(m, i) * scale) + "\n";
          uncertainty += id + "," + period + ",U_E," + fmt(b.external(m, i) * scale) + "\n";
          uncertainty += id + "," + period + ",U_o," + fmt(b.overall(m, i) * scale) + "\n";
        }
        uncertainty += id + ",next,U_next," + fmt(b.u_next(i) * scale) + "\n";
        uncertainty += id + ",next,sigma_hat," + fmt(b.sigma_hat(i) * scale) + "\n";
        uncertainty += id + ",next,f_gate," + fmt(b.f_gate(i)) + "\n";
      }
    }
  }
  if (rows > 0) r.test_loss /= static_cast<double>(rows);

  r.rmse = metrics::rmse(pred, truth);
  r.mape = metrics::mape(pred, truth, p.config.mape_floor);
  r.picp = metrics::picp(pred, sigma, truth);

  r.pure_samples = tests.size();
  r.mean_internal_pure = mean_internal(tests, params);
  const auto ood = corrupted_test_samples(p, datagen::Layer::Ood, p.config.ood_draws);
  r.ood_samples = ood.size();
  r.mean_internal_ood = mean_internal(ood, params);

  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      r.records.push_back({tests[static_cast<std::size_t>(k)].target, ids[static_cast<std::size_t>(i)], truth(k, i),
                           pred(k, i), sigma(k, i), metrics::covered(pred(k, i), sigma(k, i), truth(k, i))});
    }
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::string csv = "timestamp,region_id,h_true,h_pred,sigma,covered\n";
    for (const auto& rec : r.records) {
      csv += io::format_timestamp(timestamp_of(p, rec.target)) + "," + rec.region_id + "," + fmt(rec.h_true) + "," +
             fmt(rec.h_pred) + "," + fmt(rec.sigma) + "," + (rec.covered ? "1" : "0") + "\n";
    }
    io::write_file_atomic(out_dir / "predictions.csv", csv);
    io::write_file_atomic(out_dir / "uncertainty.csv", uncertainty);
    io::write_file_atomic(out_dir / "metrics.json", metrics_json(r));
    if (p.config.plots) render(p, r.records, out_dir / "plots");
  }
  return r;
}

EvalReport run_eval(const Prepared& p, const std::filesystem::path& out_dir) {
  auto params = model::init_model(p.dims, derive_seed(p.config.seed(), kInitStream));
  const auto meta = checkpoint::load(out_dir / "checkpoint.txt", params);
  return run_eval(p, params, meta, out_dir);
}

std::string metrics_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["version"] = r.version;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["rmse"] = r.rmse;
  j["mape"] = r.mape.percent;
  j["picp"] = r.picp;
  j["mape_included_cells"] = r.mape.included;
  j["mape_excluded_cells"] = r.mape.excluded;
  j["test_cells"] = r.records.size();
  j["test_total"] = r.test_loss.total;
  j["test_quality_term"] = r.test_loss.quality_term;
  j["test_period_variance_term"] = r.test_loss.period_variance_term;
  j["test_final_variance_term"] = r.test_loss.final_variance_term;
  j["test_prediction_term"] = r.test_loss.prediction_term;
  j["test_l2_term"] = r.test_loss.l2_term;
  j["mean_u_internal_pure"] = r.mean_internal_pure;
  j["mean_u_internal_ood"] = r.mean_internal_ood;
  j["pure_samples"] = r.pure_samples;
  j["ood_samples"] = r.ood_samples;
  for (const auto& [key, value] : r.training) {
    if (key == "version" || key == "seed" || key == "config_hash") continue;
    try {
      const double v = io::parse_double(value, key);
      if (value.find_first_of(".eEn") == std::string::npos) {
        j["train_" + key] = static_cast<long long>(v);
      } else {
        j["train_" + key] = v;
      }
    } catch (const Error&) {
      j["train_" + key] = value;
    }
  }
  return j.dump(2) + "\n";
}

EvalReport run_experiment(const config::Config& c, const std::filesystem::path& out_dir) {
  const Prepared p = prepare(c);
  const auto trained = run_train(p, out_dir);
  return run_eval(p, trained.result.best, trained.metadata, out_dir);
}

EvalReport run_experiment(const std::filesystem::path& config_path, const std::filesystem::path& out_dir) {
  return run_experiment(config::load(config_path), out_dir);
}

std::string indicators_csv(const Prepared& p, long target, datagen::Layer layer) {
  const auto& g = p.geometry;
  if (target < datagen::first_admissible_target(g) || target >= p.dataset.mobility.intervals()) {
    fail(ErrorKind::InsufficientHistory, "target " + std::to_string(target) + " is not admissible");
  }
  const auto stack = graphcore::build_period_stack(target - 1, g.p, g.q, g.intervals_per_day);
  const auto clean = graphcore::materialize_periods(p.dataset.mobility.values, stack);
  const int count = stack.period_count();
  const Eigen::Index n = p.dataset.mobility.regions();
  Matrix stacked(static_cast<Eigen::Index>(count) * g.p, n);
  for (int m = 0; m < count; ++m) stacked.middleRows(static_cast<Eigen::Index>(m) * g.p, g.p) = clean[static_cast<std::size_t>(m)];
  const datagen::TurbulenceSpec spec{layer, p.config.turbulence.fraction(layer),
                                     datagen::sample_seed(derive_seed(p.config.seed(), kNoiseStream), target, layer)};
  const Matrix corrupted = datagen::inject_noise(stacked, spec, p.noise_scale);
  const Matrix quality = indicators::quality_indicator(stacked, corrupted).values;

  std::vector<Matrix> periods;
  for (int m = 0; m < count; ++m) periods.push_back(corrupted.middleRows(static_cast<Eigen::Index>(m) * g.p, g.p));
  const auto f = indicators::variance_fields(periods, p.neighbors);
  const Vector next = indicators::target_variance(p.dataset.mobility.values, p.neighbors, target, g.p, g.q,
                                                  g.intervals_per_day);

  const auto& ids = p.dataset.graph.region_ids();
  std::string csv = "region_id,period,kind,value\n";
  using indicators::IndicatorKind;
  auto row = [&](Eigen::Index i, const std::string& period, IndicatorKind kind, double v) {
    csv += ids[static_cast<std::size_t>(i)] + "," + period + "," + indicators::to_string(kind) + "," + fmt(v) + "\n";
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int m = 0; m < count; ++m) {
      const std::string period = std::to_string(m);
      row(i, period, IndicatorKind::Quality, indicators::period_average(quality.middleRows(static_cast<Eigen::Index>(m) * g.p, g.p))(i));
      row(i, period, IndicatorKind::VarS, f.spatial(m, i));
      row(i, period, IndicatorKind::VarEp, f.inter_period(m, i));
      row(i, period, IndicatorKind::VarIp, f.intra_period(m, i));
      row(i, period, IndicatorKind::VarST, f.st(m, i));
    }
    row(i, "next", IndicatorKind::VarST, next(i));
  }
  return csv;
}

void render_report(const Prepared& p, const std::filesystem::path& out_dir) {
  const auto table = io::read_csv(out_dir / "predictions.csv", "timestamp,region_id,h_true,h_pred,sigma,covered");
  const std::int64_t step = static_cast<std::int64_t>(p.dataset.mobility.interval_minutes) * 60;
  std::vector<IntervalRecord> records;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& f = table.rows[k];
    const std::string where = "predictions.csv line " + std::to_string(table.line_numbers[k]);
    IntervalRecord r;
    r.target = static_cast<long>((io::parse_timestamp(f[0], where) - p.dataset.mobility.start_time) / step);
    r.region_id = f[1];
    r.h_true = io::parse_double(f[2], where);
    r.h_pred = io::parse_double(f[3], where);
    r.sigma = io::parse_double(f[4], where);
    r.covered = f[5] == "1";
    records.push_back(std::move(r));
  }
  render(p, records, out_dir / "plots");
}

}  // namespace stua::experiment
