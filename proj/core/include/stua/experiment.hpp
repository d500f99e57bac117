#pragma once

#include "stua/checkpoint.hpp"
#include "stua/config.hpp"
#include "stua/datagen.hpp"
#include "stua/indicators.hpp"
#include "stua/metrics.hpp"
#include "stua/model.hpp"
#include "stua/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stua::experiment {

/// Library version string recorded in artifacts.
std::string version();

/// Deterministic sub-seed for a named stream of the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

datagen::Dataset load_dataset(const config::Config& config);

struct Split {
  std::vector<long> train;
  std::vector<long> test;
  std::vector<long> validation;
};

/// Chronological split of the admissible targets: train first, then test,
/// then validation. Sizes are rounded; train and test are never empty.
Split split_targets(long first, long last, double train_fraction, double test_fraction);

/// Everything derived from config + data before training.
struct Prepared {
  config::Config config;
  datagen::Dataset dataset;
  datagen::SampleGeometry geometry;
  model::ModelDims dims;
  Split split;
  datagen::Standardization standardization;
  Eigen::RowVectorXd noise_scale;  // per-region std over the training prefix
  Matrix distances;
  indicators::NeighborSet neighbors;
};

Prepared prepare(const config::Config& config);
Prepared prepare(const config::Config& config, datagen::Dataset dataset);

std::vector<datagen::Sample> training_samples(const Prepared& prep);
std::vector<datagen::Sample> validation_samples(const Prepared& prep);
/// Pure test samples, one per test target.
std::vector<datagen::Sample> test_samples(const Prepared& prep);
/// `draws` corruptions per test target at the given layer.
std::vector<datagen::Sample> corrupted_test_samples(const Prepared& prep, datagen::Layer layer, int draws);

struct TrainOutcome {
  trainer::TrainResult result;
  checkpoint::Metadata metadata;
};

/// Trains from the seeded initialization; writes checkpoint.txt and
/// metrics.jsonl into `out_dir` when it is non-empty.
TrainOutcome run_train(const Prepared& prep, const std::filesystem::path& out_dir);

struct IntervalRecord {
  long target = 0;
  std::string region_id;
  double h_true = 0.0;
  double h_pred = 0.0;
  double sigma = 0.0;
  bool covered = false;
};

struct EvalReport {
  double rmse = 0.0;
  metrics::MapeResult mape;
  double picp = 0.0;
  trainer::LossBreakdown test_loss;  // mean over pure test samples, scaled units
  double mean_internal_pure = 0.0;
  double mean_internal_ood = 0.0;
  std::size_t pure_samples = 0;
  std::size_t ood_samples = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version;
  checkpoint::Metadata training;  // summary copied from the checkpoint
  std::vector<IntervalRecord> records;
};

/// Evaluates on the test split; writes metrics.json, predictions.csv,
/// uncertainty.csv and plots/ into `out_dir` when it is non-empty.
EvalReport run_eval(const Prepared& prep, const model::ModelParams& params, const checkpoint::Metadata& training,
                    const std::filesystem::path& out_dir);

/// Loads `out_dir`/checkpoint.txt and evaluates it.
EvalReport run_eval(const Prepared& prep, const std::filesystem::path& out_dir);

/// Metrics file content; byte-stable for identical inputs.
std::string metrics_json(const EvalReport& report);

/// data -> train -> eval with all artifacts under `out_dir`.
EvalReport run_experiment(const config::Config& config, const std::filesystem::path& out_dir);
EvalReport run_experiment(const std::filesystem::path& config_path, const std::filesystem::path& out_dir);

/// `region_id,period,kind,value` rows of sigma_qua and the variance views of
/// every period for one target, in persons per interval.
std::string indicators_csv(const Prepared& prep, long target, datagen::Layer layer);

/// Renders interval charts and heatmaps from predictions.csv in `out_dir`.
void render_report(const Prepared& prep, const std::filesystem::path& out_dir);

}  // namespace stua::experiment
