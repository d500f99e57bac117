#pragma once

#include "stua/autodiff.hpp"
#include "stua/graphcore.hpp"
#include "stua/indicators.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stua::datagen {

/// Active persons per interval (rows) and region (columns).
struct MobilityTensor {
  Matrix values;
  int interval_minutes = 60;
  std::int64_t start_time = 0;  // seconds since epoch of row 0

  Eigen::Index intervals() const noexcept { return values.rows(); }
  Eigen::Index regions() const noexcept { return values.cols(); }
};

/// Q context factors, each intervals x regions.
struct ContextTensor {
  std::vector<Matrix> factors;
  std::vector<std::string> names;

  int categories() const noexcept { return static_cast<int>(factors.size()); }
  /// Concatenated raw width of one period: p values per factor.
  int concatenated_width(int p) const noexcept { return categories() * p; }
};

struct Dataset {
  graphcore::UrbanGraph graph;
  MobilityTensor mobility;
  ContextTensor context;

  int intervals_per_day() const;
};

struct SynthConfig {
  int regions = 6;
  int days = 10;
  int intervals_per_day = 24;
  double base_amplitude = 100.0;
  double daily_weight = 0.5;
  double weekly_weight = 0.2;
  double event_rate = 0.0;
  double event_amplitude = 0.5;
  double weather_weight = 0.0;
  double noise_weight = 0.0;
  int context_factors = 3;
  double extent_km = 10.0;
  std::int64_t start_time = 1483228800;  // 2017-01-01T00:00:00Z
};

/// Names of the synthetic context factors, in emission order.
std::span<const char* const> synthetic_factor_names();

/// Daily + weekly harmonics per region with event bumps, weather damping and
/// optional Gaussian noise, clipped at 0. Deterministic in `seed`.
Dataset synth_mobility(const SynthConfig& config, std::uint64_t seed);

/// Loads regions.csv, mobility.csv and context.csv onto a regular time axis.
/// `interval_minutes <= 0` infers the step from the smallest timestamp gap.
Dataset ingest_csv(const std::filesystem::path& regions, const std::filesystem::path& mobility,
                   const std::filesystem::path& context, int interval_minutes);

/// Writes regions.csv, mobility.csv and context.csv into `dir`.
void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& dir);

enum class Layer : int { Pure = 0, Noisy = 1, Ood = 2 };
const char* to_string(Layer layer);
Layer parse_layer(const std::string& name);

struct TurbulenceSpec {
  Layer layer = Layer::Pure;
  double noise_std_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// clip(window + perturbation, 0, inf).
Matrix apply_perturbation(const Matrix& window, const Matrix& perturbation);

/// Adds N(0, (fraction * scale_r)^2) to every cell of region column r and
/// clips at 0. `region_scale` defaults to the window's own per-region
/// population std when empty. The pure layer returns the input unchanged.
Matrix inject_noise(const Matrix& window, const TurbulenceSpec& spec, const Eigen::RowVectorXd& region_scale = {});

/// Per-column population standard deviation.
Eigen::RowVectorXd region_std(const Matrix& series);

/// Per-sample seed derived from the base seed, target index and layer.
std::uint64_t sample_seed(std::uint64_t base, long target, Layer layer);

/// Scales fitted on the training prefix.
struct Standardization {
  double mobility_scale = 1.0;
  Vector context_mean;
  Vector context_std;
};
Standardization fit_standardization(const Dataset& dataset, Eigen::Index prefix_rows);

struct SampleGeometry {
  int p = 6;
  int q = 3;
  int intervals_per_day = 24;
  double rho = 0.6;
  double flow_floor = graphcore::kDefaultFlowFloor;
};

struct TurbulenceSchedule {
  std::vector<Layer> layers{Layer::Pure, Layer::Noisy, Layer::Ood};
  double noisy_fraction = 0.05;
  double ood_fraction = 0.5;

  double fraction(Layer layer) const;
};

/// One training/evaluation example. Mobility-derived quantities are divided
/// by the mobility scale; contexts are standardized.
struct Sample {
  long target = 0;  // T + 1
  Layer layer = Layer::Pure;
  std::vector<Matrix> periods;                 // q+2 blocks, p x N, possibly corrupted
  std::vector<std::vector<Matrix>> contexts;   // [period][factor] p x N
  std::vector<Matrix> period_adjacency;        // q+2 normalized N x N
  Matrix daily_adjacency;                      // normalized mean over daily periods (empty when q = 0)
  Vector target_mobility;                      // N
  Matrix quality;                              // (q+2) x N, sigma_qua per period
  Matrix period_variance;                      // (q+2) x N, var_ST per period
  Vector target_variance;                      // N, var_ST at T + 1
};

/// Admissible target indices: enough history for a period stack at T = target-1.
long first_admissible_target(const SampleGeometry& geometry);

Sample make_sample(const Dataset& dataset, const Matrix& distances, const indicators::NeighborSet& neighbors,
                   const SampleGeometry& geometry, const Standardization& standardization,
                   const Eigen::RowVectorXd& noise_scale, long target, Layer layer, double noise_fraction,
                   std::uint64_t seed);

/// For each target, emits one sample per scheduled layer (targets outer,
/// layers inner).
std::vector<Sample> make_training_samples(const Dataset& dataset, const SampleGeometry& geometry,
                                          const TurbulenceSchedule& schedule, std::span<const long> targets,
                                          const Standardization& standardization,
                                          const Eigen::RowVectorXd& noise_scale, std::uint64_t base_seed);

}  // namespace stua::datagen
