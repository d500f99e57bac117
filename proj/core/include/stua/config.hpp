#pragma once

#include "stua/datagen.hpp"
#include "stua/model.hpp"
#include "stua/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stua::config {

/// Experiment configuration. The file is INI-style text with sections
/// [data], [model], [train], [turbulence] and [eval]; string values may be
/// quoted. `data.source` is required, every other key has a default.
struct Config {
  // [data]
  std::string source;  // "synth" or "csv"
  datagen::SynthConfig synth;
  std::filesystem::path regions_csv = "regions.csv";
  std::filesystem::path mobility_csv = "mobility.csv";
  std::filesystem::path context_csv = "context.csv";
  int interval_minutes = 0;  // 0 infers the step

  // [model]
  model::ModelDims model;
  double rho = 0.6;
  double flow_floor = 1.0;

  // [train]
  trainer::TrainConfig train;
  double train_fraction = 0.6;
  double test_fraction = 0.3;
  double validation_fraction = 0.1;

  // [turbulence]
  datagen::TurbulenceSchedule turbulence;

  // [eval]
  double mape_floor = 1.0;
  int ood_draws = 5;
  bool plots = true;

  std::uint64_t seed() const noexcept { return train.seed; }
  void set_seed(std::uint64_t seed) noexcept { train.seed = seed; }
  void validate() const;
};

Config parse(const std::string& text, const std::filesystem::path& base_dir = {});
/// Relative CSV paths resolve against the config file's directory.
Config load(const std::filesystem::path& path);

/// Every key with its resolved value, one `section.key = value` per line in
/// a fixed order.
std::string canonical(const Config& config);
/// FNV-1a 64 of the canonical text, 16 hex digits.
std::string hash(const Config& config);

/// Documented keys, `section.key`.
std::vector<std::string> known_keys();

}  // namespace stua::config
