// stua command-line tool: data generation, training, evaluation, reports.

#include "stua/config.hpp"
#include "stua/csv_io.hpp"
#include "stua/datagen.hpp"
#include "stua/errors.hpp"
#include "stua/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::optional<long> seed;
  std::string out = "out";
};

stua::config::Config load_config(const Globals& g) {
  auto c = stua::config::load(g.config_path);
  if (g.seed) {
    if (*g.seed < 0) stua::fail(stua::ErrorKind::InvalidConfig, "--seed must be >= 0");
    c.set_seed(static_cast<std::uint64_t>(*g.seed));
  }
  return c;
}

void print_report(const stua::experiment::EvalReport& r) {
  std::printf("rmse %.6g  mape %.4g%% (%ld cells excluded)  picp %.4g\n", r.rmse, r.mape.percent,
              static_cast<long>(r.mape.excluded), r.picp);
  std::printf("mean U_I pure %.6g (%zu samples)  ood %.6g (%zu samples)\n", r.mean_internal_pure, r.pure_samples,
              r.mean_internal_ood, r.ood_samples);
}

int cmd_synth(const Globals& g) {
  const auto c = load_config(g);
  if (c.source != "synth") stua::fail(stua::ErrorKind::InvalidConfig, "synth requires data.source = synth");
  const auto data = stua::experiment::load_dataset(c);
  const fs::path dir = fs::path(g.out) / "data";
  fs::create_directories(dir);
  stua::datagen::write_dataset_csv(data, dir);
  std::printf("wrote %ld intervals x %ld regions to %s\n", static_cast<long>(data.mobility.intervals()),
              static_cast<long>(data.mobility.regions()), dir.c_str());
  return 0;
}

int cmd_ingest(const Globals& g, const std::string& regions, const std::string& mobility, const std::string& context,
               int interval_minutes) {
  auto c = load_config(g);
  const fs::path r = regions.empty() ? c.regions_csv : fs::path(regions);
  const fs::path m = mobility.empty() ? c.mobility_csv : fs::path(mobility);
  const fs::path x = context.empty() ? c.context_csv : fs::path(context);
  const auto data = stua::datagen::ingest_csv(r, m, x, interval_minutes > 0 ? interval_minutes : c.interval_minutes);
  const fs::path dir = fs::path(g.out) / "data";
  fs::create_directories(dir);
  stua::datagen::write_dataset_csv(data, dir);
  std::printf("ingested %ld intervals x %ld regions, %d context factors, %d-minute step; copy in %s\n",
              static_cast<long>(data.mobility.intervals()), static_cast<long>(data.mobility.regions()),
              data.context.categories(), data.mobility.interval_minutes, dir.c_str());
  return 0;
}

int cmd_train(const Globals& g) {
  const auto prep = stua::experiment::prepare(load_config(g));
  const auto o = stua::experiment::run_train(prep, g.out);
  for (const auto& e : o.result.history) {
    std::printf("epoch %3d  lr %.6g  train %.6g  val %.6g\n", e.epoch, e.learning_rate, e.train.total,
                e.validation.total);
  }
  std::printf("best epoch %d; checkpoint in %s\n", o.result.best_epoch, (fs::path(g.out) / "checkpoint.txt").c_str());
  return 0;
}

int cmd_eval(const Globals& g) {
  const auto prep = stua::experiment::prepare(load_config(g));
  print_report(stua::experiment::run_eval(prep, g.out));
  return 0;
}

int cmd_run(const Globals& g) {
  print_report(stua::experiment::run_experiment(load_config(g), g.out));
  return 0;
}

int cmd_indicators(const Globals& g, std::optional<long> target, const std::string& layer) {
  const auto prep = stua::experiment::prepare(load_config(g));
  const long t = target.value_or(static_cast<long>(prep.dataset.mobility.intervals()) - 1);
  const auto csv = stua::experiment::indicators_csv(prep, t, stua::datagen::parse_layer(layer));
  fs::create_directories(g.out);
  const fs::path path = fs::path(g.out) / "indicators.csv";
  stua::io::write_file_atomic(path, csv);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_report(const Globals& g) {
  const auto prep = stua::experiment::prepare(load_config(g));
  stua::experiment::render_report(prep, g.out);
  std::printf("plots in %s\n", (fs::path(g.out) / "plots").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal mobility prediction with uncertainty quantification"};
  app.set_version_flag("--version", stua::experiment::version());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override train.seed");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate the synthetic dataset into <out>/data");
  auto* ingest = app.add_subcommand("ingest", "Validate CSV inputs and write a normalized copy into <out>/data");
  std::string regions, mobility, context;
  int interval_minutes = 0;
  ingest->add_option("--regions", regions, "regions.csv (default: data.regions_csv)");
  ingest->add_option("--mobility", mobility, "mobility.csv (default: data.mobility_csv)");
  ingest->add_option("--context", context, "context.csv (default: data.context_csv)");
  ingest->add_option("--interval-minutes", interval_minutes, "Interval length; 0 infers it");
  auto* train = app.add_subcommand("train", "Train and write <out>/checkpoint.txt and metrics.jsonl");
  auto* eval = app.add_subcommand("eval", "Evaluate <out>/checkpoint.txt on the test split");
  auto* indicators = app.add_subcommand("indicators", "Dump indicator fields of one target as CSV");
  std::optional<long> target;
  std::string layer = "ood";
  indicators->add_option("--target", target, "Target interval index (default: last)");
  indicators->add_option("--layer", layer, "pure, noisy or ood")->capture_default_str();
  auto* report = app.add_subcommand("report", "Render plots from <out>/predictions.csv");
  auto* run = app.add_subcommand("run", "synth/ingest, train and eval in one go");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(g);
    if (ingest->parsed()) return cmd_ingest(g, regions, mobility, context, interval_minutes);
    if (train->parsed()) return cmd_train(g);
    if (eval->parsed()) return cmd_eval(g);
    if (indicators->parsed()) return cmd_indicators(g, target, layer);
    if (report->parsed()) return cmd_report(g);
    if (run->parsed()) return cmd_run(g);
  } catch (const stua::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stua::exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stua::exit_code(stua::ErrorKind::Io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
