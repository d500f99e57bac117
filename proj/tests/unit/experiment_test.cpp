#include "stua/experiment.hpp"

#include "stua/csv_io.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <set>

namespace {

using namespace stua;
namespace fs = std::filesystem;

const char* kTiny =
    "[data]\nsource = synth\nregions = 4\ndays = 9\nintervals_per_day = 8\n"
    "[model]\np = 2\nq = 1\ngcn_hidden = 4\nlstm_hidden = 4\nembed_width = 3\nevolve_hidden = 4\nfm_hidden = 3\n"
    "[train]\nepochs = 2\nseed = 11\n"
    "[turbulence]\nlayers = pure,ood\n"
    "[eval]\nood_draws = 2\n";

TEST(SplitTargets, ChronologicalAndComplete) {
  const auto s = experiment::split_targets(10, 109, 0.6, 0.3);
  EXPECT_EQ(s.train.size(), 60u);
  EXPECT_EQ(s.test.size(), 30u);
  EXPECT_EQ(s.validation.size(), 10u);
  EXPECT_EQ(s.train.front(), 10);
  EXPECT_EQ(s.test.front(), 70);
  EXPECT_EQ(s.validation.back(), 109);
}

TEST(SplitTargets, NeverEmptiesTrainOrTest) {
  const auto s = experiment::split_targets(0, 1, 0.99, 0.01);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_STUA_ERROR(experiment::split_targets(3, 3, 0.6, 0.3), ErrorKind::InsufficientHistory);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s) seen.insert(experiment::derive_seed(42, s));
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_EQ(experiment::derive_seed(1, 2), experiment::derive_seed(1, 2));
  EXPECT_NE(experiment::derive_seed(1, 2), experiment::derive_seed(2, 2));
}

TEST(Prepare, SamplesMatchTheSplit) {
  const auto prep = experiment::prepare(config::parse(kTiny));
  EXPECT_EQ(prep.dims.regions, 4);
  EXPECT_EQ(experiment::training_samples(prep).size(), 2 * prep.split.train.size());
  EXPECT_EQ(experiment::test_samples(prep).size(), prep.split.test.size());
  EXPECT_EQ(experiment::corrupted_test_samples(prep, datagen::Layer::Ood, 3).size(), 3 * prep.split.test.size());
  EXPECT_EQ(experiment::validation_samples(prep).size(), 2 * prep.split.validation.size());
  EXPECT_LT(prep.split.train.back(), prep.split.test.front());
}

TEST(Prepare, TooShortHistoryIsReported) {
  EXPECT_STUA_ERROR(experiment::prepare(config::parse("[data]\nsource = synth\ndays = 7\n")),
                    ErrorKind::InsufficientHistory);
}

class Pipeline : public ::testing::Test {
 protected:
  stua::testing::TempDir dir;
};

TEST_F(Pipeline, WritesTheArtifacts) {
  const auto r = experiment::run_experiment(config::parse(kTiny), dir.path());
  for (const char* f : {"metrics.json", "predictions.csv", "uncertainty.csv", "checkpoint.txt", "metrics.jsonl"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_TRUE(fs::exists(dir / "plots" / "heatmap_sigma.png"));
  EXPECT_GE(r.picp, 0.0);
  EXPECT_LE(r.picp, 1.0);
  EXPECT_EQ(r.ood_samples, 2 * r.pure_samples);
  EXPECT_EQ(r.records.size(), r.pure_samples * 4);
  for (const auto& rec : r.records) EXPECT_EQ(rec.covered, metrics::covered(rec.h_pred, rec.sigma, rec.h_true));
  const std::string csv = io::read_file(dir / "predictions.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "timestamp,region_id,h_true,h_pred,sigma,covered");
  const std::string jsonl = io::read_file(dir / "metrics.jsonl");
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 2);
}

TEST_F(Pipeline, MetricsJsonIsByteStable) {
  experiment::run_experiment(config::parse(kTiny), dir / "a");
  experiment::run_experiment(config::parse(kTiny), dir / "b");
  EXPECT_EQ(io::read_file(dir / "a" / "metrics.json"), io::read_file(dir / "b" / "metrics.json"));
}

TEST_F(Pipeline, EvalFromCheckpointMatches) {
  const auto prep = experiment::prepare(config::parse(kTiny));
  const auto direct = experiment::run_experiment(config::parse(kTiny), dir.path());
  const auto reloaded = experiment::run_eval(prep, dir.path());
  EXPECT_DOUBLE_EQ(reloaded.rmse, direct.rmse);
  EXPECT_DOUBLE_EQ(reloaded.picp, direct.picp);
}

TEST_F(Pipeline, IndicatorsCsvHasEveryRegionAndPeriod) {
  const auto prep = experiment::prepare(config::parse(kTiny));
  const std::string csv = experiment::indicators_csv(prep, prep.split.test.front(), datagen::Layer::Ood);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "region_id,period,kind,value");
  EXPECT_GT(std::count(csv.begin(), csv.end(), '\n'), 4 * 3);
}

TEST_F(Pipeline, MissingCheckpointIsAnIoError) {
  const auto prep = experiment::prepare(config::parse(kTiny));
  EXPECT_THROW(experiment::run_eval(prep, dir / "nothing"), Error);
}

}  // namespace
