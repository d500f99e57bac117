#include "stua/csv_io.hpp"
#include "stua/errors.hpp"

#include "test_util.hpp"

#include <sys/wait.h>

#include <cstdlib>

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string output;
};

Run run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + STUA_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = stua::io::read_file(log);
  return r;
}

const char* kTiny =
    "[data]\nsource = synth\nregions = 4\ndays = 9\nintervals_per_day = 8\n"
    "[model]\np = 2\nq = 1\ngcn_hidden = 4\nlstm_hidden = 4\nembed_width = 3\nevolve_hidden = 4\nfm_hidden = 3\n"
    "[train]\nepochs = 2\n"
    "[eval]\nood_draws = 1\nplots = false\n";

class Cli : public ::testing::Test {
 protected:
  stua::testing::TempDir dir;
  std::string base() const { return "--config \"" + (dir / "c.ini").string() + "\" --out \"" + (dir / "out").string() + "\" "; }
};

TEST_F(Cli, SynthTrainEvalPipeline) {
  stua::testing::write_text(dir / "c.ini", kTiny);
  for (const char* sub : {"synth", "train", "eval"}) {
    const auto r = run_cli(base() + sub, dir / "log.txt");
    EXPECT_EQ(r.code, 0) << sub << ": " << r.output;
  }
  for (const char* f : {"data/mobility.csv", "checkpoint.txt", "metrics.json", "predictions.csv"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
}

TEST_F(Cli, MissingSourceExitsWithTheConfigCode) {
  stua::testing::write_text(dir / "c.ini", "[model]\np = 3\n");
  const auto r = run_cli(base() + "train", dir / "log.txt");
  EXPECT_EQ(r.code, stua::exit_code(stua::ErrorKind::InvalidConfig));
  EXPECT_NE(r.output.find("data.source"), std::string::npos) << r.output;
}

TEST_F(Cli, ErrorClassesHaveDistinctCodes) {
  stua::testing::write_text(dir / "c.ini", "[data]\nsource = synth\ndays = 7\n");
  const auto history = run_cli(base() + "train", dir / "log.txt");
  EXPECT_EQ(history.code, stua::exit_code(stua::ErrorKind::InsufficientHistory)) << history.output;
  stua::testing::write_text(dir / "c.ini", kTiny);
  const auto no_ckpt = run_cli(base() + "eval", dir / "log.txt");
  EXPECT_EQ(no_ckpt.code, stua::exit_code(stua::ErrorKind::Io)) << no_ckpt.output;
  EXPECT_NE(history.code, no_ckpt.code);
}

TEST_F(Cli, UsageErrorsAreRejected) {
  stua::testing::write_text(dir / "c.ini", kTiny);
  EXPECT_NE(run_cli(base(), dir / "log.txt").code, 0);
  EXPECT_NE(run_cli(base() + "dance", dir / "log.txt").code, 0);
}

TEST_F(Cli, IndicatorsWritesCsv) {
  stua::testing::write_text(dir / "c.ini", kTiny);
  const auto r = run_cli(base() + "indicators --layer noisy", dir / "log.txt");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "out" / "indicators.csv"));
}

}  // namespace
