#include "stua/config.hpp"

#include "test_util.hpp"

#include <algorithm>

namespace {

using namespace stua;

TEST(Config, MinimalFileTakesDefaults) {
  const auto c = config::parse("[data]\nsource = synth\n");
  EXPECT_EQ(c.source, "synth");
  EXPECT_EQ(c.synth.regions, 6);
  EXPECT_EQ(c.model.p, 6);
  EXPECT_EQ(c.model.q, 3);
  EXPECT_DOUBLE_EQ(c.rho, 0.6);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 0.001);
  EXPECT_DOUBLE_EQ(c.train_fraction, 0.6);
  EXPECT_DOUBLE_EQ(c.test_fraction, 0.3);
  EXPECT_DOUBLE_EQ(c.validation_fraction, 0.1);
}

TEST(Config, MissingSourceNamesTheKey) {
  try {
    config::parse("[model]\np = 3\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("data.source"), std::string::npos);
  }
}

TEST(Config, UnknownKeyIsRejected) {
  EXPECT_STUA_ERROR(config::parse("[data]\nsource = synth\ncolour = red\n"), ErrorKind::InvalidConfig);
}

TEST(Config, BadValuesAreRejected) {
  EXPECT_STUA_ERROR(config::parse("[data]\nsource = synth\n[model]\np = three\n"), ErrorKind::InvalidConfig);
  EXPECT_STUA_ERROR(config::parse("[data]\nsource = synth\n[train]\nlearning_rate = 0\n"), ErrorKind::InvalidConfig);
  EXPECT_STUA_ERROR(config::parse("[data]\nsource = synth\n[train]\ntrain_fraction = 0.7\n"),
                    ErrorKind::InvalidConfig);
  EXPECT_STUA_ERROR(config::parse("[data]\nsource = ftp\n"), ErrorKind::InvalidConfig);
  EXPECT_STUA_ERROR(config::parse("[data]\nsource = synth\n[train]\nshuffle = maybe\n"), ErrorKind::InvalidConfig);
}

TEST(Config, QuotedStringsAndRelativePaths) {
  const auto c = config::parse("[data]\nsource = \"csv\"\nmobility_csv = 'm.csv'\n", "/tmp/base");
  EXPECT_EQ(c.source, "csv");
  EXPECT_EQ(c.mobility_csv, std::filesystem::path("/tmp/base/m.csv"));
}

TEST(Config, CanonicalRoundTripsEveryKey) {
  const auto c = config::parse("[data]\nsource = synth\ndays = 12\n[model]\nrho = 0.25\n[train]\nseed = 7\n");
  const std::string text = config::canonical(c);
  std::string ini;
  std::string section;
  for (size_t pos = 0; pos < text.size();) {
    const size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    const size_t dot = line.find('.');
    const std::string s = line.substr(0, dot);
    if (s != section) ini += "[" + (section = s) + "]\n";
    ini += line.substr(dot + 1) + "\n";
  }
  const auto back = config::parse(ini);
  EXPECT_EQ(config::canonical(back), text);
  EXPECT_EQ(config::hash(back), config::hash(c));
}

TEST(Config, HashTracksValues) {
  const auto a = config::parse("[data]\nsource = synth\n");
  auto b = a;
  EXPECT_EQ(config::hash(a), config::hash(b));
  EXPECT_EQ(config::hash(a).size(), 16u);
  b.set_seed(a.seed() + 1);
  EXPECT_NE(config::hash(a), config::hash(b));
}

TEST(Config, KnownKeysCoverTheSections) {
  const auto keys = config::known_keys();
  for (const char* k : {"data.source", "model.p", "model.q", "model.rho", "train.learning_rate", "train.epochs",
                        "turbulence.layers", "eval.mape_floor"}) {
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
  }
}

TEST(Config, LoadReadsAFile) {
  stua::testing::TempDir dir;
  stua::testing::write_text(dir / "c.ini", "[data]\nsource = synth\nregions = 5\n");
  const auto c = config::load(dir / "c.ini");
  EXPECT_EQ(c.synth.regions, 5);
  EXPECT_EQ(c.regions_csv, dir / "regions.csv");
  EXPECT_STUA_ERROR(config::load(dir / "absent.ini"), ErrorKind::Io);
}

}  // namespace
