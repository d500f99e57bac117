#include "stua/checkpoint.hpp"

#include "stua/csv_io.hpp"

#include "test_util.hpp"

namespace {

using namespace stua;

model::ModelDims dims() {
  model::ModelDims d;
  d.regions = 4;
  d.p = 2;
  d.q = 1;
  d.context_categories = 2;
  return d.resolved();
}

std::vector<Matrix> flatten(const model::ModelParams& p) {
  std::vector<Matrix> out;
  model::visit_params(p, [&](const std::string&, const std::string&, const Matrix& m) { out.push_back(m); });
  return out;
}

TEST(Checkpoint, RoundTripIsExact) {
  stua::testing::TempDir dir;
  const auto a = model::init_model(dims(), 1);
  checkpoint::save(dir / "ck.txt", a, {{"epoch", "12"}, {"note", "two words"}});
  auto b = model::init_model(dims(), 2);
  const auto meta = checkpoint::load(dir / "ck.txt", b);
  EXPECT_EQ(flatten(a), flatten(b));
  EXPECT_EQ(meta.at("epoch"), "12");
  EXPECT_EQ(meta.at("note"), "two words");
}

TEST(Checkpoint, SavingIsByteStable) {
  stua::testing::TempDir dir;
  const auto a = model::init_model(dims(), 9);
  checkpoint::save(dir / "a.txt", a);
  checkpoint::save(dir / "b.txt", a);
  EXPECT_EQ(io::read_file(dir / "a.txt"), io::read_file(dir / "b.txt"));
}

TEST(Checkpoint, ShapeMismatchIsRejected) {
  stua::testing::TempDir dir;
  checkpoint::save(dir / "ck.txt", model::init_model(dims(), 1));
  auto other = dims();
  other.regions = 5;
  auto p = model::init_model(other.resolved(), 1);
  EXPECT_STUA_ERROR(checkpoint::load(dir / "ck.txt", p), ErrorKind::Checkpoint);
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  stua::testing::TempDir dir;
  auto p = model::init_model(dims(), 1);
  stua::testing::write_text(dir / "junk.txt", "hello\n");
  EXPECT_STUA_ERROR(checkpoint::load(dir / "junk.txt", p), ErrorKind::Checkpoint);
  checkpoint::save(dir / "ck.txt", p);
  std::string text = io::read_file(dir / "ck.txt");
  stua::testing::write_text(dir / "cut.txt", text.substr(0, text.size() / 2));
  EXPECT_STUA_ERROR(checkpoint::load(dir / "cut.txt", p), ErrorKind::Checkpoint);
  stua::testing::write_text(dir / "v2.txt", "stua-checkpoint 2\nend\n");
  EXPECT_STUA_ERROR(checkpoint::load(dir / "v2.txt", p), ErrorKind::Checkpoint);
}

TEST(Checkpoint, MetadataWithNewlineIsRefused) {
  stua::testing::TempDir dir;
  EXPECT_STUA_ERROR(checkpoint::save(dir / "ck.txt", model::init_model(dims(), 1), {{"k", "a\nb"}}),
                    ErrorKind::Checkpoint);
}

}  // namespace
