#include <benchmark/benchmark.h>

#include "stua/config.hpp"
#include "stua/experiment.hpp"
#include "stua/trainer.hpp"

namespace {

// Smoke geometry: 6 regions, 10 days of hourly data, p = 6, q = 3.
struct Fixture {
  stua::experiment::Prepared prep;
  std::vector<stua::datagen::Sample> samples;
  stua::model::ModelParams params;

  Fixture()
      : prep(stua::experiment::prepare(
            stua::config::parse("[data]\nsource = synth\n[turbulence]\nlayers = pure,noisy,ood\n"))),
        samples(stua::experiment::training_samples(prep)),
        params(stua::model::init_model(prep.dims, 42)) {}
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_Forward(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto out = stua::model::predict(f.samples.front(), f.params);
    benchmark::DoNotOptimize(out.sigma_hat.data());
  }
}
BENCHMARK(BM_Forward);

void BM_Gradient(benchmark::State& state) {
  const auto& f = fixture();
  auto grads = stua::trainer::zero_like(f.params);
  for (auto _ : state) {
    auto loss = stua::trainer::accumulate_gradient(f.samples.front(), f.params, grads);
    benchmark::DoNotOptimize(loss.total);
  }
}
BENCHMARK(BM_Gradient);

void BM_TrainEpoch(benchmark::State& state) {
  const auto& f = fixture();
  stua::trainer::TrainConfig tc = f.prep.config.train;
  tc.epochs = 1;
  for (auto _ : state) {
    auto r = stua::trainer::train(f.params, f.samples, {}, tc);
    benchmark::DoNotOptimize(r.best_epoch);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.samples.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
