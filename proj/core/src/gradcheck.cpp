#include "stua/gradcheck.hpp"

#include "stua/graphcore.hpp"
#include "stua/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace stua::gradcheck {

double Report::max_relative_error() const {
  double m = 0.0;
  for (const auto& g : groups) m = std::max(m, g.max_relative_error);
  return m;
}

MicroInstance make_micro_instance(const MicroSpec& spec, std::uint64_t seed) {
  datagen::SynthConfig sc;
  sc.regions = spec.regions;
  sc.intervals_per_day = spec.intervals_per_day;
  sc.days = 9;
  sc.context_factors = spec.context_factors;
  sc.event_rate = 0.1;
  sc.weather_weight = 0.2;
  sc.noise_weight = 0.05;
  const datagen::Dataset data = datagen::synth_mobility(sc, seed);

  datagen::SampleGeometry g;
  g.p = spec.p;
  g.q = spec.q;
  g.intervals_per_day = spec.intervals_per_day;
  const auto st = datagen::fit_standardization(data, data.mobility.intervals());
  const auto scale = datagen::region_std(data.mobility.values);
  const Matrix dist = graphcore::distance_matrix(data.graph);
  const auto neighbors = indicators::nearest_neighbors(data.graph);
  const long target = datagen::first_admissible_target(g) + 1;

  MicroInstance inst;
  inst.sample = datagen::make_sample(data, dist, neighbors, g, st, scale, target, datagen::Layer::Noisy, 0.3,
                                     datagen::sample_seed(seed, target, datagen::Layer::Noisy));

  model::ModelDims d;
  d.regions = spec.regions;
  d.p = spec.p;
  d.q = spec.q;
  d.context_categories = spec.context_factors;
  d.predictor.gcn_hidden = spec.hidden;
  d.predictor.lstm_hidden = spec.hidden;
  d.uncertainty.embed_width = spec.hidden;
  d.uncertainty.field_width = 2;
  d.uncertainty.interaction_width = 2;
  d.uncertainty.fm_hidden = spec.hidden;
  d.uncertainty.evolve_hidden = spec.hidden;
  inst.params = model::init_model(d, seed);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  model::visit_params(inst.params, [&](const std::string&, const std::string&, Matrix& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  });
  return inst;
}

Report check(const MicroInstance& inst, const MicroSpec& spec, const trainer::LossTerms& terms) {
  model::ModelParams params = inst.params;
  auto grads = trainer::zero_like(params);
  trainer::accumulate_gradient(inst.sample, params, grads, terms);

  std::map<std::string, GroupError> by_group;
  std::vector<std::string> order;
  std::size_t k = 0;
  model::visit_params(params, [&](const std::string& group, const std::string&, Matrix& m) {
    auto [it, inserted] = by_group.try_emplace(group);
    if (inserted) {
      order.push_back(group);
      it->second.group = group;
    }
    GroupError& ge = it->second;
    for (Eigen::Index e = 0; e < m.size(); ++e) {
      const double saved = m.data()[e];
      m.data()[e] = saved + spec.step;
      const double up = trainer::sample_loss(inst.sample, params, terms).total;
      m.data()[e] = saved - spec.step;
      const double down = trainer::sample_loss(inst.sample, params, terms).total;
      m.data()[e] = saved;
      const double numeric = (up - down) / (2.0 * spec.step);
      const double analytic = grads[k].data()[e];
      const double abs_err = std::abs(analytic - numeric);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), spec.denominator_floor});
      ge.max_abs_error = std::max(ge.max_abs_error, abs_err);
      ge.max_relative_error = std::max(ge.max_relative_error, abs_err / denom);
      ++ge.entries;
    }
    ++k;
  });

  Report r;
  for (const auto& name : order) r.groups.push_back(by_group[name]);
  return r;
}

Report gradcheck(const MicroSpec& spec, std::uint64_t seed) { return check(make_micro_instance(spec, seed), spec); }

}  // namespace stua::gradcheck
