#pragma once

#include "stua/datagen.hpp"
#include "stua/model.hpp"
#include "stua/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stua::gradcheck {

struct MicroSpec {
  int regions = 4;
  int p = 2;
  int q = 1;
  int context_factors = 2;
  int intervals_per_day = 4;
  int hidden = 3;
  double step = 1e-5;
  /// Floor of the relative-error denominator max(|analytic|, |numeric|, floor).
  double denominator_floor = 1e-6;
};

struct GroupError {
  std::string group;
  double max_relative_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries = 0;
};

struct Report {
  std::vector<GroupError> groups;
  double max_relative_error() const;
};

/// Small model and one noisy sample drawn from the synthetic generator.
struct MicroInstance {
  model::ModelParams params;
  datagen::Sample sample;
};

/// Every parameter (gate included) drawn at random so no path is inert.
MicroInstance make_micro_instance(const MicroSpec& spec, std::uint64_t seed);

/// Central differences against the tape gradient of the loss for every
/// entry of every parameter group.
Report check(const MicroInstance& instance, const MicroSpec& spec, const trainer::LossTerms& terms = {});
Report gradcheck(const MicroSpec& spec, std::uint64_t seed);

}  // namespace stua::gradcheck
