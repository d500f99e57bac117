#pragma once

#include "stua/datagen.hpp"
#include "stua/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace stua::trainer {

struct LossBreakdown {
  double quality_term = 0.0;
  double period_variance_term = 0.0;
  double final_variance_term = 0.0;
  double prediction_term = 0.0;
  double l2_term = 0.0;
  double total = 0.0;

  LossBreakdown& operator+=(const LossBreakdown& o);
  LossBreakdown& operator/=(double d);
};

/// Which summands enter the total. Disabling `quality` mirrors training
/// without turbulence; the other switches serve gradient checking.
struct LossTerms {
  bool quality = true;
  bool period_variance = true;
  bool final_variance = true;
  bool prediction = true;
  bool l2 = true;
};

/// Model outputs consumed by the loss. Period fields are (q+2) x N.
struct LossInputs {
  Matrix internal;
  Matrix overall;
  Vector sigma_hat;
  Vector h_pred;
};

/// Labels: sigma_qua and var_ST per period, var_ST and H at T + 1.
struct LossLabels {
  Matrix quality;
  Matrix period_variance;
  Vector target_variance;
  Vector target_mobility;
};

LossLabels labels_of(const datagen::Sample& sample);
LossInputs inputs_of(const model::PredictionBundle& bundle);

LossBreakdown compute_loss(const LossInputs& out, const LossLabels& labels, const LossTerms& terms = {});

struct LossVars {
  ad::Var total;
  ad::Var quality, period_variance, final_variance, prediction, l2;
};

/// Tape form; the breakdown can be read back through `breakdown`.
LossVars compute_loss(ad::Tape& tape, const model::ForwardVars& out, const LossLabels& labels,
                      const LossTerms& terms = {});
LossBreakdown breakdown(const ad::Tape& tape, const LossVars& vars);

/// Loss of one sample with current parameters.
LossBreakdown sample_loss(const datagen::Sample& sample, const model::ModelParams& params, const LossTerms& terms = {});
/// Mean per-sample loss over a set.
LossBreakdown mean_loss(std::span<const datagen::Sample> samples, const model::ModelParams& params,
                        const LossTerms& terms = {});

/// Accumulates d(loss)/d(param) of one sample into `grads` (visit order).
LossBreakdown accumulate_gradient(const datagen::Sample& sample, const model::ModelParams& params,
                                  std::vector<Matrix>& grads, const LossTerms& terms = {});

/// Zero matrices shaped like every parameter, in visit order.
std::vector<Matrix> zero_like(const model::ModelParams& params);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const model::ModelParams& params, AdamConfig config = {});
  void step(model::ModelParams& params, const std::vector<Matrix>& grads, double learning_rate);
  long steps() const noexcept { return t_; }

 private:
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

struct TrainConfig {
  double learning_rate = 0.001;
  double decay_factor = 0.98;
  int decay_every = 10;
  int epochs = 60;
  int batch_size = 4;
  std::uint64_t seed = 42;
  bool shuffle = true;
  bool quality_enabled = true;
  std::filesystem::path metrics_log;  // metrics.jsonl; empty to skip

  void validate() const;
};

/// Learning rate in effect during 1-based `epoch`.
double learning_rate_at(const TrainConfig& config, int epoch);

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  LossBreakdown train;
  LossBreakdown validation;
};

struct TrainResult {
  model::ModelParams best;
  model::ModelParams last;
  int best_epoch = 0;  // 0 when no epoch ran; the last epoch without validation data
  LossBreakdown initial_train;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on the mean batch loss. Epoch losses are measured after the epoch's
/// updates on the full train and validation sets. Throws NonFiniteLoss.
TrainResult train(const model::ModelParams& init, std::span<const datagen::Sample> train_set,
                  std::span<const datagen::Sample> validation_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace stua::trainer
