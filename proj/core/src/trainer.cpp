#include "stua/trainer.hpp"

#include "stua/csv_io.hpp"
#include "stua/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace stua::trainer {

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  quality_term += o.quality_term;
  period_variance_term += o.period_variance_term;
  final_variance_term += o.final_variance_term;
  prediction_term += o.prediction_term;
  l2_term += o.l2_term;
  total += o.total;
  return *this;
}

LossBreakdown& LossBreakdown::operator/=(double d) {
  quality_term /= d;
  period_variance_term /= d;
  final_variance_term /= d;
  prediction_term /= d;
  l2_term /= d;
  total /= d;
  return *this;
}

LossLabels labels_of(const datagen::Sample& s) {
  return {s.quality, s.period_variance, s.target_variance, s.target_mobility};
}

LossInputs inputs_of(const model::PredictionBundle& b) { return {b.internal, b.overall, b.sigma_hat, b.h_recal}; }

namespace {

void check_shapes(Eigen::Index periods, Eigen::Index regions, const LossLabels& l) {
  if (l.quality.rows() != periods || l.quality.cols() != regions || l.period_variance.rows() != periods ||
      l.period_variance.cols() != regions || l.target_variance.size() != regions ||
      l.target_mobility.size() != regions) {
    fail(ErrorKind::DimensionMismatch, "compute_loss: outputs and labels differ in shape");
  }
}

}  // namespace

LossBreakdown compute_loss(const LossInputs& out, const LossLabels& labels, const LossTerms& terms) {
  const Eigen::Index n = out.sigma_hat.size();
  if (out.internal.rows() != out.overall.rows() || out.internal.cols() != n || out.overall.cols() != n ||
      out.h_pred.size() != n) {
    fail(ErrorKind::DimensionMismatch, "compute_loss: inconsistent output shapes");
  }
  check_shapes(out.internal.rows(), n, labels);
  LossBreakdown b;
  if (terms.quality) b.quality_term = (out.internal - labels.quality).squaredNorm();
  if (terms.period_variance) b.period_variance_term = (out.overall - labels.period_variance).squaredNorm();
  if (terms.final_variance) b.final_variance_term = (out.sigma_hat - labels.target_variance).squaredNorm();
  if (terms.prediction) b.prediction_term = (out.h_pred - labels.target_mobility).squaredNorm();
  if (terms.l2) b.l2_term = out.sigma_hat.squaredNorm();
  b.total = b.quality_term + b.period_variance_term + b.final_variance_term + b.prediction_term + b.l2_term;
  return b;
}

LossVars compute_loss(ad::Tape& tape, const model::ForwardVars& out, const LossLabels& labels, const LossTerms& terms) {
  const auto periods = static_cast<Eigen::Index>(out.internal.size());
  const Eigen::Index n = tape.value(out.sigma_hat).rows();
  check_shapes(periods, n, labels);

  auto period_sum = [&](const std::vector<ad::Var>& vars, const Matrix& target) {
    ad::Var acc;
    for (Eigen::Index m = 0; m < periods; ++m) {
      ad::Var diff = tape.sub(vars[static_cast<std::size_t>(m)], tape.constant(target.row(m).transpose()));
      ad::Var sq = tape.sum_squares(diff);
      acc = acc.valid() ? tape.add(acc, sq) : sq;
    }
    return acc;
  };

  LossVars v;
  std::vector<ad::Var> parts;
  if (terms.quality) parts.push_back(v.quality = period_sum(out.internal, labels.quality));
  if (terms.period_variance) parts.push_back(v.period_variance = period_sum(out.overall, labels.period_variance));
  if (terms.final_variance) {
    parts.push_back(v.final_variance = tape.sum_squares(tape.sub(out.sigma_hat, tape.constant(labels.target_variance))));
  }
  if (terms.prediction) {
    parts.push_back(v.prediction = tape.sum_squares(tape.sub(out.h_recal, tape.constant(labels.target_mobility))));
  }
  if (terms.l2) parts.push_back(v.l2 = tape.sum_squares(out.sigma_hat));
  if (parts.empty()) {
    v.total = tape.constant(Matrix::Zero(1, 1));
  } else {
    v.total = parts.front();
    for (std::size_t k = 1; k < parts.size(); ++k) v.total = tape.add(v.total, parts[k]);
  }
  return v;
}

LossBreakdown breakdown(const ad::Tape& tape, const LossVars& v) {
  auto get = [&](ad::Var x) { return x.valid() ? tape.scalar(x) : 0.0; };
  LossBreakdown b;
  b.quality_term = get(v.quality);
  b.period_variance_term = get(v.period_variance);
  b.final_variance_term = get(v.final_variance);
  b.prediction_term = get(v.prediction);
  b.l2_term = get(v.l2);
  b.total = tape.scalar(v.total);
  return b;
}

LossBreakdown sample_loss(const datagen::Sample& s, const model::ModelParams& params, const LossTerms& terms) {
  return compute_loss(inputs_of(model::predict(s, params)), labels_of(s), terms);
}

LossBreakdown mean_loss(std::span<const datagen::Sample> samples, const model::ModelParams& params,
                        const LossTerms& terms) {
  LossBreakdown acc;
  if (samples.empty()) return acc;
  for (const auto& s : samples) acc += sample_loss(s, params, terms);
  acc /= static_cast<double>(samples.size());
  return acc;
}

std::vector<Matrix> zero_like(const model::ModelParams& params) {
  std::vector<Matrix> out;
  model::visit_params(params, [&](const std::string&, const std::string&, const Matrix& m) {
    out.push_back(Matrix::Zero(m.rows(), m.cols()));
  });
  return out;
}

LossBreakdown accumulate_gradient(const datagen::Sample& s, const model::ModelParams& params, std::vector<Matrix>& grads,
                                  const LossTerms& terms) {
  ad::Tape tape;
  const auto out = model::forward(tape, s, params);
  const auto loss = compute_loss(tape, out, labels_of(s), terms);
  const LossBreakdown b = breakdown(tape, loss);
  if (!std::isfinite(b.total)) fail(ErrorKind::NonFiniteLoss, "loss became non-finite at target " + std::to_string(s.target));
  tape.backward(loss.total);
  std::size_t k = 0;
  model::visit_params(params, [&](const std::string&, const std::string&, const Matrix& m) {
    if (const Matrix* g = tape.gradient(m)) grads.at(k) += *g;
    ++k;
  });
  return b;
}

Adam::Adam(const model::ModelParams& params, AdamConfig config) : config_(config), m_(zero_like(params)), v_(m_) {}

void Adam::step(model::ModelParams& params, const std::vector<Matrix>& grads, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  std::size_t k = 0;
  model::visit_params(params, [&](const std::string&, const std::string&, Matrix& p) {
    const Matrix& g = grads.at(k);
    m_[k] = config_.beta1 * m_[k] + (1.0 - config_.beta1) * g;
    v_[k] = config_.beta2 * v_[k] + (1.0 - config_.beta2) * g.cwiseProduct(g);
    if (lr != 0.0) {
      p.array() -= lr * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + config_.epsilon);
    }
    ++k;
  });
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) fail(ErrorKind::InvalidConfig, "train.learning_rate must be positive");
  if (!(decay_factor > 0.0)) fail(ErrorKind::InvalidConfig, "train.decay_factor must be positive");
  if (decay_every < 1) fail(ErrorKind::InvalidConfig, "train.decay_every must be >= 1");
  if (epochs < 0) fail(ErrorKind::InvalidConfig, "train.epochs must be >= 0");
  if (batch_size < 1) fail(ErrorKind::InvalidConfig, "train.batch_size must be >= 1");
}

double learning_rate_at(const TrainConfig& c, int epoch) {
  const int decays = std::max(0, epoch - 1) / c.decay_every;
  return c.learning_rate * std::pow(c.decay_factor, decays);
}

namespace {

nlohmann::ordered_json to_json(const LossBreakdown& b) {
  return {{"total", b.total},
          {"quality_term", b.quality_term},
          {"period_variance_term", b.period_variance_term},
          {"final_variance_term", b.final_variance_term},
          {"prediction_term", b.prediction_term},
          {"l2_term", b.l2_term}};
}

void check_finite(const LossBreakdown& b, const char* what) {
  if (!std::isfinite(b.total)) fail(ErrorKind::NonFiniteLoss, std::string(what) + " loss is non-finite");
}

}  // namespace

TrainResult train(const model::ModelParams& init, std::span<const datagen::Sample> train_set,
                  std::span<const datagen::Sample> validation_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) fail(ErrorKind::InvalidConfig, "training set is empty");
  const LossTerms terms{.quality = config.quality_enabled};

  TrainResult r;
  r.best = init;
  r.last = init;
  r.initial_train = mean_loss(train_set, init, terms);
  check_finite(r.initial_train, "initial");

  std::string log;
  Adam adam(r.last);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5bd1e995ULL);
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = learning_rate_at(config, epoch);
    if (config.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      auto grads = zero_like(r.last);
      for (std::size_t k = start; k < stop; ++k) accumulate_gradient(train_set[order[k]], r.last, grads, terms);
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (Matrix& g : grads) g *= inv;
      adam.step(r.last, grads, lr);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    rec.train = mean_loss(train_set, r.last, terms);
    check_finite(rec.train, "train");
    rec.validation = mean_loss(validation_set, r.last, terms);
    if (!validation_set.empty()) {
      check_finite(rec.validation, "validation");
      if (rec.validation.total < best_val) {
        best_val = rec.validation.total;
        r.best = r.last;
        r.best_epoch = epoch;
      }
    } else {
      r.best = r.last;
      r.best_epoch = epoch;
    }
    r.history.push_back(rec);

    if (!config.metrics_log.empty()) {
      nlohmann::ordered_json j{{"epoch", epoch},
                               {"lr", lr},
                               {"train_total", rec.train.total},
                               {"val_total", rec.validation.total},
                               {"train", to_json(rec.train)},
                               {"validation", to_json(rec.validation)}};
      log += j.dump() + "\n";
    }
    if (on_epoch) on_epoch(rec);
  }
  if (!config.metrics_log.empty()) io::write_file_atomic(config.metrics_log, log);
  return r;
}

}  // namespace stua::trainer
