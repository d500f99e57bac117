#include "stua/metrics.hpp"

#include "stua/errors.hpp"

#include <cmath>

namespace stua::metrics {

namespace {

void same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(ErrorKind::DimensionMismatch, std::string(what) + ": shapes differ");
  if (a.size() == 0) fail(ErrorKind::DimensionMismatch, std::string(what) + ": no cells");
}

}  // namespace

bool covered(double h_hat, double sigma_hat, double h) {
  const double s = std::abs(sigma_hat);
  return h_hat - s < h && h < h_hat + s;
}

double picp(const Matrix& h_hat, const Matrix& sigma_hat, const Matrix& h) {
  same_shape(h_hat, h, "picp");
  same_shape(sigma_hat, h, "picp");
  Eigen::Index hits = 0;
  for (Eigen::Index k = 0; k < h.size(); ++k) hits += covered(h_hat.data()[k], sigma_hat.data()[k], h.data()[k]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(h.size());
}

double rmse(const Matrix& h_hat, const Matrix& h) {
  same_shape(h_hat, h, "rmse");
  return std::sqrt((h_hat - h).squaredNorm() / static_cast<double>(h.size()));
}

MapeResult mape(const Matrix& h_hat, const Matrix& h, double floor) {
  same_shape(h_hat, h, "mape");
  MapeResult r;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < h.size(); ++k) {
    const double truth = h.data()[k];
    if (truth < floor) {
      ++r.excluded;
      continue;
    }
    acc += std::abs(h_hat.data()[k] - truth) / truth;
    ++r.included;
  }
  if (r.included == 0) fail(ErrorKind::UndefinedMetric, "mape: every cell is below the floor");
  r.percent = 100.0 * acc / static_cast<double>(r.included);
  return r;
}

}  // namespace stua::metrics
