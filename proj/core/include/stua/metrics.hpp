#pragma once

#include "stua/autodiff.hpp"

namespace stua::metrics {

/// Share of cells with H_hat - |sigma| < H < H_hat + |sigma|.
double picp(const Matrix& h_hat, const Matrix& sigma_hat, const Matrix& h);

/// Strict containment of one cell.
bool covered(double h_hat, double sigma_hat, double h);

double rmse(const Matrix& h_hat, const Matrix& h);

struct MapeResult {
  double percent = 0.0;
  Eigen::Index included = 0;
  Eigen::Index excluded = 0;
};

inline constexpr double kDefaultMapeFloor = 1.0;

/// Mean of |H_hat - H| / H over cells with H >= floor, in percent. Throws
/// UndefinedMetric when every cell is below the floor.
MapeResult mape(const Matrix& h_hat, const Matrix& h, double floor = kDefaultMapeFloor);

}  // namespace stua::metrics
