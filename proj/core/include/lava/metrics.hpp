#pragma once

#include <cstddef>
#include <span>

namespace lava {

// NaN entries in either argument mark missing points and are skipped pairwise.

/// sqrt(mean((y - y_hat)^2)) / mean(y) over the scored pairs.
double rrmse(std::span<const double> actual, std::span<const double> predicted);

double mae(std::span<const double> actual, std::span<const double> predicted);

/// Fraction of pairs with |y - y_hat| <= z * sqrt(variance).
double coverage(std::span<const double> actual, std::span<const double> predicted,
                std::span<const double> variance, double z = 1.96);

struct EvalReport {
  double rrmse = 0.0;
  double mae = 0.0;
  double coverage95 = 0.0;             ///< using sigma2 + gamma^T P gamma
  double coverage95_noise_only = 0.0;  ///< using sigma2 alone
  std::size_t n_scored = 0;
  std::size_t nonzero_params = 0;  ///< non-zero entries of z_hat at the end of the run
  double baseline_rrmse = 0.0;     ///< seasonal-naive y(t - 168)
};

}  // namespace lava
