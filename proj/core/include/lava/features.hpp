#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lava/calendar.hpp"

namespace lava {

// ---------------------------------------------------------------------------
// Nominal regressor: phi(t) = [1, dT(t), dT(t-1), ..., dT(t-n_b)]
// ---------------------------------------------------------------------------

struct NominalConfig {
  double threshold_c = 17.0;  ///< T_c, heating threshold temperature
  int lags = 24;              ///< n_b

  std::size_t dimension() const { return static_cast<std::size_t>(lags) + 2; }
  void validate() const;
};

/// Thresholded heating-demand temperature max(T_c - T_o, 0).
inline double delta_t(double outdoor_c, double threshold_c) {
  const double d = threshold_c - outdoor_c;
  return d > 0.0 ? d : 0.0;
}

/// `history` holds dT values oldest to newest; the last n_b+1 are used.
/// Throws InsufficientHistory when fewer are available.
Eigen::VectorXd build_phi(std::span<const double> history, const NominalConfig& cfg);

// ---------------------------------------------------------------------------
// Latent regressor gamma(t)
// ---------------------------------------------------------------------------

enum class PeriodicInput { kHourOfDay, kDayOfWeek, kWeekOfYear };
enum class BinaryInput { kWeekend, kSummer };

/// Natural period of each periodic covariate in its own units.
double natural_period(PeriodicInput input);

struct PeriodicSpec {
  PeriodicInput input;
  double boundary;  ///< l_i; the harmonic j has period 4 l_i / j
};

struct LatentConfig {
  int harmonics = 8;  ///< M
  std::vector<PeriodicSpec> periodic;
  std::vector<BinaryInput> binary;

  /// All three periodic inputs with l = P/4, weekend and summer selectors.
  static LatentConfig standard(int harmonics = 8);
  /// No latent component (nominal-only model).
  static LatentConfig none();

  /// n_gamma = 2 M n_p (3^{n_b} - 1); zero when either list is empty.
  std::size_t dimension() const;
  std::size_t periodic_dimension() const { return 2 * static_cast<std::size_t>(harmonics) * periodic.size(); }
  void validate() const;
};

double covariate_value(const CalendarCovariates& cov, PeriodicInput input);
bool covariate_flag(const CalendarCovariates& cov, BinaryInput input);

/// (cos(j pi u / (2 l)), sin(j pi u / (2 l))).
std::pair<double, double> fourier_basis(double u, int harmonic, double boundary);

/// Stacked basis blocks: input-major, harmonic-minor, cos before sin.
Eigen::VectorXd build_gamma_p(const CalendarCovariates& cov, const LatentConfig& cfg);

/// [1, u_1, 1-u_1] (x) ... (x) [1, u_n, 1-u_n] in the given order.
Eigen::VectorXd build_gamma_b(std::span<const int> flags);

/// ([0 I] gamma_b) (x) gamma_p: drops the constant selector, binary-selector-major.
Eigen::VectorXd build_gamma(const CalendarCovariates& cov, const LatentConfig& cfg);

/// Kronecker product of two vectors.
Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace lava
