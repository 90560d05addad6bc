#include "lava/features.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lava/errors.hpp"

namespace lava {

void NominalConfig::validate() const {
  if (lags < 0) throw ConfigError("features.n_b must be >= 0");
  if (!std::isfinite(threshold_c)) throw ConfigError("features.T_c must be finite");
}

Eigen::VectorXd build_phi(std::span<const double> history, const NominalConfig& cfg) {
  const auto needed = static_cast<std::size_t>(cfg.lags) + 1;
  if (history.size() < needed) {
    throw InsufficientHistory("nominal regressor needs " + std::to_string(needed) + " dT values, have " +
                              std::to_string(history.size()));
  }
  Eigen::VectorXd phi(cfg.dimension());
  phi[0] = 1.0;
  const std::size_t newest = history.size() - 1;
  for (std::size_t lag = 0; lag < needed; ++lag) phi[static_cast<Eigen::Index>(lag + 1)] = history[newest - lag];
  return phi;
}

double natural_period(PeriodicInput input) {
  switch (input) {
    case PeriodicInput::kHourOfDay: return 24.0;
    case PeriodicInput::kDayOfWeek: return 7.0;
    case PeriodicInput::kWeekOfYear: return 53.0;
  }
  return 1.0;
}

LatentConfig LatentConfig::standard(int harmonics) {
  LatentConfig cfg;
  cfg.harmonics = harmonics;
  for (auto in : {PeriodicInput::kHourOfDay, PeriodicInput::kDayOfWeek, PeriodicInput::kWeekOfYear}) {
    cfg.periodic.push_back({in, natural_period(in) / 4.0});
  }
  cfg.binary = {BinaryInput::kWeekend, BinaryInput::kSummer};
  return cfg;
}

LatentConfig LatentConfig::none() {
  LatentConfig cfg;
  cfg.harmonics = 1;
  return cfg;
}

std::size_t LatentConfig::dimension() const {
  std::size_t selectors = 1;
  for (std::size_t i = 0; i < binary.size(); ++i) selectors *= 3;
  return periodic_dimension() * (selectors - 1);
}

void LatentConfig::validate() const {
  if (harmonics < 1) throw ConfigError("features.M must be >= 1");
  for (const auto& p : periodic) {
    if (!(p.boundary > 0.0) || !std::isfinite(p.boundary)) throw ConfigError("periodic boundary must be > 0");
  }
  for (std::size_t i = 0; i < periodic.size(); ++i) {
    for (std::size_t j = i + 1; j < periodic.size(); ++j) {
      if (periodic[i].input == periodic[j].input) throw ConfigError("duplicate periodic input");
    }
  }
  for (std::size_t i = 0; i < binary.size(); ++i) {
    for (std::size_t j = i + 1; j < binary.size(); ++j) {
      if (binary[i] == binary[j]) throw ConfigError("duplicate binary input");
    }
  }
}

double covariate_value(const CalendarCovariates& cov, PeriodicInput input) {
  switch (input) {
    case PeriodicInput::kHourOfDay: return cov.hour_of_day;
    case PeriodicInput::kDayOfWeek: return cov.day_of_week;
    case PeriodicInput::kWeekOfYear: return cov.week_of_year;
  }
  return 0.0;
}

bool covariate_flag(const CalendarCovariates& cov, BinaryInput input) {
  return input == BinaryInput::kWeekend ? cov.weekend : cov.summer;
}

std::pair<double, double> fourier_basis(double u, int harmonic, double boundary) {
  const double angle = harmonic * std::numbers::pi * u / (2.0 * boundary);
  return {std::cos(angle), std::sin(angle)};
}

Eigen::VectorXd build_gamma_p(const CalendarCovariates& cov, const LatentConfig& cfg) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(cfg.periodic_dimension()));
  Eigen::Index k = 0;
  for (const auto& spec : cfg.periodic) {
    const double u = covariate_value(cov, spec.input);
    for (int j = 1; j <= cfg.harmonics; ++j) {
      const auto [c, s] = fourier_basis(u, j, spec.boundary);
      out[k++] = c;
      out[k++] = s;
    }
  }
  return out;
}

Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

Eigen::VectorXd build_gamma_b(std::span<const int> flags) {
  Eigen::VectorXd out = Eigen::VectorXd::Ones(1);
  for (int u : flags) {
    Eigen::VectorXd factor(3);
    factor << 1.0, static_cast<double>(u), 1.0 - static_cast<double>(u);
    out = kron(out, factor);
  }
  return out;
}

Eigen::VectorXd build_gamma(const CalendarCovariates& cov, const LatentConfig& cfg) {
  if (cfg.dimension() == 0) return Eigen::VectorXd(0);
  std::vector<int> flags;
  flags.reserve(cfg.binary.size());
  for (auto b : cfg.binary) flags.push_back(covariate_flag(cov, b) ? 1 : 0);
  const Eigen::VectorXd gamma_b = build_gamma_b(flags);
  const Eigen::VectorXd selectors = gamma_b.tail(gamma_b.size() - 1);
  return kron(selectors, build_gamma_p(cov, cfg));
}

}  // namespace lava
