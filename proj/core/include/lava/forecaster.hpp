#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lava/design.hpp"
#include "lava/estimator.hpp"
#include "lava/metrics.hpp"
#include "lava/timeseries.hpp"

namespace lava {

/// Point forecast split into its nominal and latent parts.
/// Invariant: y_hat == y_nom + y_res.
struct Forecast {
  Timestamp issue_time{};
  Timestamp target_time{};
  int horizon = 0;
  double y_hat = 0.0;
  double y_nom = 0.0;
  double y_res = 0.0;
  double variance = 0.0;        ///< sigma2 + gamma^T P gamma
  double noise_variance = 0.0;  ///< sigma2 alone
};

struct PortfolioForecast {
  std::vector<Forecast> members;
  double y_tot = 0.0;
  double variance_tot = 0.0;
  double noise_variance_tot = 0.0;
};

/// y_nom = theta^T phi, y_res = z_hat^T gamma, variance = sigma2 + gamma^T P gamma.
Forecast predict(const ModelState& state, const Eigen::VectorXd& phi, const Eigen::VectorXd& gamma);

/// Forecasts for hours issue+1 .. issue+H. Nominal lags mix observed history
/// with the dataset's future (actual) temperatures; covariates come from the
/// target timestamps.
std::vector<Forecast> predict_horizon(const ModelState& state, const Design& design, std::size_t issue_index,
                                      int horizon = 24);

/// Exact sums of means and variances; all members must share issue time and horizon.
PortfolioForecast aggregate(std::span<const Forecast> forecasts);

/// em_fit on the trainable hours in [from, to).
ModelState train(const Design& design, std::size_t from, std::size_t to, const EmOptions& opts,
                 double forgetting = 1.0, FitTrace* trace = nullptr);

struct EvalOptions {
  Timestamp split{};  ///< first hour of the validation span
  int horizon = 24;
  int seasonal_lag = 168;
  bool clamp_nonnegative = false;
  double coverage_z = 1.96;
  double forgetting = 1.0;
};

struct ScoredForecast {
  Forecast forecast;
  double actual = 0.0;
  std::optional<double> baseline;  ///< y(t - seasonal_lag) when observed
  /// y_hat after optional clamping; equals forecast.y_hat when clamping is off.
  double reported = 0.0;
};

struct WalkForwardResult {
  ModelState trained;
  ModelState final_state;
  FitTrace train_trace;
  std::vector<ScoredForecast> records;
  EvalReport report;
};

/// Trains on hours before `split` (or starts from `trained` when given), then
/// for every validation hour records the H-step forecast issued H hours
/// earlier and updates the model with the revealed actual.
WalkForwardResult walk_forward(const ConsumerDataset& data, const FeatureConfig& features, const EmOptions& opts,
                               const EvalOptions& eval, const ModelState* trained = nullptr);

/// Scores already recorded forecasts.
EvalReport score(std::span<const ScoredForecast> records, std::size_t nonzero_params, double coverage_z = 1.96);

struct PortfolioRecord {
  Timestamp target_time{};
  double actual_tot = 0.0;
  PortfolioForecast forecast;
};

/// Aligns per-consumer walk-forward records by target time and aggregates them.
std::vector<PortfolioRecord> aggregate_records(std::span<const std::vector<ScoredForecast>> per_consumer);

/// Walk-forward over many consumers in parallel (one task per consumer).
std::vector<WalkForwardResult> walk_forward_portfolio(std::span<const ConsumerDataset> data,
                                                      const FeatureConfig& features, const EmOptions& opts,
                                                      const EvalOptions& eval,
                                                      std::span<const ModelState> trained = {});

}  // namespace lava
