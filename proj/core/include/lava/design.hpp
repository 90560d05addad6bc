#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lava/calendar.hpp"
#include "lava/features.hpp"
#include "lava/timeseries.hpp"

namespace lava {

struct FeatureConfig {
  NominalConfig nominal;
  LatentConfig latent = LatentConfig::standard();

  void validate() const {
    nominal.validate();
    latent.validate();
  }
};

/// Load and temperature on one shared hourly timeline plus per-hour covariates.
struct ConsumerDataset {
  std::string consumer_id;
  HourlySeries load;         ///< kW
  HourlySeries temperature;  ///< degC
  std::vector<CalendarCovariates> covariates;

  std::size_t size() const { return temperature.size(); }
  Timestamp start() const { return temperature.start(); }
  Timestamp time_at(std::size_t i) const { return temperature.time_at(i); }
};

/// Gap-fills both series (up to `max_interp_hours`) and puts them on the
/// temperature timeline starting no earlier than the load. Load hours beyond
/// the end of the load file are missing, so future temperatures can be carried
/// for forecasting.
ConsumerDataset make_dataset(std::string consumer_id, const HourlySeries& load, const HourlySeries& temperature,
                             const Calendar& calendar, int max_interp_hours = 6);

/// Regressors for every hour of a dataset. The nominal lag buffer is warm at
/// hour i only when all of dT(i - n_b) .. dT(i) are known, so any temperature
/// gap restarts an n_b + 1 hour warm-up.
class Design {
 public:
  Design(const ConsumerDataset& data, FeatureConfig cfg);
  Design(ConsumerDataset&&, FeatureConfig) = delete;  // keeps a reference to the dataset

  const ConsumerDataset& data() const { return *data_; }
  const FeatureConfig& config() const { return cfg_; }
  std::size_t size() const { return data_->size(); }

  bool nominal_ready(std::size_t i) const;
  /// Lag buffer warm and load observed or interpolated.
  bool trainable(std::size_t i) const;

  Eigen::VectorXd phi(std::size_t i) const;
  Eigen::VectorXd gamma(std::size_t i) const;
  std::optional<double> target(std::size_t i) const;

 private:
  const ConsumerDataset* data_;
  FeatureConfig cfg_;
  std::vector<double> delta_t_;
  std::vector<std::size_t> known_run_;  // consecutive known dT values ending at i
};

}  // namespace lava
