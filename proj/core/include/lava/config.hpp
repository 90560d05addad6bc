#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "lava/building_sim.hpp"
#include "lava/calendar.hpp"
#include "lava/design.hpp"
#include "lava/estimator.hpp"

namespace lava {

struct EvaluationConfig {
  std::optional<Timestamp> split;  ///< first validation hour; defaults to start + 1 year
  int horizon = 24;
  int seasonal_lag = 168;
  bool clamp_nonnegative = false;
  double coverage_z = 1.96;
};

struct SimulationConfig {
  sim::BuildingParams building;
  sim::ScheduleParams schedule;
  sim::SimConfig run;
  int consumers = 1;  ///< > 1 samples a portfolio from `ranges`
  sim::PortfolioRanges ranges;
};

struct CalendarConfig {
  std::string time_zone = "UTC";
  std::optional<std::filesystem::path> holidays;
};

struct PathsConfig {
  std::optional<std::filesystem::path> load;
  std::optional<std::filesystem::path> temperature;
  std::optional<std::filesystem::path> state;
  std::optional<std::filesystem::path> output;
};

/// Everything one CLI invocation needs. Sections: features, estimator,
/// evaluation, simulation, calendar, paths.
struct RunConfig {
  FeatureConfig features;
  EmOptions estimator;
  double forgetting = 1.0;
  EvaluationConfig evaluation;
  SimulationConfig simulation;
  CalendarConfig calendar;
  PathsConfig paths;

  void validate() const;
};

/// Parses a JSON document, applying `key.path=value` overrides first.
/// Override values are read as JSON when possible, else as plain strings.
/// Unknown keys anywhere raise ConfigError.
RunConfig parse_run_config(std::string_view json_text, std::span<const std::string> overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Fully expanded document (defaults included) that parses back to the same config.
std::string dump_run_config(const RunConfig& cfg);

Calendar make_calendar(const CalendarConfig& cfg);

}  // namespace lava
