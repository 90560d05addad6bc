#pragma once

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>

#include "lava/building_sim.hpp"
#include "lava/design.hpp"
#include "lava/errors.hpp"
#include "lava/estimator.hpp"

namespace lava::codec {

using nlohmann::json;

/// Throws ConfigError when `j` is not an object or has keys outside `allowed`.
void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view section);

template <typename T>
void read(const json& j, std::string_view key, T& out, std::string_view section) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(section) + "." + std::string(key) + ": wrong type");
  }
}

std::string to_string(PeriodicInput in);
std::string to_string(BinaryInput in);
std::string to_string(SupportSelection s);
std::string to_string(sim::VentilationPattern p);
PeriodicInput periodic_from_string(std::string_view s);
BinaryInput binary_from_string(std::string_view s);
SupportSelection selection_from_string(std::string_view s);
sim::VentilationPattern pattern_from_string(std::string_view s);

json features_to_json(const FeatureConfig& cfg);
FeatureConfig features_from_json(const json& j);

json estimator_to_json(const EmOptions& opts, double forgetting);
/// Returns the options; `forgetting` is filled when present.
EmOptions estimator_from_json(const json& j, double& forgetting);

json building_to_json(const sim::BuildingParams& b);
sim::BuildingParams building_from_json(const json& j);
json schedule_to_json(const sim::ScheduleParams& s);
sim::ScheduleParams schedule_from_json(const json& j);
json weather_to_json(const sim::WeatherModel& w);
sim::WeatherModel weather_from_json(const json& j);
json ranges_to_json(const sim::PortfolioRanges& r);
sim::PortfolioRanges ranges_from_json(const json& j);

Timestamp timestamp_from_json(const json& j, std::string_view what);

}  // namespace lava::codec
