#include "lava/config.hpp"

#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "lava/errors.hpp"

namespace lava {
namespace {

using codec::json;

json parse_value(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(std::string(text));
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    if (!node->is_object()) throw ConfigError("override '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = parse_value(std::string_view(assignment).substr(eq + 1));
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    pos = dot + 1;
  }
}

std::optional<std::filesystem::path> optional_path(const json& j, const char* key, std::string_view section) {
  std::string value;
  codec::read(j, key, value, section);
  if (value.empty()) return std::nullopt;
  return std::filesystem::path(value);
}

json path_json(const std::optional<std::filesystem::path>& p) { return p ? json(p->string()) : json(nullptr); }

EvaluationConfig evaluation_from_json(const json& j) {
  const std::string_view sec = "evaluation";
  codec::check_keys(j, {"split", "horizon", "seasonal_lag", "clamp_nonnegative", "coverage_z"}, sec);
  EvaluationConfig e;
  if (j.contains("split") && !j["split"].is_null()) e.split = codec::timestamp_from_json(j["split"], "evaluation.split");
  codec::read(j, "horizon", e.horizon, sec);
  codec::read(j, "seasonal_lag", e.seasonal_lag, sec);
  codec::read(j, "clamp_nonnegative", e.clamp_nonnegative, sec);
  codec::read(j, "coverage_z", e.coverage_z, sec);
  return e;
}

SimulationConfig simulation_from_json(const json& j) {
  const std::string_view sec = "simulation";
  codec::check_keys(j,
                    {"duration_hours", "substep_seconds", "start", "dead_band_kw", "seed", "weather_seed",
                     "consumers", "building", "schedule", "weather", "portfolio"},
                    sec);
  SimulationConfig s;
  codec::read(j, "duration_hours", s.run.duration_hours, sec);
  codec::read(j, "substep_seconds", s.run.substep_seconds, sec);
  if (j.contains("start") && !j["start"].is_null()) s.run.start = codec::timestamp_from_json(j["start"], "simulation.start");
  codec::read(j, "dead_band_kw", s.run.dead_band_kw, sec);
  codec::read(j, "seed", s.run.seed, sec);
  if (j.contains("weather_seed") && !j["weather_seed"].is_null()) {
    std::uint64_t ws = 0;
    codec::read(j, "weather_seed", ws, sec);
    s.run.weather_seed = ws;
  }
  codec::read(j, "consumers", s.consumers, sec);
  if (j.contains("building")) s.building = codec::building_from_json(j["building"]);
  if (j.contains("schedule")) s.schedule = codec::schedule_from_json(j["schedule"]);
  if (j.contains("weather")) s.run.weather = codec::weather_from_json(j["weather"]);
  if (j.contains("portfolio")) s.ranges = codec::ranges_from_json(j["portfolio"]);
  return s;
}

}  // namespace

void RunConfig::validate() const {
  features.validate();
  estimator.validate();
  if (!(forgetting > 0.0 && forgetting <= 1.0)) throw ConfigError("estimator.forgetting must lie in (0, 1]");
  if (evaluation.horizon < 1) throw ConfigError("evaluation.horizon must be >= 1");
  if (evaluation.seasonal_lag < evaluation.horizon) throw ConfigError("evaluation.seasonal_lag must be >= horizon");
  if (!(evaluation.coverage_z > 0.0)) throw ConfigError("evaluation.coverage_z must be positive");
  simulation.building.validate();
  simulation.schedule.validate();
  simulation.run.validate();
  if (simulation.consumers < 1) throw ConfigError("simulation.consumers must be >= 1");
}

RunConfig parse_run_config(std::string_view json_text, std::span<const std::string> overrides) {
  json doc;
  try {
    doc = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (doc.is_null()) doc = json::object();
  for (const auto& o : overrides) apply_override(doc, o);
  codec::check_keys(doc, {"features", "estimator", "evaluation", "simulation", "calendar", "paths"}, "config");

  RunConfig cfg;
  if (doc.contains("features")) cfg.features = codec::features_from_json(doc["features"]);
  if (doc.contains("estimator")) cfg.estimator = codec::estimator_from_json(doc["estimator"], cfg.forgetting);
  if (doc.contains("evaluation")) cfg.evaluation = evaluation_from_json(doc["evaluation"]);
  if (doc.contains("simulation")) cfg.simulation = simulation_from_json(doc["simulation"]);
  if (doc.contains("calendar")) {
    const json& c = doc["calendar"];
    codec::check_keys(c, {"time_zone", "holidays"}, "calendar");
    codec::read(c, "time_zone", cfg.calendar.time_zone, "calendar");
    cfg.calendar.holidays = optional_path(c, "holidays", "calendar");
  }
  if (doc.contains("paths")) {
    const json& p = doc["paths"];
    codec::check_keys(p, {"load", "temperature", "state", "output"}, "paths");
    cfg.paths.load = optional_path(p, "load", "paths");
    cfg.paths.temperature = optional_path(p, "temperature", "paths");
    cfg.paths.state = optional_path(p, "state", "paths");
    cfg.paths.output = optional_path(p, "output", "paths");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), overrides);
}

std::string dump_run_config(const RunConfig& cfg) {
  const auto& sim = cfg.simulation;
  json doc = {
      {"features", codec::features_to_json(cfg.features)},
      {"estimator", codec::estimator_to_json(cfg.estimator, cfg.forgetting)},
      {"evaluation",
       {{"split", cfg.evaluation.split ? json(format_timestamp(*cfg.evaluation.split)) : json(nullptr)},
        {"horizon", cfg.evaluation.horizon},
        {"seasonal_lag", cfg.evaluation.seasonal_lag},
        {"clamp_nonnegative", cfg.evaluation.clamp_nonnegative},
        {"coverage_z", cfg.evaluation.coverage_z}}},
      {"simulation",
       {{"duration_hours", sim.run.duration_hours},
        {"substep_seconds", sim.run.substep_seconds},
        {"start", format_timestamp(sim.run.start)},
        {"dead_band_kw", sim.run.dead_band_kw},
        {"seed", sim.run.seed},
        {"weather_seed", sim.run.weather_seed ? json(*sim.run.weather_seed) : json(nullptr)},
        {"consumers", sim.consumers},
        {"building", codec::building_to_json(sim.building)},
        {"schedule", codec::schedule_to_json(sim.schedule)},
        {"weather", codec::weather_to_json(sim.run.weather)},
        {"portfolio", codec::ranges_to_json(sim.ranges)}}},
      {"calendar", {{"time_zone", cfg.calendar.time_zone}, {"holidays", path_json(cfg.calendar.holidays)}}},
      {"paths",
       {{"load", path_json(cfg.paths.load)},
        {"temperature", path_json(cfg.paths.temperature)},
        {"state", path_json(cfg.paths.state)},
        {"output", path_json(cfg.paths.output)}}},
  };
  return doc.dump(2) + "\n";
}

Calendar make_calendar(const CalendarConfig& cfg) {
  HolidaySet holidays;
  if (cfg.holidays) holidays = load_holidays(*cfg.holidays);
  return Calendar(cfg.time_zone, std::move(holidays));
}

}  // namespace lava
