#include "json_codec.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace lava::codec {
namespace {

template <typename E, std::size_t N>
E lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s, std::string_view what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  std::string msg = "unknown " + std::string(what) + " '" + std::string(s) + "' (expected one of:";
  for (const auto& [e, name] : table) msg += " " + std::string(name);
  throw ConfigError(msg + ")");
}

template <typename E, std::size_t N>
std::string name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [k, name] : table) {
    if (k == e) return std::string(name);
  }
  return "?";
}

constexpr std::array<std::pair<PeriodicInput, std::string_view>, 3> kPeriodic{{
    {PeriodicInput::kHourOfDay, "hour_of_day"},
    {PeriodicInput::kDayOfWeek, "day_of_week"},
    {PeriodicInput::kWeekOfYear, "week_of_year"},
}};
constexpr std::array<std::pair<BinaryInput, std::string_view>, 2> kBinary{{
    {BinaryInput::kWeekend, "weekend"},
    {BinaryInput::kSummer, "summer"},
}};
constexpr std::array<std::pair<SupportSelection, std::string_view>, 2> kSelection{{
    {SupportSelection::kNone, "none"},
    {SupportSelection::kEvidence, "evidence"},
}};
constexpr std::array<std::pair<sim::VentilationPattern, std::string_view>, 4> kPattern{{
    {sim::VentilationPattern::kContinuous, "continuous"},
    {sim::VentilationPattern::kNightSetback, "night-setback"},
    {sim::VentilationPattern::kTimeClock5d, "timeclock-5d"},
    {sim::VentilationPattern::kTimeClock7d, "timeclock-7d"},
}};

json range_to_json(const sim::Range& r) { return json::array({r.lo, r.hi}); }

sim::Range range_from_json(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(what) + " must be a [lo, hi] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view section) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + std::string(section) + "." + key + "'");
    }
  }
}

std::string to_string(PeriodicInput in) { return name_of(kPeriodic, in); }
std::string to_string(BinaryInput in) { return name_of(kBinary, in); }
std::string to_string(SupportSelection s) { return name_of(kSelection, s); }
std::string to_string(sim::VentilationPattern p) { return name_of(kPattern, p); }
PeriodicInput periodic_from_string(std::string_view s) { return lookup(kPeriodic, s, "periodic input"); }
BinaryInput binary_from_string(std::string_view s) { return lookup(kBinary, s, "binary input"); }
SupportSelection selection_from_string(std::string_view s) { return lookup(kSelection, s, "support selection"); }
sim::VentilationPattern pattern_from_string(std::string_view s) { return lookup(kPattern, s, "ventilation pattern"); }

json features_to_json(const FeatureConfig& cfg) {
  json periodic = json::array();
  json boundaries = json::object();
  for (const auto& p : cfg.latent.periodic) {
    periodic.push_back(to_string(p.input));
    boundaries[to_string(p.input)] = p.boundary;
  }
  json binary = json::array();
  for (auto b : cfg.latent.binary) binary.push_back(to_string(b));
  return {{"T_c", cfg.nominal.threshold_c},
          {"n_b", cfg.nominal.lags},
          {"M", cfg.latent.harmonics},
          {"periodic_inputs", periodic},
          {"binary_inputs", binary},
          {"boundaries", boundaries}};
}

FeatureConfig features_from_json(const json& j) {
  check_keys(j, {"T_c", "n_b", "M", "periodic_inputs", "binary_inputs", "boundaries"}, "features");
  FeatureConfig cfg;
  read(j, "T_c", cfg.nominal.threshold_c, "features");
  read(j, "n_b", cfg.nominal.lags, "features");
  read(j, "M", cfg.latent.harmonics, "features");
  if (j.contains("periodic_inputs")) {
    const json& list = j["periodic_inputs"];
    if (!list.is_array()) throw ConfigError("features.periodic_inputs must be a list");
    cfg.latent.periodic.clear();
    for (const auto& item : list) {
      if (!item.is_string()) throw ConfigError("features.periodic_inputs entries must be strings");
      const auto in = periodic_from_string(item.get<std::string>());
      cfg.latent.periodic.push_back({in, natural_period(in) / 4.0});
    }
  }
  if (j.contains("binary_inputs")) {
    const json& list = j["binary_inputs"];
    if (!list.is_array()) throw ConfigError("features.binary_inputs must be a list");
    cfg.latent.binary.clear();
    for (const auto& item : list) {
      if (!item.is_string()) throw ConfigError("features.binary_inputs entries must be strings");
      cfg.latent.binary.push_back(binary_from_string(item.get<std::string>()));
    }
  }
  if (j.contains("boundaries")) {
    const json& b = j["boundaries"];
    if (!b.is_object()) throw ConfigError("features.boundaries must be an object");
    for (const auto& [key, value] : b.items()) {
      const auto in = periodic_from_string(key);
      if (!value.is_number()) throw ConfigError("features.boundaries." + key + " must be a number");
      bool found = false;
      for (auto& p : cfg.latent.periodic) {
        if (p.input == in) {
          p.boundary = value.get<double>();
          found = true;
        }
      }
      if (!found) throw ConfigError("features.boundaries." + key + " set for a disabled input");
    }
  }
  cfg.validate();
  return cfg;
}

json estimator_to_json(const EmOptions& o, double forgetting) {
  return {{"max_iters", o.max_iters},
          {"rel_tol", o.rel_tol},
          {"stall_tol", o.stall_tol},
          {"prune_tol", o.prune_tol},
          {"iters_per_sample", o.iters_per_sample},
          {"ridge_jitter", o.ridge_jitter},
          {"sigma2_floor", o.sigma2_floor},
          {"selection", to_string(o.selection)},
          {"max_selection_rounds", o.max_selection_rounds},
          {"forgetting", forgetting}};
}

EmOptions estimator_from_json(const json& j, double& forgetting) {
  check_keys(j,
             {"max_iters", "rel_tol", "stall_tol", "prune_tol", "iters_per_sample", "ridge_jitter", "sigma2_floor", "selection",
              "max_selection_rounds", "forgetting"},
             "estimator");
  EmOptions o;
  read(j, "max_iters", o.max_iters, "estimator");
  read(j, "rel_tol", o.rel_tol, "estimator");
  read(j, "stall_tol", o.stall_tol, "estimator");
  read(j, "prune_tol", o.prune_tol, "estimator");
  read(j, "iters_per_sample", o.iters_per_sample, "estimator");
  read(j, "ridge_jitter", o.ridge_jitter, "estimator");
  read(j, "sigma2_floor", o.sigma2_floor, "estimator");
  read(j, "max_selection_rounds", o.max_selection_rounds, "estimator");
  std::string selection = to_string(o.selection);
  read(j, "selection", selection, "estimator");
  o.selection = selection_from_string(selection);
  read(j, "forgetting", forgetting, "estimator");
  if (!(forgetting > 0.0 && forgetting <= 1.0)) throw ConfigError("estimator.forgetting must lie in (0, 1]");
  o.validate();
  return o;
}

json building_to_json(const sim::BuildingParams& b) {
  return {{"thermal_mass", b.thermal_mass}, {"loss_coefficient", b.loss_coefficient},
          {"setpoint", b.setpoint},         {"kp", b.kp},
          {"ki", b.ki},                     {"kd", b.kd},
          {"max_heat", b.max_heat}};
}

sim::BuildingParams building_from_json(const json& j) {
  check_keys(j, {"thermal_mass", "loss_coefficient", "setpoint", "kp", "ki", "kd", "max_heat"},
             "simulation.building");
  sim::BuildingParams b;
  const std::string_view s = "simulation.building";
  read(j, "thermal_mass", b.thermal_mass, s);
  read(j, "loss_coefficient", b.loss_coefficient, s);
  read(j, "setpoint", b.setpoint, s);
  read(j, "kp", b.kp, s);
  read(j, "ki", b.ki, s);
  read(j, "kd", b.kd, s);
  read(j, "max_heat", b.max_heat, s);
  b.validate();
  return b;
}

json schedule_to_json(const sim::ScheduleParams& s) {
  const auto& t = s.tap;
  return {{"pattern", to_string(s.pattern)},
          {"setback_delta", s.setback_delta},
          {"setback_start_hour", s.setback_start_hour},
          {"setback_end_hour", s.setback_end_hour},
          {"ventilation_coefficient", s.ventilation_coefficient},
          {"ventilation_on_hour", s.ventilation_on_hour},
          {"ventilation_off_hour", s.ventilation_off_hour},
          {"internal_base_w", s.internal_base_w},
          {"internal_occupancy_w", s.internal_occupancy_w},
          {"tap",
           {{"base_kw", t.base_kw},
            {"morning_kw", t.morning_kw},
            {"evening_kw", t.evening_kw},
            {"morning_hour", t.morning_hour},
            {"evening_hour", t.evening_hour},
            {"width_hours", t.width_hours},
            {"weekend_shift_hours", t.weekend_shift_hours},
            {"noise", t.noise}}}};
}

sim::ScheduleParams schedule_from_json(const json& j) {
  const std::string_view sec = "simulation.schedule";
  check_keys(j,
             {"pattern", "setback_delta", "setback_start_hour", "setback_end_hour", "ventilation_coefficient",
              "ventilation_on_hour", "ventilation_off_hour", "internal_base_w", "internal_occupancy_w", "tap"},
             sec);
  sim::ScheduleParams s;
  std::string pattern = to_string(s.pattern);
  read(j, "pattern", pattern, sec);
  s.pattern = pattern_from_string(pattern);
  read(j, "setback_delta", s.setback_delta, sec);
  read(j, "setback_start_hour", s.setback_start_hour, sec);
  read(j, "setback_end_hour", s.setback_end_hour, sec);
  read(j, "ventilation_coefficient", s.ventilation_coefficient, sec);
  read(j, "ventilation_on_hour", s.ventilation_on_hour, sec);
  read(j, "ventilation_off_hour", s.ventilation_off_hour, sec);
  read(j, "internal_base_w", s.internal_base_w, sec);
  read(j, "internal_occupancy_w", s.internal_occupancy_w, sec);
  if (j.contains("tap")) {
    const json& t = j["tap"];
    const std::string_view ts = "simulation.schedule.tap";
    check_keys(t,
               {"base_kw", "morning_kw", "evening_kw", "morning_hour", "evening_hour", "width_hours",
                "weekend_shift_hours", "noise"},
               ts);
    read(t, "base_kw", s.tap.base_kw, ts);
    read(t, "morning_kw", s.tap.morning_kw, ts);
    read(t, "evening_kw", s.tap.evening_kw, ts);
    read(t, "morning_hour", s.tap.morning_hour, ts);
    read(t, "evening_hour", s.tap.evening_hour, ts);
    read(t, "width_hours", s.tap.width_hours, ts);
    read(t, "weekend_shift_hours", s.tap.weekend_shift_hours, ts);
    read(t, "noise", s.tap.noise, ts);
  }
  s.validate();
  return s;
}

json weather_to_json(const sim::WeatherModel& w) {
  return {{"annual_mean", w.annual_mean},
          {"seasonal_amplitude", w.seasonal_amplitude},
          {"coldest_day_of_year", w.coldest_day_of_year},
          {"diurnal_amplitude", w.diurnal_amplitude},
          {"warmest_hour", w.warmest_hour},
          {"ar_coefficient", w.ar_coefficient},
          {"ar_sigma", w.ar_sigma},
          {"constant", w.constant ? json(*w.constant) : json(nullptr)}};
}

sim::WeatherModel weather_from_json(const json& j) {
  const std::string_view sec = "simulation.weather";
  check_keys(j,
             {"annual_mean", "seasonal_amplitude", "coldest_day_of_year", "diurnal_amplitude", "warmest_hour",
              "ar_coefficient", "ar_sigma", "constant"},
             sec);
  sim::WeatherModel w;
  read(j, "annual_mean", w.annual_mean, sec);
  read(j, "seasonal_amplitude", w.seasonal_amplitude, sec);
  read(j, "coldest_day_of_year", w.coldest_day_of_year, sec);
  read(j, "diurnal_amplitude", w.diurnal_amplitude, sec);
  read(j, "warmest_hour", w.warmest_hour, sec);
  read(j, "ar_coefficient", w.ar_coefficient, sec);
  read(j, "ar_sigma", w.ar_sigma, sec);
  if (j.contains("constant") && !j["constant"].is_null()) {
    double c = 0.0;
    read(j, "constant", c, sec);
    w.constant = c;
  }
  return w;
}

json ranges_to_json(const sim::PortfolioRanges& r) {
  json patterns = json::array();
  for (auto p : r.patterns) patterns.push_back(to_string(p));
  return {{"loss_coefficient", range_to_json(r.loss_coefficient)},
          {"time_constant_hours", range_to_json(r.time_constant_hours)},
          {"setpoint", range_to_json(r.setpoint)},
          {"tap_scale", range_to_json(r.tap_scale)},
          {"patterns", patterns}};
}

sim::PortfolioRanges ranges_from_json(const json& j) {
  check_keys(j, {"loss_coefficient", "time_constant_hours", "setpoint", "tap_scale", "patterns"},
             "simulation.portfolio");
  sim::PortfolioRanges r;
  if (j.contains("loss_coefficient")) r.loss_coefficient = range_from_json(j["loss_coefficient"], "loss_coefficient");
  if (j.contains("time_constant_hours")) {
    r.time_constant_hours = range_from_json(j["time_constant_hours"], "time_constant_hours");
  }
  if (j.contains("setpoint")) r.setpoint = range_from_json(j["setpoint"], "setpoint");
  if (j.contains("tap_scale")) r.tap_scale = range_from_json(j["tap_scale"], "tap_scale");
  if (j.contains("patterns")) {
    if (!j["patterns"].is_array()) throw ConfigError("simulation.portfolio.patterns must be a list");
    r.patterns.clear();
    for (const auto& p : j["patterns"]) {
      if (!p.is_string()) throw ConfigError("simulation.portfolio.patterns entries must be strings");
      r.patterns.push_back(pattern_from_string(p.get<std::string>()));
    }
  }
  return r;
}

Timestamp timestamp_from_json(const json& j, std::string_view what) {
  if (!j.is_string()) throw ConfigError(std::string(what) + " must be an ISO-8601 string");
  const auto ts = parse_timestamp(j.get<std::string>());
  if (!ts) throw ConfigError(std::string(what) + ": cannot parse '" + j.get<std::string>() + "'");
  return *ts;
}

}  // namespace lava::codec
