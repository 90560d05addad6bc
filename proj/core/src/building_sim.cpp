#include "lava/building_sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <string>
#include <thread>

#include "lava/errors.hpp"

namespace lava::sim {
namespace {

constexpr double kSecondsPerHour = 3600.0;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool in_window(int hour, int from, int to) {
  if (from == to) return false;
  return from < to ? (hour >= from && hour < to) : (hour >= from || hour < to);
}

// Signed distance on the 24 h circle, in (-12, 12].
double circular_hours(double a, double b) {
  double d = std::fmod(a - b, 24.0);
  if (d <= -12.0) d += 24.0;
  if (d > 12.0) d -= 24.0;
  return d;
}

bool ventilation_on(const ScheduleParams& s, const CalendarCovariates& cov) {
  switch (s.pattern) {
    case VentilationPattern::kContinuous:
    case VentilationPattern::kNightSetback:
      return true;
    case VentilationPattern::kTimeClock5d:
      return !cov.weekend && in_window(cov.hour_of_day, s.ventilation_on_hour, s.ventilation_off_hour);
    case VentilationPattern::kTimeClock7d:
      return in_window(cov.hour_of_day, s.ventilation_on_hour, s.ventilation_off_hour);
  }
  return true;
}

double setpoint_at(const BuildingParams& b, const ScheduleParams& s, const CalendarCovariates& cov) {
  if (s.pattern == VentilationPattern::kNightSetback &&
      in_window(cov.hour_of_day, s.setback_start_hour, s.setback_end_hour)) {
    return b.setpoint - s.setback_delta;
  }
  return b.setpoint;
}

double internal_gain(const ScheduleParams& s, const CalendarCovariates& cov) {
  const bool occupied = cov.weekend || in_window(cov.hour_of_day, 17, 23);
  return s.internal_base_w + (occupied ? s.internal_occupancy_w : 0.0);
}

int day_of_year(Timestamp ts) {
  const auto day = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::sys_days jan1{ymd.year() / 1 / 1};
  return static_cast<int>((day - jan1).count());
}

double uniform(std::mt19937_64& rng, const Range& r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

BuildingParams BuildingParams::multi_dwelling() {
  BuildingParams b;
  b.loss_coefficient = 8000.0;
  b.thermal_mass = 3.2e9;
  b.kp = 320000.0;
  b.ki = 16.0;
  b.max_heat = 800e3;
  return b;
}

void BuildingParams::validate() const {
  require(thermal_mass > 0.0 && std::isfinite(thermal_mass), "building.thermal_mass must be positive");
  require(loss_coefficient > 0.0 && std::isfinite(loss_coefficient), "building.loss_coefficient must be positive");
  require(std::isfinite(setpoint), "building.setpoint must be finite");
  require(kp >= 0.0 && ki >= 0.0 && kd >= 0.0, "controller gains must be non-negative");
  require(max_heat >= 0.0 && std::isfinite(max_heat), "building.max_heat must be non-negative");
}

void ScheduleParams::validate() const {
  auto hour_ok = [](int h) { return h >= 0 && h < 24; };
  require(hour_ok(setback_start_hour) && hour_ok(setback_end_hour), "set-back hours must be in [0, 24)");
  require(hour_ok(ventilation_on_hour) && hour_ok(ventilation_off_hour), "ventilation hours must be in [0, 24)");
  require(setback_delta >= 0.0, "setback_delta must be non-negative");
  require(ventilation_coefficient >= 0.0, "ventilation_coefficient must be non-negative");
  require(internal_base_w >= 0.0 && internal_occupancy_w >= 0.0, "internal gains must be non-negative");
  require(tap.base_kw >= 0.0 && tap.morning_kw >= 0.0 && tap.evening_kw >= 0.0, "tap-water levels must be >= 0");
  require(tap.width_hours > 0.0, "tap.width_hours must be positive");
  require(tap.noise >= 0.0, "tap.noise must be non-negative");
}

void SimConfig::validate() const {
  require(duration_hours > 0, "simulation.duration_hours must be positive");
  require(substep_seconds > 0 && 3600 % substep_seconds == 0, "simulation.substep_seconds must divide 3600");
  require(dead_band_kw >= 0.0, "simulation.dead_band_kw must be non-negative");
  require(std::abs(weather.ar_coefficient) < 1.0, "weather.ar_coefficient must be in (-1, 1)");
  require(weather.ar_sigma >= 0.0, "weather.ar_sigma must be non-negative");
}

double tap_water_intensity(const TapWaterProfile& p, const CalendarCovariates& cov) {
  const double hour = cov.hour_of_day + 0.5;
  const double shift = cov.weekend ? p.weekend_shift_hours : 0.0;
  auto bump = [&](double centre) {
    const double d = circular_hours(hour, centre) / p.width_hours;
    return std::exp(-0.5 * d * d);
  };
  return p.base_kw + p.morning_kw * bump(p.morning_hour + shift) + p.evening_kw * bump(p.evening_hour);
}

double tap_water(const TapWaterProfile& p, const CalendarCovariates& cov, std::mt19937_64& rng) {
  const double mean = tap_water_intensity(p, cov);
  const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
  return mean * std::exp(p.noise * z - 0.5 * p.noise * p.noise);
}

std::vector<double> weather_series(const WeatherModel& m, Timestamp start, int hours, std::uint64_t seed) {
  std::vector<double> out(static_cast<std::size_t>(std::max(hours, 0)));
  if (m.constant) {
    std::fill(out.begin(), out.end(), *m.constant);
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double phi = m.ar_coefficient;
  double anomaly = m.ar_sigma / std::sqrt(1.0 - phi * phi) * normal(rng);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int h = 0; h < hours; ++h) {
    const Timestamp ts = start + kHour * h;
    const auto tod = (ts - std::chrono::floor<std::chrono::days>(ts)) / kHour;
    const double seasonal = -m.seasonal_amplitude * std::cos(two_pi * (day_of_year(ts) - m.coldest_day_of_year) / 365.25);
    const double diurnal = m.diurnal_amplitude * std::cos(two_pi * static_cast<double>(tod - m.warmest_hour) / 24.0);
    out[static_cast<std::size_t>(h)] = m.annual_mean + seasonal + diurnal + anomaly;
    anomaly = phi * anomaly + m.ar_sigma * normal(rng);
  }
  return out;
}

SimulationResult simulate(const BuildingParams& b, const ScheduleParams& s, const SimConfig& cfg,
                          const Calendar& calendar, const SubstepObserver& observer, std::string consumer_id) {
  b.validate();
  s.validate();
  cfg.validate();

  const auto n = static_cast<std::size_t>(cfg.duration_hours);
  const std::vector<double> outdoor =
      weather_series(cfg.weather, cfg.start, cfg.duration_hours, cfg.weather_seed.value_or(cfg.seed));
  std::mt19937_64 tap_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  GroundTruth truth;
  for (auto* v : {&truth.space_heat_kw, &truth.ventilation_kw, &truth.internal_kw, &truth.tap_water_kw,
                  &truth.building_temp, &truth.setpoint}) {
    v->resize(n);
  }
  std::vector<double> load(n);

  const double dt = cfg.substep_seconds;
  const int substeps = 3600 / cfg.substep_seconds;
  const bool controlled = b.kp > 0.0 || b.ki > 0.0 || b.kd > 0.0;

  // Start in equilibrium at the first set point so the controller does not kick.
  const CalendarCovariates cov0 = calendar.covariates(cfg.start);
  double temp = setpoint_at(b, s, cov0);
  double heat = 0.0;
  if (controlled) {
    const double vent0 = ventilation_on(s, cov0) ? s.ventilation_coefficient : 0.0;
    const double demand = (b.loss_coefficient + vent0) * (temp - outdoor[0]) - internal_gain(s, cov0);
    heat = std::clamp(demand, 0.0, b.max_heat);
  }
  double e1 = 0.0;  // e_{k-1}
  double e2 = 0.0;  // e_{k-2}
  bool first = true;

  for (std::size_t h = 0; h < n; ++h) {
    const Timestamp ts = cfg.start + kHour * static_cast<long>(h);
    const CalendarCovariates cov = calendar.covariates(ts);
    const double t_out = outdoor[h];
    const double t_ref = setpoint_at(b, s, cov);
    const double vent_ua = ventilation_on(s, cov) ? s.ventilation_coefficient : 0.0;
    const double q_int = internal_gain(s, cov);

    double sum_heat = 0.0;
    double sum_vent = 0.0;
    double sum_temp = 0.0;
    for (int k = 0; k < substeps; ++k) {
      const double e = t_ref - temp;
      if (first) {
        e1 = e2 = e;
        first = false;
      }
      if (controlled) {
        heat += b.kp * (e - e1) + b.ki * dt * e + (b.kd / dt) * (e - 2.0 * e1 + e2);
        heat = std::clamp(heat, 0.0, b.max_heat);
      }
      e2 = e1;
      e1 = e;

      SubstepRecord rec;
      rec.dt = dt;
      rec.temp_before = temp;
      rec.space_heat = heat;
      rec.ventilation = -vent_ua * (temp - t_out);
      rec.internal = q_int;
      rec.loss = b.loss_coefficient * (temp - t_out);
      temp += dt * (rec.space_heat + rec.ventilation + rec.internal - rec.loss) / b.thermal_mass;
      rec.temp_after = temp;
      if (!std::isfinite(temp) || std::abs(temp) > 1e3) {
        throw NumericError("building temperature diverged at " + format_timestamp(ts) +
                           "; reduce simulation.substep_seconds (currently " + std::to_string(cfg.substep_seconds) +
                           ")");
      }
      if (observer) observer(rec);

      sum_heat += rec.space_heat;
      sum_vent += rec.ventilation;
      sum_temp += rec.temp_before;
    }

    const double q_sh = sum_heat / substeps / 1000.0;
    const double q_tw = tap_water(s.tap, cov, tap_rng);
    truth.space_heat_kw[h] = q_sh;
    truth.ventilation_kw[h] = sum_vent / substeps / 1000.0;
    truth.internal_kw[h] = q_int / 1000.0;
    truth.tap_water_kw[h] = q_tw;
    truth.building_temp[h] = sum_temp / substeps;
    truth.setpoint[h] = t_ref;

    double y = q_sh + q_tw;
    if (cfg.dead_band_kw > 0.0) y = std::round(y / cfg.dead_band_kw) * cfg.dead_band_kw;
    load[h] = y;
  }

  SimulationResult out;
  out.dataset = make_dataset(std::move(consumer_id), HourlySeries::observed(cfg.start, load, Unit::kKilowatt),
                             HourlySeries::observed(cfg.start, outdoor, Unit::kCelsius), calendar);
  out.truth = std::move(truth);
  return out;
}

std::vector<PortfolioMember> generate_portfolio(int n, const PortfolioRanges& ranges, std::uint64_t seed,
                                                const SimConfig& base, const ScheduleParams& base_schedule,
                                                const Calendar& calendar) {
  if (n < 1) throw ConfigError("portfolio size must be >= 1");
  if (ranges.patterns.empty()) throw ConfigError("portfolio ranges list no ventilation patterns");
  for (const Range* r : {&ranges.loss_coefficient, &ranges.time_constant_hours, &ranges.setpoint, &ranges.tap_scale}) {
    if (!(r->lo <= r->hi)) throw ConfigError("portfolio range is empty (lo > hi)");
  }
  if (ranges.loss_coefficient.lo <= 0.0 || ranges.time_constant_hours.lo <= 0.0 || ranges.tap_scale.lo < 0.0) {
    throw ConfigError("portfolio ranges must be positive");
  }

  std::mt19937_64 rng(seed);
  std::vector<PortfolioMember> members(static_cast<std::size_t>(n));
  for (auto& m : members) {
    const double ua = uniform(rng, ranges.loss_coefficient);
    const double tau = uniform(rng, ranges.time_constant_hours);
    const double scale = uniform(rng, ranges.tap_scale);
    const double size = ua / 500.0;
    m.building.loss_coefficient = ua;
    m.building.thermal_mass = ua * tau * kSecondsPerHour;
    m.building.setpoint = uniform(rng, ranges.setpoint);
    m.building.kp = 40.0 * ua;
    m.building.ki = ua / 500.0;
    m.building.kd = 0.0;
    m.building.max_heat = ua * 70.0;

    m.schedule = base_schedule;
    m.schedule.pattern =
        ranges.patterns[std::uniform_int_distribution<std::size_t>(0, ranges.patterns.size() - 1)(rng)];
    m.schedule.ventilation_coefficient = 0.25 * ua;
    m.schedule.internal_base_w = base_schedule.internal_base_w * size * scale;
    m.schedule.internal_occupancy_w = base_schedule.internal_occupancy_w * size * scale;
    m.schedule.tap.base_kw *= size * scale;
    m.schedule.tap.morning_kw *= size * scale;
    m.schedule.tap.evening_kw *= size * scale;

    m.config = base;
    m.config.weather_seed = base.weather_seed.value_or(seed);
    m.config.seed = rng();
  }

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), members.size()));
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t c = w; c < members.size(); c += workers) {
        auto& m = members[c];
        m.result = simulate(m.building, m.schedule, m.config, calendar, {}, "consumer-" + std::to_string(c));
      }
    }));
  }
  for (auto& t : tasks) t.get();
  return members;
}

}  // namespace lava::sim
