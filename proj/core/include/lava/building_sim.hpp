#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "lava/calendar.hpp"
#include "lava/design.hpp"
#include "lava/timeseries.hpp"

namespace lava::sim {

/// Lumped single-zone building with a PID space-heating controller.
struct BuildingParams {
  double thermal_mass = 2e8;        ///< C_th [J/K]
  double loss_coefficient = 500.0;  ///< k_ht A_ht [W/K]
  double setpoint = 21.0;           ///< T_r [degC]
  double kp = 20000.0;              ///< [W/K]
  double ki = 1.0;                  ///< [W/(K s)]
  double kd = 0.0;                  ///< [W s/K]
  double max_heat = 50e3;           ///< actuator cap [W]

  /// A large multi-dwelling block: 16x the default envelope at the same time constant.
  static BuildingParams multi_dwelling();
  void validate() const;
};

enum class VentilationPattern { kContinuous, kNightSetback, kTimeClock5d, kTimeClock7d };

struct TapWaterProfile {
  double base_kw = 0.5;
  double morning_kw = 2.0;
  double evening_kw = 1.5;
  double morning_hour = 7.0;
  double evening_hour = 19.0;
  double width_hours = 1.5;
  double weekend_shift_hours = 2.0;  ///< morning peak moves later on weekends
  double noise = 0.3;                ///< log-normal multiplicative noise scale
};

struct ScheduleParams {
  VentilationPattern pattern = VentilationPattern::kContinuous;
  double setback_delta = 1.0;  ///< night set-back depth [K]
  int setback_start_hour = 22;
  int setback_end_hour = 6;
  double ventilation_coefficient = 0.0;  ///< ventilation loss while running [W/K]
  int ventilation_on_hour = 6;
  int ventilation_off_hour = 18;
  double internal_base_w = 2000.0;
  double internal_occupancy_w = 0.0;  ///< extra gains 17-23 h and on weekend days
  TapWaterProfile tap;

  void validate() const;
};

struct WeatherModel {
  double annual_mean = 2.0;
  double seasonal_amplitude = 12.0;
  int coldest_day_of_year = 15;
  double diurnal_amplitude = 3.0;
  int warmest_hour = 15;
  double ar_coefficient = 0.97;  ///< hourly AR(1) anomaly
  double ar_sigma = 0.6;
  std::optional<double> constant;  ///< overrides everything when set
};

struct SimConfig {
  Timestamp start{std::chrono::sys_days{std::chrono::year{2019} / 1 / 1}};
  int duration_hours = 17520;
  int substep_seconds = 60;
  WeatherModel weather;
  double dead_band_kw = 0.0;  ///< load quantisation step, 0 disables
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> weather_seed;  ///< defaults to `seed`

  void validate() const;
};

/// Hourly means of every heat term.
struct GroundTruth {
  std::vector<double> space_heat_kw;   ///< Q_sh
  std::vector<double> ventilation_kw;  ///< Q_v (negative: loss)
  std::vector<double> internal_kw;     ///< Q_int
  std::vector<double> tap_water_kw;    ///< Q_tw
  std::vector<double> building_temp;   ///< T_b
  std::vector<double> setpoint;        ///< T_r
};

struct SimulationResult {
  ConsumerDataset dataset;
  GroundTruth truth;
};

/// One explicit-Euler substep, exposed for energy-balance checks.
struct SubstepRecord {
  double dt = 0.0;
  double temp_before = 0.0;
  double temp_after = 0.0;
  double space_heat = 0.0;
  double ventilation = 0.0;
  double internal = 0.0;
  double loss = 0.0;
};

using SubstepObserver = std::function<void(const SubstepRecord&)>;

/// Integrates C dT_b/dt = Q_sh + Q_v + Q_int - Q_out and emits hourly data;
/// load = Q_sh + Q_tw, quantised to the dead band when configured.
SimulationResult simulate(const BuildingParams& params, const ScheduleParams& schedule, const SimConfig& cfg,
                          const Calendar& calendar = Calendar(), const SubstepObserver& observer = {},
                          std::string consumer_id = "consumer-0");

/// Hourly tap-water draw in kW: diurnal intensity times log-normal noise.
double tap_water(const TapWaterProfile& profile, const CalendarCovariates& cov, std::mt19937_64& rng);

/// Deterministic tap-water intensity (the noise-free mean) in kW.
double tap_water_intensity(const TapWaterProfile& profile, const CalendarCovariates& cov);

/// Hourly outdoor temperature path.
std::vector<double> weather_series(const WeatherModel& model, Timestamp start, int hours, std::uint64_t seed);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct PortfolioRanges {
  Range loss_coefficient{300.0, 12000.0};  ///< W/K
  Range time_constant_hours{60.0, 160.0};
  Range setpoint{20.0, 22.0};
  Range tap_scale{0.5, 2.0};  ///< multiplies the tap-water profile and internal gains
  std::vector<VentilationPattern> patterns{VentilationPattern::kContinuous, VentilationPattern::kNightSetback,
                                           VentilationPattern::kTimeClock5d, VentilationPattern::kTimeClock7d};
};

struct PortfolioMember {
  BuildingParams building;
  ScheduleParams schedule;
  SimConfig config;
  SimulationResult result;
};

/// n independent consumers sharing one weather path, reproducible by seed.
std::vector<PortfolioMember> generate_portfolio(int n, const PortfolioRanges& ranges, std::uint64_t seed,
                                                const SimConfig& base = {}, const ScheduleParams& base_schedule = {},
                                                const Calendar& calendar = Calendar());

}  // namespace lava::sim
