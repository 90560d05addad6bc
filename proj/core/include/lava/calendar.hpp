#pragma once

#include <absl/time/time.h>

#include <chrono>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "lava/timeseries.hpp"

namespace lava {

/// Calendar covariates for one hourly timestamp, evaluated in local civil time.
struct CalendarCovariates {
  int hour_of_day = 0;   ///< t_d in [0, 24)
  int day_of_week = 0;   ///< d_w in [0, 7), Monday = 0
  int week_of_year = 1;  ///< ISO week in [1, 53]
  bool weekend = false;  ///< Saturday, Sunday or configured holiday
  bool summer = false;   ///< May through August

  friend bool operator==(const CalendarCovariates&, const CalendarCovariates&) = default;
};

using HolidaySet = std::set<std::chrono::sys_days>;

/// Reads one `YYYY-MM-DD` per line; `#` starts a comment.
HolidaySet load_holidays(const std::filesystem::path& path);
HolidaySet parse_holidays(std::string_view text, std::string_view source = "<memory>");

/// Maps UTC timestamps to local calendar covariates for a fixed IANA zone and
/// holiday list. Immutable once built.
class Calendar {
 public:
  /// UTC, no holidays.
  Calendar();
  explicit Calendar(std::string_view time_zone, HolidaySet holidays = {});

  CalendarCovariates covariates(Timestamp ts) const;

  /// Local civil date of `ts`.
  std::chrono::year_month_day local_date(Timestamp ts) const;

  const std::string& time_zone_name() const { return zone_name_; }
  const HolidaySet& holidays() const { return holidays_; }

 private:
  std::string zone_name_;
  absl::TimeZone zone_;
  HolidaySet holidays_;
};

/// Covariates with UTC as local time.
CalendarCovariates calendar_covariates(Timestamp ts, const HolidaySet& holidays = {});

}  // namespace lava
