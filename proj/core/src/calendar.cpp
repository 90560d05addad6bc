#include "lava/calendar.hpp"

#include <absl/time/civil_time.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lava/errors.hpp"

namespace lava {
namespace {

int iso_week(const absl::CivilDay& day) {
  // ISO week: the week containing the year's first Thursday is week 1.
  const int weekday = (static_cast<int>(absl::GetWeekday(day)) + 7) % 7;  // Monday = 0
  const absl::CivilDay thursday = day + (3 - weekday);
  const absl::CivilDay jan1(thursday.year(), 1, 1);
  const int week = static_cast<int>((thursday - jan1) / 7) + 1;
  return std::clamp(week, 1, 53);
}

}  // namespace

HolidaySet parse_holidays(std::string_view text, std::string_view source) {
  HolidaySet out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    absl::CivilDay day;
    if (line.size() != 10 || !absl::ParseCivilTime(line, &day)) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected YYYY-MM-DD, got '" +
                        line + "'");
    }
    out.insert(std::chrono::sys_days{std::chrono::year{static_cast<int>(day.year())} /
                                     std::chrono::month{static_cast<unsigned>(day.month())} /
                                     std::chrono::day{static_cast<unsigned>(day.day())}});
  }
  return out;
}

HolidaySet load_holidays(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open holiday file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_holidays(buf.str(), path.string());
}

Calendar::Calendar() : zone_name_("UTC"), zone_(absl::UTCTimeZone()) {}

Calendar::Calendar(std::string_view time_zone, HolidaySet holidays)
    : zone_name_(time_zone), holidays_(std::move(holidays)) {
  if (!absl::LoadTimeZone(zone_name_, &zone_)) {
    throw ConfigError("unknown time zone '" + zone_name_ + "'");
  }
}

std::chrono::year_month_day Calendar::local_date(Timestamp ts) const {
  const absl::CivilSecond cs = zone_.At(absl::FromChrono(ts)).cs;
  return std::chrono::year{static_cast<int>(cs.year())} / std::chrono::month{static_cast<unsigned>(cs.month())} /
         std::chrono::day{static_cast<unsigned>(cs.day())};
}

CalendarCovariates Calendar::covariates(Timestamp ts) const {
  const absl::CivilSecond cs = zone_.At(absl::FromChrono(ts)).cs;
  const absl::CivilDay day(cs);
  CalendarCovariates out;
  out.hour_of_day = cs.hour();
  out.day_of_week = (static_cast<int>(absl::GetWeekday(day)) + 7) % 7;
  out.week_of_year = iso_week(day);
  const std::chrono::sys_days date{std::chrono::year{static_cast<int>(day.year())} /
                                   std::chrono::month{static_cast<unsigned>(day.month())} /
                                   std::chrono::day{static_cast<unsigned>(day.day())}};
  out.weekend = out.day_of_week >= 5 || holidays_.contains(date);
  out.summer = cs.month() >= 5 && cs.month() <= 8;
  return out;
}

CalendarCovariates calendar_covariates(Timestamp ts, const HolidaySet& holidays) {
  return Calendar("UTC", holidays).covariates(ts);
}

}  // namespace lava
