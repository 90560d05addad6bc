#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lava {

using Timestamp = std::chrono::sys_seconds;
using Hours = std::chrono::hours;

inline constexpr std::chrono::seconds kHour{3600};

enum class Quality { kObserved, kInterpolated, kMissing };

enum class Unit { kKilowatt, kCelsius };

struct Sample {
  double value = 0.0;
  Quality quality = Quality::kMissing;

  bool usable() const { return quality != Quality::kMissing; }
};

/// Parses ISO-8601 timestamps ("2019-01-16T09:00:00Z", "2019-01-16 09:00",
/// explicit offsets such as "+01:00"); values without an offset are UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp ts);

/// Hourly series on an exact 3600 s grid starting at a top-of-hour UTC time.
class HourlySeries {
 public:
  HourlySeries() = default;
  HourlySeries(Timestamp start, std::vector<Sample> samples, Unit unit);

  /// Convenience constructor: every value observed.
  static HourlySeries observed(Timestamp start, const std::vector<double>& values, Unit unit);

  Timestamp start() const { return start_; }
  Timestamp end() const { return start_ + kHour * static_cast<long>(samples_.size()); }
  Timestamp time_at(std::size_t i) const { return start_ + kHour * static_cast<long>(i); }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  Unit unit() const { return unit_; }

  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }

  /// Index of `ts` on this grid, if it falls inside the series.
  std::optional<std::size_t> index_of(Timestamp ts) const;

  /// Sub-series covering [from, to); clipped to the available range.
  HourlySeries slice(Timestamp from, Timestamp to) const;

  std::size_t count(Quality q) const;

  friend bool operator==(const HourlySeries& a, const HourlySeries& b);

 private:
  Timestamp start_{};
  std::vector<Sample> samples_;
  Unit unit_ = Unit::kKilowatt;
};

enum class DuplicatePolicy {
  kRejectConflicting,  ///< identical repeats collapse; differing values are an error
  kLastWins,
};

struct IngestOptions {
  DuplicatePolicy duplicates = DuplicatePolicy::kRejectConflicting;
};

/// Reads a `timestamp,value` CSV. Rows are sorted by time, duplicates resolved
/// per `opts`, and hours absent from the file appear as `missing` entries.
/// An empty value field is read as a missing sample.
HourlySeries ingest_csv(const std::filesystem::path& path, Unit unit, IngestOptions opts = {});

/// Same as ingest_csv but from in-memory text; `source` names it in errors.
HourlySeries parse_csv(std::string_view text, Unit unit, IngestOptions opts = {},
                       std::string_view source = "<memory>");

/// Writes `timestamp,value` with 17 significant digits; missing values are empty.
void write_csv(const std::filesystem::path& path, const HourlySeries& series);
std::string to_csv(const HourlySeries& series);

/// Linear interpolation across gaps of at most `max_interp_hours` missing hours
/// bounded by usable samples on both sides. Longer gaps stay missing.
HourlySeries fill_gaps(const HourlySeries& series, int max_interp_hours = 6);

/// Restricts both series to their common time range.
std::pair<HourlySeries, HourlySeries> align(const HourlySeries& a, const HourlySeries& b);

}  // namespace lava
