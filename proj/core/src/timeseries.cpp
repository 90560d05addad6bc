#include "lava/timeseries.hpp"

#include <absl/time/time.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lava/errors.hpp"

namespace lava {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_top_of_hour(Timestamp ts) {
  return ts.time_since_epoch().count() % kHour.count() == 0;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  static constexpr const char* kFormats[] = {
      "%Y-%m-%dT%H:%M:%E*S%Ez", "%Y-%m-%dT%H:%M:%E*SZ", "%Y-%m-%dT%H:%M%Ez", "%Y-%m-%dT%H:%MZ",
      "%Y-%m-%dT%H:%M:%E*S",    "%Y-%m-%dT%H:%M",       "%Y-%m-%d %H:%M:%E*S%Ez",
      "%Y-%m-%d %H:%M:%E*SZ",   "%Y-%m-%d %H:%M:%E*S",  "%Y-%m-%d %H:%M%Ez",
      "%Y-%m-%d %H:%M",         "%Y-%m-%d",
  };
  const std::string input(trim(text));
  if (input.empty()) return std::nullopt;
  for (const char* fmt : kFormats) {
    absl::Time t;
    std::string err;
    if (absl::ParseTime(fmt, input, absl::UTCTimeZone(), &t, &err)) {
      return Timestamp{std::chrono::seconds{absl::ToUnixSeconds(t)}};
    }
  }
  return std::nullopt;
}

std::string format_timestamp(Timestamp ts) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ", absl::FromChrono(ts), absl::UTCTimeZone());
}

HourlySeries::HourlySeries(Timestamp start, std::vector<Sample> samples, Unit unit)
    : start_(start), samples_(std::move(samples)), unit_(unit) {
  if (!is_top_of_hour(start_)) {
    throw DataError("series start " + format_timestamp(start_) + " is not top-of-hour");
  }
}

HourlySeries HourlySeries::observed(Timestamp start, const std::vector<double>& values, Unit unit) {
  std::vector<Sample> samples;
  samples.reserve(values.size());
  for (double v : values) samples.push_back({v, Quality::kObserved});
  return HourlySeries(start, std::move(samples), unit);
}

std::optional<std::size_t> HourlySeries::index_of(Timestamp ts) const {
  const auto offset = ts - start_;
  if (offset.count() < 0 || offset.count() % kHour.count() != 0) return std::nullopt;
  const auto i = static_cast<std::size_t>(offset.count() / kHour.count());
  if (i >= samples_.size()) return std::nullopt;
  return i;
}

HourlySeries HourlySeries::slice(Timestamp from, Timestamp to) const {
  const Timestamp lo = std::max(from, start_);
  const Timestamp hi = std::min(to, end());
  if (hi <= lo) return HourlySeries(lo - (lo - start_) % kHour, {}, unit_);
  const auto first = static_cast<std::size_t>((lo - start_).count() / kHour.count());
  const auto last = static_cast<std::size_t>((hi - start_ + kHour - std::chrono::seconds(1)).count() /
                                             kHour.count());
  std::vector<Sample> out(samples_.begin() + static_cast<long>(first),
                          samples_.begin() + static_cast<long>(std::min(last, samples_.size())));
  return HourlySeries(time_at(first), std::move(out), unit_);
}

std::size_t HourlySeries::count(Quality q) const {
  return static_cast<std::size_t>(
      std::count_if(samples_.begin(), samples_.end(), [q](const Sample& s) { return s.quality == q; }));
}

bool operator==(const HourlySeries& a, const HourlySeries& b) {
  if (a.start_ != b.start_ || a.unit_ != b.unit_ || a.samples_.size() != b.samples_.size()) return false;
  for (std::size_t i = 0; i < a.samples_.size(); ++i) {
    const Sample& x = a.samples_[i];
    const Sample& y = b.samples_[i];
    if (x.quality != y.quality) return false;
    if (x.quality != Quality::kMissing && x.value != y.value) return false;
  }
  return true;
}

HourlySeries parse_csv(std::string_view text, Unit unit, IngestOptions opts, std::string_view source) {
  const std::string where(source);
  std::map<Timestamp, double> rows;
  std::map<Timestamp, bool> blank;  // rows with an empty value field
  std::size_t line_no = 0;
  bool header_seen = false;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      std::string header(line);
      header.erase(std::remove(header.begin(), header.end(), ' '), header.end());
      if (header != "timestamp,value") {
        throw DataError(where + ":" + std::to_string(line_no) + ": expected header 'timestamp,value'");
      }
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw DataError(where + ":" + std::to_string(line_no) + ": expected two comma-separated fields");
    }
    const auto ts = parse_timestamp(line.substr(0, comma));
    if (!ts) {
      throw DataError(where + ":" + std::to_string(line_no) + ": unparseable timestamp '" +
                      std::string(line.substr(0, comma)) + "'");
    }
    if (!is_top_of_hour(*ts)) {
      throw DataError(where + ":" + std::to_string(line_no) + ": sub-hourly timestamp " +
                      format_timestamp(*ts) + " rejected");
    }
    const std::string_view field = trim(line.substr(comma + 1));
    double value = std::numeric_limits<double>::quiet_NaN();
    const bool is_blank = field.empty();
    if (!is_blank) {
      const auto v = parse_double(field);
      if (!v) {
        throw DataError(where + ":" + std::to_string(line_no) + ": unparseable value '" + std::string(field) +
                        "'");
      }
      value = *v;
    }
    auto it = rows.find(*ts);
    if (it != rows.end() && opts.duplicates == DuplicatePolicy::kRejectConflicting) {
      const bool same = (blank[*ts] && is_blank) || (!blank[*ts] && !is_blank && it->second == value);
      if (!same) {
        throw DataError(where + ":" + std::to_string(line_no) + ": conflicting duplicate timestamp " +
                        format_timestamp(*ts));
      }
    }
    rows[*ts] = value;
    blank[*ts] = is_blank;
  }
  if (!header_seen) throw DataError(where + ": empty file");
  if (rows.empty()) throw DataError(where + ": no data rows");

  const Timestamp start = rows.begin()->first;
  const Timestamp last = rows.rbegin()->first;
  const auto n = static_cast<std::size_t>((last - start).count() / kHour.count()) + 1;
  std::vector<Sample> samples(n, Sample{std::numeric_limits<double>::quiet_NaN(), Quality::kMissing});
  for (const auto& [ts, v] : rows) {
    const auto i = static_cast<std::size_t>((ts - start).count() / kHour.count());
    if (!blank[ts]) samples[i] = Sample{v, Quality::kObserved};
  }
  return HourlySeries(start, std::move(samples), unit);
}

HourlySeries ingest_csv(const std::filesystem::path& path, Unit unit, IngestOptions opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), unit, opts, path.string());
}

std::string to_csv(const HourlySeries& series) {
  std::string out = "timestamp,value\n";
  char num[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += format_timestamp(series.time_at(i));
    out += ',';
    if (series[i].usable()) {
      const int len = std::snprintf(num, sizeof num, "%.17g", series[i].value);
      out.append(num, static_cast<std::size_t>(len));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const HourlySeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(series);
}

HourlySeries fill_gaps(const HourlySeries& series, int max_interp_hours) {
  std::vector<Sample> out = series.samples();
  const std::size_t n = out.size();
  std::size_t i = 0;
  while (i < n) {
    if (out[i].usable()) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !out[j].usable()) ++j;
    const std::size_t gap = j - i;
    if (i > 0 && j < n && gap <= static_cast<std::size_t>(std::max(max_interp_hours, 0))) {
      const double a = out[i - 1].value;
      const double b = out[j].value;
      const double span = static_cast<double>(gap + 1);
      for (std::size_t k = i; k < j; ++k) {
        const double w = static_cast<double>(k - i + 1) / span;
        out[k] = Sample{a + (b - a) * w, Quality::kInterpolated};
      }
    }
    i = j;
  }
  return HourlySeries(series.start(), std::move(out), series.unit());
}

std::pair<HourlySeries, HourlySeries> align(const HourlySeries& a, const HourlySeries& b) {
  const Timestamp lo = std::max(a.start(), b.start());
  const Timestamp hi = std::min(a.end(), b.end());
  if (hi <= lo) throw DataError("series do not overlap in time");
  return {a.slice(lo, hi), b.slice(lo, hi)};
}

}  // namespace lava
