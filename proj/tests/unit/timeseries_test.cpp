#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "lava/errors.hpp"
#include "lava/timeseries.hpp"

namespace lava {
namespace {

Timestamp ts(const char* text) { return *parse_timestamp(text); }

TEST(ParseTimestamp, AcceptsCommonIsoForms) {
  EXPECT_EQ(format_timestamp(ts("2019-01-16T09:00:00Z")), "2019-01-16T09:00:00Z");
  EXPECT_EQ(ts("2019-01-16 09:00"), ts("2019-01-16T09:00:00Z"));
  EXPECT_EQ(ts("2019-01-16T10:00:00+01:00"), ts("2019-01-16T09:00:00Z"));
  EXPECT_EQ(ts("2019-01-16"), ts("2019-01-16T00:00:00Z"));
  EXPECT_FALSE(parse_timestamp("16/01/2019").has_value());
  EXPECT_FALSE(parse_timestamp("").has_value());
}

TEST(ParseCsv, ReadsRowsInOrder) {
  const auto s = parse_csv("timestamp,value\n2019-01-01T00:00:00Z,10\n2019-01-01T01:00:00Z,20\n", Unit::kKilowatt);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].value, 10.0);
  EXPECT_EQ(s[1].value, 20.0);
  EXPECT_EQ(s.start(), ts("2019-01-01T00:00:00Z"));
  EXPECT_EQ(s.count(Quality::kObserved), 2u);
}

TEST(ParseCsv, UnsortedRowsGiveTheSameSeries) {
  const auto sorted = parse_csv("timestamp,value\n2019-01-01T00:00:00Z,10\n2019-01-01T01:00:00Z,20\n", Unit::kKilowatt);
  const auto unsorted = parse_csv("timestamp,value\n2019-01-01T01:00:00Z,20\n2019-01-01T00:00:00Z,10\n", Unit::kKilowatt);
  EXPECT_EQ(sorted, unsorted);
}

TEST(ParseCsv, AbsentHourBecomesMissing) {
  const auto s = parse_csv("timestamp,value\n2019-01-01T00:00:00Z,10\n2019-01-01T02:00:00Z,30\n", Unit::kKilowatt);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[1].quality, Quality::kMissing);
  EXPECT_EQ(s[2].value, 30.0);
}

TEST(ParseCsv, EmptyValueIsMissing) {
  const auto s = parse_csv("timestamp,value\n2019-01-01T00:00:00Z,\n2019-01-01T01:00:00Z,2\n", Unit::kCelsius);
  EXPECT_EQ(s[0].quality, Quality::kMissing);
  EXPECT_EQ(s.unit(), Unit::kCelsius);
}

TEST(ParseCsv, ErrorsCarryLineNumbers) {
  try {
    parse_csv("timestamp,value\n2019-01-01T00:00:00Z,1\nnot-a-time,3\n", Unit::kKilowatt, {}, "load.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("load.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_csv("timestamp,value\n2019-01-01T00:00:00Z,abc\n", Unit::kKilowatt), DataError);
  EXPECT_THROW(parse_csv("time,val\n2019-01-01T00:00:00Z,1\n", Unit::kKilowatt), DataError);
}

TEST(ParseCsv, RejectsSubHourlyAndEmptyInput) {
  EXPECT_THROW(parse_csv("timestamp,value\n2019-01-01T00:30:00Z,1\n", Unit::kKilowatt), DataError);
  EXPECT_THROW(parse_csv("", Unit::kKilowatt), DataError);
  EXPECT_THROW(parse_csv("timestamp,value\n", Unit::kKilowatt), DataError);
}

TEST(ParseCsv, DuplicatePolicies) {
  const char* same = "timestamp,value\n2019-01-01T00:00:00Z,1\n2019-01-01T00:00:00Z,1\n";
  EXPECT_EQ(parse_csv(same, Unit::kKilowatt).size(), 1u);
  const char* conflict = "timestamp,value\n2019-01-01T00:00:00Z,1\n2019-01-01T00:00:00Z,2\n";
  EXPECT_THROW(parse_csv(conflict, Unit::kKilowatt), DataError);
  const auto last = parse_csv(conflict, Unit::kKilowatt, {DuplicatePolicy::kLastWins});
  EXPECT_EQ(last[0].value, 2.0);
}

TEST(FillGaps, InterpolatesShortGapLinearly) {
  const auto s = parse_csv("timestamp,value\n2019-01-01T00:00:00Z,10\n2019-01-01T02:00:00Z,30\n", Unit::kKilowatt);
  const auto f = fill_gaps(s);
  EXPECT_EQ(f[1].quality, Quality::kInterpolated);
  EXPECT_DOUBLE_EQ(f[1].value, 20.0);
  EXPECT_EQ(f[0].quality, Quality::kObserved);
}

TEST(FillGaps, LeavesLongGapsMissing) {
  std::vector<Sample> v(9, Sample{});
  v.front() = {1.0, Quality::kObserved};
  v.back() = {9.0, Quality::kObserved};  // 7 missing hours in between
  const HourlySeries s(ts("2019-01-01T00:00:00Z"), v, Unit::kKilowatt);
  const auto f = fill_gaps(s, 6);
  EXPECT_EQ(f.count(Quality::kMissing), 7u);
  EXPECT_EQ(fill_gaps(s, 7).count(Quality::kInterpolated), 7u);
}

TEST(FillGaps, NoGapIsIdentity) {
  const auto s = HourlySeries::observed(ts("2019-01-01T00:00:00Z"), {1, 2, 3, 4}, Unit::kKilowatt);
  EXPECT_EQ(fill_gaps(s), s);
}

TEST(FillGaps, LeadingAndTrailingGapsStayMissing) {
  std::vector<Sample> v{{0, Quality::kMissing}, {1, Quality::kObserved}, {0, Quality::kMissing}};
  const auto f = fill_gaps(HourlySeries(ts("2019-01-01T00:00:00Z"), v, Unit::kKilowatt));
  EXPECT_EQ(f.count(Quality::kMissing), 2u);
}

TEST(Csv, ExportThenIngestIsBitExact) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0.0, 1e3);
  std::vector<Sample> v;
  for (int i = 0; i < 500; ++i) {
    v.push_back(i % 37 == 5 ? Sample{} : Sample{nd(rng) / 3.0, Quality::kObserved});
  }
  const HourlySeries s(ts("2020-02-28T20:00:00Z"), v, Unit::kKilowatt);
  const auto back = parse_csv(to_csv(s), Unit::kKilowatt);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].quality, s[i].quality);
    if (s[i].usable()) {
      EXPECT_EQ(back[i].value, s[i].value);
    }
  }
}

TEST(Csv, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "lava_ts_test";
  std::filesystem::create_directories(dir);
  const auto s = HourlySeries::observed(ts("2019-03-01T00:00:00Z"), {0.1, 0.2, 1.0 / 3.0}, Unit::kCelsius);
  write_csv(dir / "t.csv", s);
  EXPECT_EQ(ingest_csv(dir / "t.csv", Unit::kCelsius), s);
  EXPECT_THROW(ingest_csv(dir / "absent.csv", Unit::kCelsius), DataError);
}

TEST(Align, ProducesIdenticalTimelines) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> off(0, 48);
  std::uniform_int_distribution<int> len(60, 200);
  const Timestamp base = ts("2019-01-01T00:00:00Z");
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = HourlySeries::observed(base + kHour * off(rng), std::vector<double>(len(rng), 1.0), Unit::kKilowatt);
    const auto b = HourlySeries::observed(base + kHour * off(rng), std::vector<double>(len(rng), 2.0), Unit::kCelsius);
    const auto [x, y] = align(a, b);
    ASSERT_EQ(x.size(), y.size());
    EXPECT_EQ(x.start(), y.start());
    EXPECT_EQ(x.start(), std::max(a.start(), b.start()));
    EXPECT_EQ(x.end(), std::min(a.end(), b.end()));
  }
}

TEST(Align, DisjointSeriesThrow) {
  const auto a = HourlySeries::observed(ts("2019-01-01T00:00:00Z"), {1, 2}, Unit::kKilowatt);
  const auto b = HourlySeries::observed(ts("2019-02-01T00:00:00Z"), {1, 2}, Unit::kCelsius);
  EXPECT_THROW(align(a, b), DataError);
}

TEST(HourlySeries, RejectsOffGridStart) {
  EXPECT_THROW(HourlySeries(ts("2019-01-01T00:00:00Z") + std::chrono::seconds(5), {}, Unit::kKilowatt), DataError);
}

TEST(HourlySeries, IndexAndSlice) {
  const auto s = HourlySeries::observed(ts("2019-01-01T00:00:00Z"), {0, 1, 2, 3, 4}, Unit::kKilowatt);
  EXPECT_EQ(s.index_of(ts("2019-01-01T03:00:00Z")), 3u);
  EXPECT_FALSE(s.index_of(ts("2019-01-01T05:00:00Z")).has_value());
  const auto part = s.slice(ts("2019-01-01T01:00:00Z"), ts("2019-01-01T03:00:00Z"));
  ASSERT_EQ(part.size(), 2u);
  EXPECT_EQ(part[0].value, 1.0);
}

}  // namespace
}  // namespace lava
