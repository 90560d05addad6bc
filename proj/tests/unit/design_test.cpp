#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lava/design.hpp"
#include "lava/errors.hpp"

namespace lava {
namespace {

Timestamp ts(const char* text) { return *parse_timestamp(text); }

FeatureConfig small_features() {
  FeatureConfig f;
  f.nominal = {17.0, 2};
  f.latent = LatentConfig::standard(1);
  return f;
}

TEST(MakeDataset, AlignsOnTheTemperatureTimeline) {
  const auto load = HourlySeries::observed(ts("2019-01-01T02:00:00Z"), {1, 2, 3, 4}, Unit::kKilowatt);
  const auto temp = HourlySeries::observed(ts("2019-01-01T00:00:00Z"), {0, 1, 2, 3, 4, 5, 6, 7}, Unit::kCelsius);
  const auto d = make_dataset("c1", load, temp, Calendar());
  EXPECT_EQ(d.start(), ts("2019-01-01T02:00:00Z"));
  ASSERT_EQ(d.size(), 6u);
  EXPECT_EQ(d.load.size(), d.temperature.size());
  EXPECT_EQ(d.temperature[0].value, 2.0);
  EXPECT_EQ(d.load[3].value, 4.0);
  // Load ends before the temperature: future hours stay missing.
  EXPECT_EQ(d.load[4].quality, Quality::kMissing);
  EXPECT_EQ(d.covariates.size(), 6u);
  EXPECT_EQ(d.covariates[0].hour_of_day, 2);
}

TEST(MakeDataset, EmptyOrDisjointThrows) {
  const auto a = HourlySeries::observed(ts("2019-01-01T00:00:00Z"), {1, 2}, Unit::kKilowatt);
  const auto b = HourlySeries::observed(ts("2019-03-01T00:00:00Z"), {1, 2}, Unit::kCelsius);
  EXPECT_THROW(make_dataset("x", a, b.slice(b.start(), b.start()), Calendar()), DataError);
  EXPECT_THROW(make_dataset("x", b, a, Calendar()), DataError);
}

TEST(Design, RegressorsMatchFeatureFunctions) {
  std::vector<double> temps;
  std::vector<double> loads;
  for (int i = 0; i < 60; ++i) {
    temps.push_back(10.0 + 8.0 * std::sin(i / 5.0));
    loads.push_back(100.0 + i);
  }
  const Timestamp start = ts("2019-01-04T20:00:00Z");
  const auto data = make_dataset("c", HourlySeries::observed(start, loads, Unit::kKilowatt),
                                 HourlySeries::observed(start, temps, Unit::kCelsius), Calendar());
  const auto cfg = small_features();
  const Design design(data, cfg);
  EXPECT_FALSE(design.nominal_ready(1));
  EXPECT_TRUE(design.nominal_ready(2));
  for (std::size_t i = 2; i < design.size(); ++i) {
    const std::vector<double> hist{delta_t(temps[i - 2], 17.0), delta_t(temps[i - 1], 17.0), delta_t(temps[i], 17.0)};
    EXPECT_EQ(design.phi(i), build_phi(hist, cfg.nominal));
    EXPECT_EQ(design.gamma(i), build_gamma(calendar_covariates(data.time_at(i)), cfg.latent));
    EXPECT_EQ(*design.target(i), loads[i]);
  }
  EXPECT_THROW(design.phi(0), InsufficientHistory);
}

TEST(Design, TemperatureGapRestartsWarmUp) {
  std::vector<Sample> temps(40, Sample{5.0, Quality::kObserved});
  for (int i = 10; i < 18; ++i) temps[i] = Sample{};  // 8 h, too long to interpolate
  const Timestamp start = ts("2019-01-01T00:00:00Z");
  const auto data = make_dataset("c", HourlySeries::observed(start, std::vector<double>(40, 1.0), Unit::kKilowatt),
                                 HourlySeries(start, temps, Unit::kCelsius), Calendar());
  const Design design(data, small_features());
  EXPECT_TRUE(design.trainable(9));
  for (std::size_t i = 10; i < 20; ++i) EXPECT_FALSE(design.trainable(i)) << i;
  EXPECT_TRUE(design.trainable(20));
}

TEST(Design, MissingLoadIsNotTrainable) {
  std::vector<Sample> loads(30, Sample{2.0, Quality::kObserved});
  for (int i = 10; i < 20; ++i) loads[i] = Sample{};
  const Timestamp start = ts("2019-01-01T00:00:00Z");
  const auto data = make_dataset("c", HourlySeries(start, loads, Unit::kKilowatt),
                                 HourlySeries::observed(start, std::vector<double>(30, 0.0), Unit::kCelsius),
                                 Calendar());
  const Design design(data, small_features());
  EXPECT_TRUE(design.nominal_ready(15));
  EXPECT_FALSE(design.trainable(15));
  EXPECT_FALSE(design.target(15).has_value());
  EXPECT_TRUE(design.trainable(25));
}

}  // namespace
}  // namespace lava
