#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "lava/config.hpp"
#include "lava/errors.hpp"

namespace lava {
namespace {

TEST(RunConfig, EmptyDocumentGivesDefaults) {
  const auto cfg = parse_run_config("{}");
  EXPECT_EQ(cfg.features.nominal.threshold_c, 17.0);
  EXPECT_EQ(cfg.features.nominal.lags, 24);
  EXPECT_EQ(cfg.features.latent.harmonics, 8);
  EXPECT_EQ(cfg.features.latent.dimension(), 384u);
  EXPECT_EQ(cfg.estimator.prune_tol, 1e-8);
  EXPECT_EQ(cfg.estimator.iters_per_sample, 3);
  EXPECT_EQ(cfg.forgetting, 1.0);
  EXPECT_EQ(cfg.evaluation.horizon, 24);
  EXPECT_FALSE(cfg.evaluation.clamp_nonnegative);
  EXPECT_EQ(cfg.calendar.time_zone, "UTC");
}

TEST(RunConfig, ReadsSections) {
  const auto cfg = parse_run_config(R"({
    "features": {"T_c": 15.5, "n_b": 12, "M": 4, "periodic_inputs": ["hour_of_day"], "binary_inputs": ["weekend"]},
    "estimator": {"iters_per_sample": 10, "selection": "none", "forgetting": 0.999},
    "evaluation": {"split": "2020-01-01T00:00:00Z", "clamp_nonnegative": true},
    "simulation": {"dead_band_kw": 10, "schedule": {"pattern": "night-setback"}},
    "calendar": {"time_zone": "Europe/Stockholm"}
  })");
  EXPECT_EQ(cfg.features.nominal.threshold_c, 15.5);
  EXPECT_EQ(cfg.features.nominal.lags, 12);
  EXPECT_EQ(cfg.features.latent.dimension(), 2u * 4u * 1u * 2u);
  EXPECT_EQ(cfg.estimator.iters_per_sample, 10);
  EXPECT_EQ(cfg.estimator.selection, SupportSelection::kNone);
  EXPECT_EQ(cfg.forgetting, 0.999);
  EXPECT_EQ(cfg.evaluation.split, parse_timestamp("2020-01-01T00:00:00Z"));
  EXPECT_TRUE(cfg.evaluation.clamp_nonnegative);
  EXPECT_EQ(cfg.simulation.run.dead_band_kw, 10.0);
  EXPECT_EQ(cfg.simulation.schedule.pattern, sim::VentilationPattern::kNightSetback);
  EXPECT_EQ(make_calendar(cfg.calendar).time_zone_name(), "Europe/Stockholm");
}

TEST(RunConfig, UnknownKeysAreRejected) {
  EXPECT_THROW(parse_run_config(R"({"featurs": {}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"features": {"harmonics": 3}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"simulation": {"building": {"mass": 3}}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"estimator": {"selection": "bic"}})"), ConfigError);
  EXPECT_THROW(parse_run_config("[1, 2"), ConfigError);
}

TEST(RunConfig, InvalidValuesAreRejected) {
  EXPECT_THROW(parse_run_config(R"({"features": {"M": 0}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"features": {"n_b": "many"}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"estimator": {"forgetting": 1.5}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"evaluation": {"horizon": 0}})"), ConfigError);
}

TEST(RunConfig, OverridesApplyBeforeParsing) {
  const std::vector<std::string> overrides{"features.M=2", "estimator.selection=none", "calendar.time_zone=Europe/Oslo",
                                           "simulation.schedule.setback_delta=2.5"};
  const auto cfg = parse_run_config(R"({"features": {"M": 6}})", overrides);
  EXPECT_EQ(cfg.features.latent.harmonics, 2);
  EXPECT_EQ(cfg.estimator.selection, SupportSelection::kNone);
  EXPECT_EQ(cfg.calendar.time_zone, "Europe/Oslo");
  EXPECT_EQ(cfg.simulation.schedule.setback_delta, 2.5);
  const std::vector<std::string> bad{"features.M"};
  EXPECT_THROW(parse_run_config("{}", bad), ConfigError);
  const std::vector<std::string> unknown{"features.harmonics=3"};
  EXPECT_THROW(parse_run_config("{}", unknown), ConfigError);
}

TEST(RunConfig, DumpParsesBackToTheSameDocument) {
  const std::vector<std::string> overrides{"features.M=3", "evaluation.split=\"2020-01-01T00:00:00Z\"",
                                           "simulation.weather_seed=9"};
  const auto cfg = parse_run_config("{}", overrides);
  const std::string dumped = dump_run_config(cfg);
  EXPECT_EQ(dump_run_config(parse_run_config(dumped)), dumped);
}

}  // namespace
}  // namespace lava
