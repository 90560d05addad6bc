#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lava/errors.hpp"
#include "lava/state_io.hpp"
#include "support/oracle.hpp"

namespace lava {
namespace {

StoredModel fitted_model() {
  const auto pr = oracle::random_problem(120, 3, 48, 31, 0.5);
  StoredModel m;
  m.consumer_id = "building-7";
  m.features.nominal = {16.5, 1};
  m.features.latent = LatentConfig::standard(1);
  m.estimator.iters_per_sample = 5;
  m.estimator.selection = SupportSelection::kNone;
  m.state = em_fit(batch_stats(pr.phi, pr.gamma, pr.y), m.estimator);
  m.last_update = *parse_timestamp("2019-12-31T23:00:00Z");
  return m;
}

void expect_same(const StoredModel& a, const StoredModel& b) {
  EXPECT_EQ(a.consumer_id, b.consumer_id);
  EXPECT_EQ(a.features.nominal.threshold_c, b.features.nominal.threshold_c);
  EXPECT_EQ(a.features.latent.harmonics, b.features.latent.harmonics);
  EXPECT_EQ(a.estimator.iters_per_sample, b.estimator.iters_per_sample);
  EXPECT_EQ(a.estimator.selection, b.estimator.selection);
  EXPECT_EQ(a.state.theta, b.state.theta);
  EXPECT_EQ(a.state.z_hat, b.state.z_hat);
  EXPECT_EQ(a.state.prior_var, b.state.prior_var);
  EXPECT_EQ(a.state.posterior_cov, b.state.posterior_cov);
  EXPECT_EQ(a.state.sigma2, b.state.sigma2);
  EXPECT_EQ(a.state.active, b.state.active);
  EXPECT_EQ(a.state.stats.phi_phi, b.state.stats.phi_phi);
  EXPECT_EQ(a.state.stats.gamma_gamma, b.state.stats.gamma_gamma);
  EXPECT_EQ(a.state.stats.gamma_phi, b.state.stats.gamma_phi);
  EXPECT_EQ(a.state.stats.phi_y, b.state.stats.phi_y);
  EXPECT_EQ(a.state.stats.gamma_y, b.state.stats.gamma_y);
  EXPECT_EQ(a.state.stats.yy, b.state.stats.yy);
  EXPECT_EQ(a.state.stats.n, b.state.stats.n);
  EXPECT_EQ(a.last_update, b.last_update);
}

TEST(StateIo, RoundTripIsBitExact) {
  const auto m = fitted_model();
  const std::string text = serialize_model(m);
  const auto back = deserialize_model(text);
  expect_same(m, back);
  EXPECT_EQ(serialize_model(back), text);
}

TEST(StateIo, FileRoundTripByteCompare) {
  const auto dir = std::filesystem::temp_directory_path() / "lava_state_test";
  std::filesystem::create_directories(dir);
  const auto m = fitted_model();
  save_model(dir / "a.json", m);
  save_model(dir / "b.json", load_model(dir / "a.json"));
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
}

TEST(StateIo, RetrainGivesIdenticalDocument) {
  EXPECT_EQ(serialize_model(fitted_model()), serialize_model(fitted_model()));
}

TEST(StateIo, NonzeroCountMatchesActiveMask) {
  const auto back = deserialize_model(serialize_model(fitted_model()));
  std::size_t nonzero_active = 0;
  for (std::size_t k = 0; k < back.state.latent_dim(); ++k) {
    if (back.state.active[k] && back.state.z_hat[static_cast<Eigen::Index>(k)] != 0.0) ++nonzero_active;
    if (!back.state.active[k]) {
      EXPECT_EQ(back.state.z_hat[static_cast<Eigen::Index>(k)], 0.0);
    }
  }
  EXPECT_EQ(back.state.nonzero_count(), nonzero_active);
}

TEST(StateIo, MalformedAndVersionErrors) {
  EXPECT_THROW(deserialize_model("not json"), DataError);
  EXPECT_THROW(deserialize_model("{}"), DataError);
  std::string text = serialize_model(fitted_model());
  const auto pos = text.find("\"version\": 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "\"version\": 99");
  EXPECT_THROW(deserialize_model(text), ConfigError);
  EXPECT_THROW(load_model("/nonexistent/lava/state.json"), DataError);
}

}  // namespace
}  // namespace lava
