#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "lava/errors.hpp"
#include "lava/metrics.hpp"

namespace lava {
namespace {

using V = std::vector<double>;

TEST(Rrmse, Examples) {
  EXPECT_EQ(rrmse(V{3, 4, 5}, V{3, 4, 5}), 0.0);
  EXPECT_DOUBLE_EQ(rrmse(V{1, 1, 1, 1}, V{2, 0, 2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(rrmse(V{2, 2}, V{2, 0}), std::sqrt(2.0) / 2.0);
}

TEST(Rrmse, Errors) {
  EXPECT_THROW(rrmse(V{1, -1}, V{0, 0}), DataError);
  EXPECT_THROW(rrmse(V{1, 2}, V{1}), DataError);
}

TEST(Rrmse, SkipsMissingPairs) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_DOUBLE_EQ(rrmse(V{2, nan, 2}, V{2, 5, 0}), std::sqrt(2.0) / 2.0);
  EXPECT_DOUBLE_EQ(mae(V{1, 3, 9}, V{2, 2, nan}), 1.0);
}

TEST(Mae, Examples) {
  EXPECT_EQ(mae(V{1, 2}, V{1, 2}), 0.0);
  EXPECT_EQ(mae(V{1, 3}, V{2, 2}), 1.0);
  EXPECT_EQ(mae(V{5}, V{7}), 2.0);
}

TEST(Coverage, Examples) {
  EXPECT_EQ(coverage(V{1, 2}, V{1, 2}, V{0, 0}), 1.0);
  EXPECT_EQ(coverage(V{1, 2}, V{0, 3}, V{0, 0}), 0.0);
  EXPECT_EQ(coverage(V{1, 2}, V{100, -50}, V{1e9, 1e9}), 1.0);
  EXPECT_THROW(coverage(V{1}, V{1}, V{-1}), DataError);
}

TEST(Metrics, ScaleEquivariance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ud(1.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    V y(40);
    V yh(40);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = ud(rng);
      yh[i] = ud(rng);
    }
    const double c = ud(rng);
    V ys = y;
    V yhs = yh;
    for (auto& v : ys) v *= c;
    for (auto& v : yhs) v *= c;
    EXPECT_NEAR(rrmse(ys, yhs), rrmse(y, yh), 1e-12);
    EXPECT_NEAR(mae(ys, yhs), c * mae(y, yh), 1e-10);
    EXPECT_GE(rrmse(y, yh), 0.0);
  }
}

}  // namespace
}  // namespace lava
