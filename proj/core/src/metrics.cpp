#include "lava/metrics.hpp"

#include <cmath>

#include "lava/errors.hpp"

namespace lava {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw DataError("metric inputs differ in length");
}

bool present(double a, double b) { return !std::isnan(a) && !std::isnan(b); }

}  // namespace

double rrmse(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual.size(), predicted.size());
  double sq = 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!present(actual[i], predicted[i])) continue;
    const double e = actual[i] - predicted[i];
    sq += e * e;
    sum += actual[i];
    ++n;
  }
  if (n == 0) throw DataError("rrmse: no scored points");
  const double mean = sum / static_cast<double>(n);
  if (mean == 0.0) throw DataError("rrmse: mean of actuals is zero");
  return std::sqrt(sq / static_cast<double>(n)) / mean;
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual.size(), predicted.size());
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!present(actual[i], predicted[i])) continue;
    sum += std::abs(actual[i] - predicted[i]);
    ++n;
  }
  if (n == 0) throw DataError("mae: no scored points");
  return sum / static_cast<double>(n);
}

double coverage(std::span<const double> actual, std::span<const double> predicted, std::span<const double> variance,
                double z) {
  check_lengths(actual.size(), predicted.size());
  check_lengths(actual.size(), variance.size());
  std::size_t hit = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!present(actual[i], predicted[i]) || std::isnan(variance[i])) continue;
    if (variance[i] < 0.0) throw DataError("coverage: negative variance");
    if (std::abs(actual[i] - predicted[i]) <= z * std::sqrt(variance[i])) ++hit;
    ++n;
  }
  if (n == 0) throw DataError("coverage: no scored points");
  return static_cast<double>(hit) / static_cast<double>(n);
}

}  // namespace lava
