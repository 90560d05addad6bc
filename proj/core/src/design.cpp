#include "lava/design.hpp"

#include <algorithm>
#include <limits>
#include <span>

#include "lava/errors.hpp"

namespace lava {

ConsumerDataset make_dataset(std::string consumer_id, const HourlySeries& load, const HourlySeries& temperature,
                             const Calendar& calendar, int max_interp_hours) {
  if (load.empty() || temperature.empty()) throw DataError("dataset '" + consumer_id + "' has an empty series");
  const HourlySeries filled_load = fill_gaps(load, max_interp_hours);
  const HourlySeries filled_temp = fill_gaps(temperature, max_interp_hours);

  const Timestamp lo = std::max(filled_load.start(), filled_temp.start());
  const Timestamp hi = filled_temp.end();
  if (hi <= lo) throw DataError("dataset '" + consumer_id + "': load and temperature do not overlap");

  ConsumerDataset out;
  out.consumer_id = std::move(consumer_id);
  out.temperature = filled_temp.slice(lo, hi);

  std::vector<Sample> samples(out.temperature.size(),
                              Sample{std::numeric_limits<double>::quiet_NaN(), Quality::kMissing});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (const auto j = filled_load.index_of(out.temperature.time_at(i))) samples[i] = filled_load[*j];
  }
  out.load = HourlySeries(lo, std::move(samples), load.unit());

  out.covariates.reserve(out.temperature.size());
  for (std::size_t i = 0; i < out.temperature.size(); ++i) {
    out.covariates.push_back(calendar.covariates(out.temperature.time_at(i)));
  }
  return out;
}

Design::Design(const ConsumerDataset& data, FeatureConfig cfg) : data_(&data), cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t n = data.size();
  delta_t_.resize(n);
  known_run_.resize(n);
  std::size_t run = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& t = data.temperature[i];
    if (t.usable()) {
      delta_t_[i] = delta_t(t.value, cfg_.nominal.threshold_c);
      ++run;
    } else {
      delta_t_[i] = std::numeric_limits<double>::quiet_NaN();
      run = 0;
    }
    known_run_[i] = run;
  }
}

bool Design::nominal_ready(std::size_t i) const {
  return i < known_run_.size() && known_run_[i] >= static_cast<std::size_t>(cfg_.nominal.lags) + 1;
}

bool Design::trainable(std::size_t i) const {
  return nominal_ready(i) && data_->load[i].usable();
}

Eigen::VectorXd Design::phi(std::size_t i) const {
  if (!nominal_ready(i)) {
    throw InsufficientHistory("nominal lag buffer not warm at " + format_timestamp(data_->time_at(i)));
  }
  const std::size_t first = i - static_cast<std::size_t>(cfg_.nominal.lags);
  return build_phi(std::span<const double>(delta_t_).subspan(first, i - first + 1), cfg_.nominal);
}

Eigen::VectorXd Design::gamma(std::size_t i) const {
  return build_gamma(data_->covariates.at(i), cfg_.latent);
}

std::optional<double> Design::target(std::size_t i) const {
  const Sample& s = data_->load[i];
  if (!s.usable()) return std::nullopt;
  return s.value;
}

}  // namespace lava
