#include "lava/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <thread>

#include "lava/errors.hpp"

namespace lava {
namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::size_t index_at_or_after(const ConsumerDataset& data, Timestamp ts) {
  if (ts <= data.start()) return 0;
  const auto hours = (ts - data.start() + kHour - std::chrono::seconds(1)) / kHour;
  return std::min(static_cast<std::size_t>(hours), data.size());
}

}  // namespace

Forecast predict(const ModelState& state, const Eigen::VectorXd& phi, const Eigen::VectorXd& gamma) {
  if (phi.size() != state.theta.size() || gamma.size() != state.z_hat.size()) {
    throw DataError("predict: regressor dimensions do not match the model state");
  }
  Forecast f;
  f.y_nom = state.theta.dot(phi);
  f.y_res = state.z_hat.dot(gamma);
  f.y_hat = f.y_nom + f.y_res;
  f.noise_variance = state.sigma2;
  double latent_var = 0.0;
  if (gamma.size() > 0) {
    const auto idx = state.active_indices();
    if (!idx.empty()) {
      const Eigen::VectorXd g = gamma(idx);
      latent_var = g.dot(state.posterior_cov(idx, idx) * g);
    }
  }
  f.variance = state.sigma2 + std::max(latent_var, 0.0);
  return f;
}

std::vector<Forecast> predict_horizon(const ModelState& state, const Design& design, std::size_t issue_index,
                                      int horizon) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (issue_index >= design.size()) throw DataError("issue time outside the dataset");
  std::vector<Forecast> out;
  out.reserve(static_cast<std::size_t>(horizon));
  const Timestamp issue = design.data().time_at(issue_index);
  for (int h = 1; h <= horizon; ++h) {
    const std::size_t target = issue_index + static_cast<std::size_t>(h);
    if (target >= design.size() || !design.nominal_ready(target)) {
      throw DataError("missing temperature for forecast target " + format_timestamp(issue + kHour * h));
    }
    Forecast f = predict(state, design.phi(target), design.gamma(target));
    f.issue_time = issue;
    f.target_time = design.data().time_at(target);
    f.horizon = h;
    out.push_back(f);
  }
  return out;
}

PortfolioForecast aggregate(std::span<const Forecast> forecasts) {
  PortfolioForecast out;
  CompensatedSum mean;
  CompensatedSum var;
  CompensatedSum noise;
  for (const Forecast& f : forecasts) {
    if (!out.members.empty()) {
      const Forecast& first = out.members.front();
      if (f.issue_time != first.issue_time || f.horizon != first.horizon || f.target_time != first.target_time) {
        throw DataError("aggregate: forecasts have different issue times or horizons");
      }
    }
    out.members.push_back(f);
    mean.add(f.y_hat);
    var.add(f.variance);
    noise.add(f.noise_variance);
  }
  out.y_tot = mean.value();
  out.variance_tot = var.value();
  out.noise_variance_tot = noise.value();
  return out;
}

ModelState train(const Design& design, std::size_t from, std::size_t to, const EmOptions& opts, double forgetting,
                 FitTrace* trace) {
  SufficientStats stats = SufficientStats::zeros(design.config().nominal.dimension(),
                                                 design.config().latent.dimension(), forgetting);
  to = std::min(to, design.size());
  for (std::size_t i = from; i < to; ++i) {
    if (design.trainable(i)) stats.add(design.phi(i), design.gamma(i), *design.target(i));
  }
  if (stats.n < static_cast<double>(design.config().nominal.dimension())) {
    throw DataError("insufficient training data: " + std::to_string(static_cast<long>(stats.n)) + " usable hours");
  }
  return em_fit(stats, opts, nullptr, trace);
}

EvalReport score(std::span<const ScoredForecast> records, std::size_t nonzero_params, double coverage_z) {
  if (records.empty()) throw DataError("no forecasts to score");
  std::vector<double> actual;
  std::vector<double> predicted;
  std::vector<double> variance;
  std::vector<double> noise;
  std::vector<double> baseline;
  std::vector<double> baseline_actual;
  for (const auto& r : records) {
    actual.push_back(r.actual);
    predicted.push_back(r.reported);
    variance.push_back(r.forecast.variance);
    noise.push_back(r.forecast.noise_variance);
    if (r.baseline) {
      baseline.push_back(*r.baseline);
      baseline_actual.push_back(r.actual);
    }
  }
  EvalReport rep;
  rep.rrmse = rrmse(actual, predicted);
  rep.mae = mae(actual, predicted);
  rep.coverage95 = coverage(actual, predicted, variance, coverage_z);
  rep.coverage95_noise_only = coverage(actual, predicted, noise, coverage_z);
  rep.n_scored = records.size();
  rep.nonzero_params = nonzero_params;
  rep.baseline_rrmse = baseline.empty() ? std::nan("") : rrmse(baseline_actual, baseline);
  return rep;
}

WalkForwardResult walk_forward(const ConsumerDataset& data, const FeatureConfig& features, const EmOptions& opts,
                               const EvalOptions& eval, const ModelState* trained) {
  if (eval.horizon < 1) throw ConfigError("evaluation.horizon must be >= 1");
  if (eval.seasonal_lag < eval.horizon) throw ConfigError("seasonal lag must be >= horizon");
  const Design design(data, features);
  const std::size_t split = index_at_or_after(data, eval.split);
  if (split == 0 || split >= data.size()) throw DataError("split time must fall strictly inside the dataset");

  WalkForwardResult out;
  if (trained != nullptr) {
    if (trained->nominal_dim() != features.nominal.dimension() ||
        trained->latent_dim() != features.latent.dimension()) {
      throw ConfigError("model state does not match the feature configuration");
    }
    out.trained = *trained;
  } else {
    out.trained = train(design, 0, split, opts, eval.forgetting, &out.train_trace);
  }

  ModelState state = out.trained;
  const auto h = static_cast<std::size_t>(eval.horizon);
  const auto lag = static_cast<std::size_t>(eval.seasonal_lag);
  for (std::size_t issue = split - 1; issue < data.size(); ++issue) {
    const std::size_t target = issue + h;
    if (target < data.size() && design.nominal_ready(target)) {
      if (const auto actual = design.target(target)) {
        Forecast f = predict(state, design.phi(target), design.gamma(target));
        f.issue_time = data.time_at(issue);
        f.target_time = data.time_at(target);
        f.horizon = eval.horizon;
        ScoredForecast rec;
        rec.forecast = f;
        rec.actual = *actual;
        rec.reported = eval.clamp_nonnegative ? std::max(f.y_hat, 0.0) : f.y_hat;
        if (target >= lag) rec.baseline = design.target(target - lag);
        out.records.push_back(rec);
      }
    }
    const std::size_t next = issue + 1;
    if (next >= data.size()) break;
    if (design.trainable(next)) {
      recursive_update_inplace(state, design.phi(next), design.gamma(next), *design.target(next), opts);
    }
  }
  out.final_state = std::move(state);
  out.report = score(out.records, out.final_state.nonzero_count(), eval.coverage_z);
  return out;
}

std::vector<PortfolioRecord> aggregate_records(std::span<const std::vector<ScoredForecast>> per_consumer) {
  if (per_consumer.empty()) throw DataError("aggregate: empty portfolio");
  const auto& first = per_consumer.front();
  for (const auto& recs : per_consumer) {
    if (recs.size() != first.size()) throw DataError("aggregate: consumer timelines differ");
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (recs[i].forecast.target_time != first[i].forecast.target_time) {
        throw DataError("aggregate: consumer timelines differ at " + format_timestamp(recs[i].forecast.target_time));
      }
    }
  }
  std::vector<PortfolioRecord> out;
  out.reserve(first.size());
  std::vector<Forecast> members(per_consumer.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CompensatedSum actual;
    for (std::size_t c = 0; c < per_consumer.size(); ++c) {
      members[c] = per_consumer[c][i].forecast;
      actual.add(per_consumer[c][i].actual);
    }
    PortfolioRecord rec;
    rec.target_time = first[i].forecast.target_time;
    rec.actual_tot = actual.value();
    rec.forecast = aggregate(members);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<WalkForwardResult> walk_forward_portfolio(std::span<const ConsumerDataset> data,
                                                      const FeatureConfig& features, const EmOptions& opts,
                                                      const EvalOptions& eval, std::span<const ModelState> trained) {
  if (!trained.empty() && trained.size() != data.size()) throw DataError("one model state per consumer required");
  std::vector<WalkForwardResult> results(data.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                                              data.size()));
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t c = w; c < data.size(); c += workers) {
        results[c] = walk_forward(data[c], features, opts, eval, trained.empty() ? nullptr : &trained[c]);
      }
    }));
  }
  for (auto& t : tasks) t.get();
  return results;
}

}  // namespace lava
