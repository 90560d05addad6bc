// lava: simulate, train, predict, evaluate and aggregate heat-load forecasts.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <exception>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lava/building_sim.hpp"
#include "lava/config.hpp"
#include "lava/errors.hpp"
#include "lava/forecaster.hpp"
#include "lava/state_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using namespace lava;

enum ExitCode { kOk = 0, kFailure = 1, kConfigFailure = 2, kDataFailure = 3, kNumericFailure = 4 };

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void log(const std::string& line) { std::cerr << line << '\n'; }

fs::path require_path(const std::optional<fs::path>& p, const char* key) {
  if (!p) throw ConfigError(std::string("missing required setting ") + key);
  return *p;
}

Timestamp default_split(const ConsumerDataset& data, const EvaluationConfig& eval) {
  return eval.split.value_or(data.start() + kHour * 8760);
}

ConsumerDataset load_dataset(const fs::path& load, const fs::path& temperature, const Calendar& calendar) {
  const auto y = ingest_csv(load, Unit::kKilowatt);
  const auto t = ingest_csv(temperature, Unit::kCelsius);
  // Simulated datasets live in one directory per consumer.
  const bool generic = load.stem() == "load" && load.has_parent_path() && load.parent_path().has_filename();
  const std::string id = generic ? load.parent_path().filename().string() : load.stem().string();
  return make_dataset(id, y, t, calendar);
}

EvalOptions eval_options(const RunConfig& cfg, const ConsumerDataset& data, double forgetting) {
  EvalOptions e;
  e.split = default_split(data, cfg.evaluation);
  e.horizon = cfg.evaluation.horizon;
  e.seasonal_lag = cfg.evaluation.seasonal_lag;
  e.clamp_nonnegative = cfg.evaluation.clamp_nonnegative;
  e.coverage_z = cfg.evaluation.coverage_z;
  e.forgetting = forgetting;
  return e;
}

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["rrmse"] = r.rrmse;
  j["mae"] = r.mae;
  j["coverage95"] = r.coverage95;
  j["coverage95_noise_only"] = r.coverage95_noise_only;
  j["n_scored"] = r.n_scored;
  j["nonzero_params"] = r.nonzero_params;
  j["baseline_rrmse"] = std::isnan(r.baseline_rrmse) ? ordered_json(nullptr) : ordered_json(r.baseline_rrmse);
  return j;
}

std::string forecast_csv(const std::vector<ScoredForecast>& records) {
  std::ostringstream out;
  out << "timestamp,issue_time,actual,y_hat,y_nom,y_res,variance,noise_variance,baseline\n";
  for (const auto& r : records) {
    out << format_timestamp(r.forecast.target_time) << ',' << format_timestamp(r.forecast.issue_time) << ','
        << num(r.actual) << ',' << num(r.reported) << ',' << num(r.forecast.y_nom) << ',' << num(r.forecast.y_res)
        << ',' << num(r.forecast.variance) << ',' << num(r.forecast.noise_variance) << ','
        << (r.baseline ? num(*r.baseline) : "") << '\n';
  }
  return out.str();
}

const char* pattern_name(sim::VentilationPattern p) {
  switch (p) {
    case sim::VentilationPattern::kContinuous: return "continuous";
    case sim::VentilationPattern::kNightSetback: return "night-setback";
    case sim::VentilationPattern::kTimeClock5d: return "timeclock-5d";
    case sim::VentilationPattern::kTimeClock7d: return "timeclock-7d";
  }
  return "unknown";
}

std::string truth_csv(const ConsumerDataset& d, const sim::GroundTruth& t) {
  std::ostringstream out;
  out << "timestamp,space_heat_kw,ventilation_kw,internal_kw,tap_water_kw,building_temp,setpoint\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << format_timestamp(d.time_at(i)) << ',' << num(t.space_heat_kw[i]) << ',' << num(t.ventilation_kw[i]) << ','
        << num(t.internal_kw[i]) << ',' << num(t.tap_water_kw[i]) << ',' << num(t.building_temp[i]) << ','
        << num(t.setpoint[i]) << '\n';
  }
  return out.str();
}

ordered_json write_member(const fs::path& dir, const sim::SimulationResult& r) {
  write_text(dir / "load.csv", to_csv(r.dataset.load));
  write_text(dir / "temperature.csv", to_csv(r.dataset.temperature));
  write_text(dir / "truth.csv", truth_csv(r.dataset, r.truth));
  return {{"consumer_id", r.dataset.consumer_id},
          {"load", (dir / "load.csv").string()},
          {"temperature", (dir / "temperature.csv").string()},
          {"truth", (dir / "truth.csv").string()}};
}

int cmd_simulate(const RunConfig& cfg) {
  const fs::path out = require_path(cfg.paths.output, "paths.output");
  const auto calendar = make_calendar(cfg.calendar);
  const auto& s = cfg.simulation;
  ordered_json manifest;
  manifest["seed"] = s.run.seed;
  manifest["weather_seed"] = s.run.weather_seed.value_or(s.run.seed);
  manifest["config"] = ordered_json::parse(dump_run_config(cfg));
  ordered_json members = ordered_json::array();
  if (s.consumers == 1) {
    members.push_back(write_member(out, sim::simulate(s.building, s.schedule, s.run, calendar)));
  } else {
    const auto portfolio = sim::generate_portfolio(s.consumers, s.ranges, s.run.seed, s.run, s.schedule, calendar);
    for (const auto& m : portfolio) {
      ordered_json entry = write_member(out / m.result.dataset.consumer_id, m.result);
      entry["seed"] = m.config.seed;
      entry["loss_coefficient"] = m.building.loss_coefficient;
      entry["thermal_mass"] = m.building.thermal_mass;
      entry["setpoint"] = m.building.setpoint;
      entry["pattern"] = pattern_name(m.schedule.pattern);
      members.push_back(std::move(entry));
    }
  }
  manifest["members"] = members;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  log("simulate: wrote " + std::to_string(members.size()) + " consumer(s) to " + out.string());
  return kOk;
}

int cmd_train(const RunConfig& cfg) {
  const auto calendar = make_calendar(cfg.calendar);
  const auto data = load_dataset(require_path(cfg.paths.load, "paths.load"),
                                 require_path(cfg.paths.temperature, "paths.temperature"), calendar);
  const fs::path state_path = require_path(cfg.paths.state, "paths.state");
  const Design design(data, cfg.features);
  const Timestamp split = default_split(data, cfg.evaluation);
  const std::size_t end =
      split <= data.start() ? 0 : std::min(data.size(), static_cast<std::size_t>((split - data.start()) / kHour));
  FitTrace trace;
  StoredModel model;
  model.consumer_id = data.consumer_id;
  model.features = cfg.features;
  model.estimator = cfg.estimator;
  model.state = train(design, 0, end, cfg.estimator, cfg.forgetting, &trace);
  for (std::size_t i = end; i-- > 0;) {
    if (design.trainable(i)) {
      model.last_update = data.time_at(i);
      break;
    }
  }
  save_model(state_path, model);
  char line[256];
  std::snprintf(line, sizeof line,
                "train: %.0f samples, %d EM iterations%s, log-likelihood %.6f, %zu active / %zu non-zero of %zu "
                "latent parameters",
                model.state.stats.n, trace.iterations, trace.converged ? "" : " (not converged)",
                trace.loglik.empty() ? std::nan("") : trace.loglik.back(), model.state.active_count(),
                model.state.nonzero_count(), model.state.latent_dim());
  log(line);
  return kOk;
}

int cmd_predict(const RunConfig& cfg, const std::optional<std::string>& issue_text) {
  StoredModel model = load_model(require_path(cfg.paths.state, "paths.state"));
  const auto calendar = make_calendar(cfg.calendar);
  const auto data = load_dataset(require_path(cfg.paths.load, "paths.load"),
                                 require_path(cfg.paths.temperature, "paths.temperature"), calendar);
  const Design design(data, model.features);

  std::size_t issue = 0;
  if (issue_text) {
    const auto ts = parse_timestamp(*issue_text);
    if (!ts) throw ConfigError("--issue: cannot parse timestamp '" + *issue_text + "'");
    const auto idx = data.load.index_of(*ts);
    if (!idx) throw DataError("--issue " + *issue_text + " lies outside the data");
    issue = *idx;
  } else {
    bool found = false;
    for (std::size_t i = data.size(); i-- > 0;) {
      if (data.load[i].usable()) {
        issue = i;
        found = true;
        break;
      }
    }
    if (!found) throw DataError("no observed load to issue a forecast from");
  }

  // Fold in observations newer than the stored state up to the issue hour.
  std::size_t folded = 0;
  for (std::size_t i = 0; i <= issue; ++i) {
    if (model.last_update && data.time_at(i) <= *model.last_update) continue;
    if (!design.trainable(i)) continue;
    recursive_update_inplace(model.state, design.phi(i), design.gamma(i), *design.target(i), model.estimator);
    model.last_update = data.time_at(i);
    ++folded;
  }

  const auto fc = predict_horizon(model.state, design, issue, cfg.evaluation.horizon);
  std::ostringstream out;
  out << "issue_time,timestamp,horizon,y_hat,y_nom,y_res,variance,noise_variance\n";
  for (const auto& f : fc) {
    const double y = cfg.evaluation.clamp_nonnegative ? std::max(f.y_hat, 0.0) : f.y_hat;
    out << format_timestamp(f.issue_time) << ',' << format_timestamp(f.target_time) << ',' << f.horizon << ','
        << num(y) << ',' << num(f.y_nom) << ',' << num(f.y_res) << ',' << num(f.variance) << ','
        << num(f.noise_variance) << '\n';
  }
  if (cfg.paths.output) {
    write_text(*cfg.paths.output, out.str());
  } else {
    std::cout << out.str();
  }
  log("predict: folded " + std::to_string(folded) + " new hour(s), " + std::to_string(fc.size()) +
      " forecasts issued at " + format_timestamp(data.time_at(issue)));
  return kOk;
}

int cmd_evaluate(const RunConfig& cfg) {
  const auto calendar = make_calendar(cfg.calendar);
  const auto data = load_dataset(require_path(cfg.paths.load, "paths.load"),
                                 require_path(cfg.paths.temperature, "paths.temperature"), calendar);
  const fs::path out = require_path(cfg.paths.output, "paths.output");

  FeatureConfig features = cfg.features;
  EmOptions estimator = cfg.estimator;
  std::optional<StoredModel> stored;
  if (cfg.paths.state) {
    stored = load_model(*cfg.paths.state);
    features = stored->features;
    estimator = stored->estimator;
  }
  const EvalOptions eval = eval_options(cfg, data, stored ? stored->state.stats.forgetting : cfg.forgetting);
  const auto res = walk_forward(data, features, estimator, eval, stored ? &stored->state : nullptr);

  write_text(out / "forecast.csv", forecast_csv(res.records));
  ordered_json rep = report_json(res.report);
  rep["consumer_id"] = data.consumer_id;
  rep["split"] = format_timestamp(eval.split);
  rep["horizon"] = eval.horizon;
  write_text(out / "report.json", rep.dump(2) + "\n");
  char line[256];
  std::snprintf(line, sizeof line, "evaluate: rRMSE %.4f (seasonal-naive %.4f), coverage %.3f over %zu hours",
                res.report.rrmse, res.report.baseline_rrmse, res.report.coverage95, res.report.n_scored);
  log(line);
  return kOk;
}

struct Member {
  fs::path state;
  fs::path load;
  fs::path temperature;
};

Member parse_member(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError("--member expects STATE,LOAD,TEMPERATURE, got '" + spec + "'");
  return {parts[0], parts[1], parts[2]};
}

int cmd_aggregate(const RunConfig& cfg, const std::vector<std::string>& member_specs) {
  if (member_specs.empty()) throw ConfigError("aggregate needs at least one --member");
  const fs::path out = require_path(cfg.paths.output, "paths.output");
  const auto calendar = make_calendar(cfg.calendar);

  std::vector<StoredModel> models;
  std::vector<ConsumerDataset> data;
  for (const auto& spec : member_specs) {
    const Member m = parse_member(spec);
    models.push_back(load_model(m.state));
    data.push_back(load_dataset(m.load, m.temperature, calendar));
  }

  // One task per consumer; each pipeline runs sequentially.
  std::vector<std::vector<ScoredForecast>> per(data.size());
  std::vector<std::exception_ptr> errors(data.size());
  std::vector<std::thread> workers;
  for (std::size_t c = 0; c < data.size(); ++c) {
    workers.emplace_back([&, c] {
      try {
        const EvalOptions eval = eval_options(cfg, data[c], models[c].state.stats.forgetting);
        per[c] = walk_forward(data[c], models[c].features, models[c].estimator, eval, &models[c].state).records;
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const auto agg = aggregate_records(per);
  std::ostringstream csv;
  csv << "timestamp,actual_tot,y_tot,variance_tot,noise_variance_tot,members\n";
  std::vector<double> actual;
  std::vector<double> predicted;
  std::vector<double> variance;
  for (const auto& r : agg) {
    csv << format_timestamp(r.target_time) << ',' << num(r.actual_tot) << ',' << num(r.forecast.y_tot) << ','
        << num(r.forecast.variance_tot) << ',' << num(r.forecast.noise_variance_tot) << ','
        << r.forecast.members.size() << '\n';
    actual.push_back(r.actual_tot);
    predicted.push_back(r.forecast.y_tot);
    variance.push_back(r.forecast.variance_tot);
  }
  write_text(out / "portfolio.csv", csv.str());
  ordered_json rep;
  rep["members"] = data.size();
  rep["n_scored"] = agg.size();
  if (!agg.empty()) {
    rep["rrmse"] = rrmse(actual, predicted);
    rep["mae"] = mae(actual, predicted);
    rep["coverage95"] = coverage(actual, predicted, variance, cfg.evaluation.coverage_z);
  }
  write_text(out / "portfolio_report.json", rep.dump(2) + "\n");
  log("aggregate: " + std::to_string(data.size()) + " consumer(s), " + std::to_string(agg.size()) + " hours");
  return kOk;
}

// Human-readable name of latent component k under the fixed gamma ordering.
std::string describe_component(const LatentConfig& cfg, std::size_t k) {
  static const char* periodic_names[] = {"hour_of_day", "day_of_week", "week_of_year"};
  static const char* binary_names[] = {"weekend", "summer"};
  const std::size_t block = cfg.periodic_dimension();
  std::size_t selector = k / block + 1;  // index into gamma_b, constant entry dropped
  const std::size_t within = k % block;
  const std::size_t per_input = 2 * static_cast<std::size_t>(cfg.harmonics);
  const auto& input = cfg.periodic[within / per_input];
  const std::size_t harmonic = (within % per_input) / 2 + 1;
  std::string name = std::string(within % 2 == 0 ? "cos" : "sin") + "(" +
                     periodic_names[static_cast<int>(input.input)] + ", j=" + std::to_string(harmonic) + ")";
  std::vector<std::string> levels(cfg.binary.size());
  for (std::size_t b = cfg.binary.size(); b-- > 0;) {
    const std::size_t digit = selector % 3;
    selector /= 3;
    levels[b] = digit == 0 ? "" : std::string(binary_names[static_cast<int>(cfg.binary[b])]) + (digit == 1 ? "=1" : "=0");
  }
  for (const auto& l : levels) {
    if (!l.empty()) name += " | " + l;
  }
  return name;
}

int cmd_inspect(const RunConfig& cfg) {
  const StoredModel model = load_model(require_path(cfg.paths.state, "paths.state"));
  const auto doc = ordered_json::parse(serialize_model(model));
  const ModelState& st = model.state;
  ordered_json j;
  j["consumer_id"] = model.consumer_id;
  j["version"] = doc["version"];
  j["config"] = doc["config"];
  j["last_update"] = model.last_update ? ordered_json(format_timestamp(*model.last_update)) : ordered_json(nullptr);
  j["samples"] = st.stats.n;
  j["nominal_dim"] = st.nominal_dim();
  j["latent_dim"] = st.latent_dim();
  j["active"] = st.active_count();
  j["nonzero"] = st.nonzero_count();
  j["sigma2"] = st.sigma2;
  j["theta"] = std::vector<double>(st.theta.data(), st.theta.data() + st.theta.size());
  ordered_json comps = ordered_json::array();
  for (std::size_t k = 0; k < st.latent_dim(); ++k) {
    if (!st.active[k]) continue;
    const auto i = static_cast<Eigen::Index>(k);
    comps.push_back({{"index", k},
                     {"name", describe_component(model.features.latent, k)},
                     {"z", st.z_hat[i]},
                     {"prior_var", st.prior_var[i]},
                     {"posterior_sd", std::sqrt(std::max(st.posterior_cov(i, i), 0.0))}});
  }
  j["components"] = comps;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat-load forecasting with latent variable models"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> load, temperature, state, output, issue;
  std::vector<std::string> members;

  auto common = [&](CLI::App* cmd, bool data_paths) {
    cmd->add_option("-c,--config", config_path, "JSON run configuration");
    cmd->add_option("-s,--set", overrides, "override a config key, e.g. features.M=4")->take_all();
    if (data_paths) {
      cmd->add_option("--load", load, "load CSV (paths.load)");
      cmd->add_option("--temperature", temperature, "temperature CSV (paths.temperature)");
    }
  };

  auto* simulate = app.add_subcommand("simulate", "write a synthetic dataset and manifest");
  common(simulate, false);
  simulate->add_option("-o,--output", output, "output directory (paths.output)");

  auto* train_cmd = app.add_subcommand("train", "fit a model on the training window and save its state");
  common(train_cmd, true);
  train_cmd->add_option("--state", state, "state file to write (paths.state)");

  auto* predict_cmd = app.add_subcommand("predict", "issue an H-step forecast from a saved state");
  common(predict_cmd, true);
  predict_cmd->add_option("--state", state, "state file (paths.state)");
  predict_cmd->add_option("--issue", issue, "issue time; defaults to the last observed load hour");
  predict_cmd->add_option("-o,--output", output, "forecast CSV; stdout when omitted (paths.output)");

  auto* evaluate = app.add_subcommand("evaluate", "walk-forward evaluation with report and forecast CSV");
  common(evaluate, true);
  evaluate->add_option("--state", state, "trained state; trains on the training window when omitted");
  evaluate->add_option("-o,--output", output, "output directory (paths.output)");

  auto* aggregate_cmd = app.add_subcommand("aggregate", "walk-forward a portfolio and sum its forecasts");
  common(aggregate_cmd, false);
  aggregate_cmd->add_option("-m,--member", members, "STATE,LOAD,TEMPERATURE for one consumer")->take_all();
  aggregate_cmd->add_option("-o,--output", output, "output directory (paths.output)");

  auto* inspect = app.add_subcommand("inspect-state", "print a summary of a state file");
  common(inspect, false);
  inspect->add_option("state", state, "state file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    auto set_path = [&](const char* key, const std::optional<std::string>& v) {
      if (v) overrides.push_back(std::string("paths.") + key + "=" + ordered_json(*v).dump());
    };
    set_path("load", load);
    set_path("temperature", temperature);
    set_path("state", state);
    set_path("output", output);
    const RunConfig cfg = config_path ? load_run_config(*config_path, overrides) : parse_run_config("{}", overrides);

    if (*simulate) return cmd_simulate(cfg);
    if (*train_cmd) return cmd_train(cfg);
    if (*predict_cmd) return cmd_predict(cfg, issue);
    if (*evaluate) return cmd_evaluate(cfg);
    if (*aggregate_cmd) return cmd_aggregate(cfg, members);
    if (*inspect) return cmd_inspect(cfg);
    return kFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataFailure;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
