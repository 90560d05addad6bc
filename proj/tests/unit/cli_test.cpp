#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

const fs::path& work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "lava_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, std::string* out = nullptr) {
  const fs::path capture = work_dir() / "stdout.txt";
  const std::string cmd =
      std::string(LAVA_CLI_PATH) + " " + args + " > " + capture.string() + " 2> " + (work_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(capture);
    *out = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// 60 days, one harmonic, split after 40 days: small enough to run in a second.
const std::string kSettings =
    "--set simulation.duration_hours=1440 --set features.M=1 --set features.n_b=6 "
    "--set evaluation.split='\"2019-02-10T00:00:00Z\"'";

const fs::path& simulated() {
  static const fs::path dir = [] {
    const auto d = work_dir() / "sim";
    EXPECT_EQ(run("simulate " + kSettings + " -o " + d.string()), 0);
    return d;
  }();
  return dir;
}

std::string data_args() {
  return " --load " + (simulated() / "load.csv").string() + " --temperature " +
         (simulated() / "temperature.csv").string();
}

TEST(Cli, SimulateWritesDatasetAndManifest) {
  const auto& d = simulated();
  for (const char* f : {"load.csv", "temperature.csv", "truth.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(d / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(manifest["config"]["simulation"]["duration_hours"], 1440);
  EXPECT_TRUE(manifest.contains("seed"));
  const auto again = work_dir() / "sim2";
  ASSERT_EQ(run("simulate " + kSettings + " -o " + again.string()), 0);
  EXPECT_EQ(slurp(d / "load.csv"), slurp(again / "load.csv"));
}

TEST(Cli, TrainIsDeterministicAndInspectable) {
  const auto a = work_dir() / "a.json";
  const auto b = work_dir() / "b.json";
  ASSERT_EQ(run("train " + kSettings + data_args() + " --state " + a.string()), 0);
  ASSERT_EQ(run("train " + kSettings + data_args() + " --state " + b.string()), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  std::string out;
  ASSERT_EQ(run("inspect-state " + a.string(), &out), 0);
  const auto j = nlohmann::json::parse(out);
  EXPECT_EQ(j["latent_dim"], 48);
  EXPECT_EQ(j["nominal_dim"], 8);
  EXPECT_EQ(j["components"].size(), j["active"].get<std::size_t>());
  EXPECT_EQ(j["last_update"], "2019-02-09T23:00:00Z");
}

TEST(Cli, EvaluateWritesReport) {
  const auto out = work_dir() / "eval";
  ASSERT_EQ(run("evaluate " + kSettings + data_args() + " -o " + out.string()), 0);
  const auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  for (const char* key :
       {"rrmse", "mae", "coverage95", "coverage95_noise_only", "n_scored", "nonzero_params", "baseline_rrmse"}) {
    EXPECT_TRUE(rep.contains(key)) << key;
  }
  EXPECT_GT(rep["n_scored"].get<int>(), 400);
  EXPECT_LT(rep["rrmse"].get<double>(), 1.0);
  std::istringstream csv(slurp(out / "forecast.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "timestamp,issue_time,actual,y_hat,y_nom,y_res,variance,noise_variance,baseline");
}

TEST(Cli, OneMemberAggregateMatchesEvaluate) {
  const auto state = work_dir() / "member.json";
  ASSERT_EQ(run("train " + kSettings + data_args() + " --state " + state.string()), 0);
  const auto ev = work_dir() / "eval_member";
  ASSERT_EQ(run("evaluate " + kSettings + data_args() + " --state " + state.string() + " -o " + ev.string()), 0);
  const auto ag = work_dir() / "agg";
  const std::string member =
      state.string() + "," + (simulated() / "load.csv").string() + "," + (simulated() / "temperature.csv").string();
  ASSERT_EQ(run("aggregate " + kSettings + " --member " + member + " -o " + ag.string()), 0);
  const auto a = nlohmann::json::parse(slurp(ag / "portfolio_report.json"));
  const auto e = nlohmann::json::parse(slurp(ev / "report.json"));
  EXPECT_EQ(a["n_scored"], e["n_scored"]);
  EXPECT_EQ(a["rrmse"].get<double>(), e["rrmse"].get<double>());
}

TEST(Cli, PredictEmitsHorizon) {
  const auto state = work_dir() / "predict.json";
  ASSERT_EQ(run("train " + kSettings + data_args() + " --state " + state.string()), 0);
  std::string out;
  ASSERT_EQ(run("predict " + kSettings + data_args() + " --state " + state.string() +
                    " --issue 2019-02-20T12:00:00Z",
                &out),
            0);
  std::istringstream lines(out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) ++n;
  EXPECT_EQ(n, 25);
  EXPECT_NE(out.find("2019-02-20T12:00:00Z,2019-02-21T12:00:00Z,24,"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--bogus"), 2);
  EXPECT_EQ(run("train --set features.M=0" + data_args() + " --state /tmp/x.json"), 2);
  EXPECT_EQ(run("train --set nope.key=1" + data_args() + " --state /tmp/x.json"), 2);
  EXPECT_EQ(run("aggregate -o " + (work_dir() / "none").string()), 2);
  EXPECT_EQ(run("train --load /nonexistent.csv --temperature /nonexistent.csv --state /tmp/x.json"), 3);
  EXPECT_EQ(run("inspect-state /nonexistent/state.json"), 3);
  const std::string unstable =
      "--set simulation.building.kp=1e9 --set simulation.building.max_heat=1e12 --set simulation.duration_hours=48";
  EXPECT_EQ(run("simulate " + unstable + " -o " + (work_dir() / "diverge").string()), 4);
}

}  // namespace
