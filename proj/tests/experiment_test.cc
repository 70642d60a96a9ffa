// Copyright 2026 The StealthPath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stealthpath/experiment.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stealthpath/error.h"
#include "stealthpath/parallel.h"

namespace stealthpath {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stealthpath_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config_error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig small(const std::string& yaml, const fs::path& out) {
  ExperimentConfig c = parse_config(yaml);
  c.output_dir = out.string();
  return c;
}

const char* kSmallAttack =
    "scenario: unicycle\nmode: attack_only\nlambda: 0.1\nrollouts: 50\n"
    "replan_every: 100\neval_runs: 2\nmaster_seed: 9\n";

TEST(Config, ParsesAllFields) {
  const auto c = parse_config(
      "scenario: cruise\nmode: game\ngame_mode: attacker_only\nlambda: 1.5\n"
      "rollouts: 300\ndt: 0.01\nreplan_every: 7\neval_runs: 4\n"
      "master_seed: 77\noutput_dir: x\nestimator:\n  window: 3\n"
      "  control_variate: false\n");
  EXPECT_EQ(c.scenario, ScenarioKind::kCruise);
  EXPECT_EQ(c.mode, RunMode::kGame);
  EXPECT_EQ(c.game_mode, GameMode::kAttackerOnly);
  EXPECT_EQ(c.lambda, 1.5);
  EXPECT_EQ(c.rollouts, 300);
  EXPECT_EQ(c.dt, 0.01);
  EXPECT_EQ(c.replan_every, 7);
  EXPECT_EQ(c.eval_runs, 4);
  EXPECT_EQ(c.master_seed, 77u);
  EXPECT_EQ(c.output_dir, "x");
  EXPECT_EQ(c.estimator.window_steps, 3);
  EXPECT_FALSE(c.estimator.zero_mean_control_variate);
}

TEST(Config, RenderRoundTrips) {
  const auto c = parse_config(kSmallAttack);
  const auto again = parse_config(render_config(c));
  EXPECT_EQ(render_config(again), render_config(c));
}

TEST(Config, ErrorsNameLineAndField) {
  EXPECT_NE(config_error_message("scenario: unicycle\nlambda: abc\n")
                .find("line 2: field 'lambda'"),
            std::string::npos);
  EXPECT_NE(config_error_message("scenario: unicycle\n\nrollout: 5\n")
                .find("line 3: field 'rollout': unknown field"),
            std::string::npos);
  EXPECT_NE(config_error_message("scenario: boat\n").find("field 'scenario'"),
            std::string::npos);
  EXPECT_NE(config_error_message("lambda: [1\n").find("line"),
            std::string::npos);
  EXPECT_NE(config_error_message("lambda: -1\n").find("field 'lambda'"),
            std::string::npos);
  EXPECT_NE(config_error_message("mode: mitigate\ngame_mode: both_play\n")
                .find("game_mode"),
            std::string::npos);
}

TEST(Commands, SynthWritesArtifactsAndIsByteStable) {
  const auto a = scratch("synth_a");
  const auto b = scratch("synth_b");
  std::ostringstream log;
  ASSERT_EQ(cmd_synth(small(kSmallAttack, a), log), kExitOk);
  set_thread_count(3);
  const int code = cmd_synth(small(kSmallAttack, b), log);
  set_thread_count(0);
  ASSERT_EQ(code, kExitOk);
  for (const char* f : {"trajectories.csv", "crash_report.csv",
                        "kl_report.txt", "manifest.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_EQ(slurp(a / "trajectories.csv"), slurp(b / "trajectories.csv"));
  EXPECT_EQ(slurp(a / "crash_report.csv"), slurp(b / "crash_report.csv"));
  EXPECT_EQ(slurp(a / "kl_report.txt"), slurp(b / "kl_report.txt"));

  const std::string header = slurp(a / "trajectories.csv").substr(0, 80);
  EXPECT_EQ(header.rfind("run_id,step,t,px,py,speed,heading,u_accel,u_turn,"
                        "theta_accel,theta_turn", 0),
            0u)
      << header;
  const std::string manifest = slurp(a / "manifest.json");
  EXPECT_NE(manifest.find("\"master_seed\": 9"), std::string::npos);
  EXPECT_NE(manifest.find("mode: attack_only"), std::string::npos);
  for (const auto& entry : fs::directory_iterator(a)) {
    EXPECT_NE(entry.path().extension(), ".tmp") << entry.path();
  }
}

TEST(Commands, ModeMismatchIsConfigError) {
  std::ostringstream log;
  const auto c = small(kSmallAttack, scratch("mismatch"));
  EXPECT_EQ(cmd_mitigate(c, log), kExitConfig);
}

TEST(Commands, MitigateRejectsUncertifiableLambda) {
  std::ostringstream log;
  const auto c = small(
      "scenario: unicycle\nmode: mitigate\nlambda: 0.005\nrollouts: 10\n"
      "eval_runs: 1\n",
      scratch("low_lambda"));
  EXPECT_EQ(cmd_mitigate(c, log), kExitAssumption);
}

TEST(Commands, MitigateWritesCertificate) {
  std::ostringstream log;
  const auto dir = scratch("mitigate");
  const auto c = small(
      "scenario: unicycle\nmode: mitigate\nlambda: 0.1\nrollouts: 50\n"
      "replan_every: 100\neval_runs: 1\n",
      dir);
  ASSERT_EQ(cmd_mitigate(c, log), kExitOk);
  const std::string cert = slurp(dir / "certificate.txt");
  EXPECT_NE(cert.find("valid=true"), std::string::npos);
  EXPECT_NE(cert.find("xi=0.01"), std::string::npos);
}

TEST(Commands, VanishingAttackHasNegligibleKl) {
  const auto e = evaluate(small(
      "scenario: unicycle\nmode: attack_only\nlambda: 1000000\nrollouts: 50\n"
      "replan_every: 50\neval_runs: 2\n",
      scratch("vanishing")));
  EXPECT_LE(e.mean_kl, 1e-3);
}

TEST(Commands, DetectSingleThreshold) {
  DetectRequest r;
  r.samples = {100};
  r.taus = {1.0};
  r.output_dir = scratch("detect").string();
  std::ostringstream log;
  ASSERT_EQ(cmd_detect(r, log), kExitOk);
  std::istringstream csv(slurp(fs::path(r.output_dir) / "curve.csv"));
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "tau,alpha,beta");
  EXPECT_FALSE(std::getline(csv, extra) && !extra.empty());
  const auto spec = DetectorSpec::unit_horizon(100, 1.1);
  double tau = 0, alpha = 0, beta = 0;
  ASSERT_EQ(std::sscanf(row.c_str(), "%lf,%lf,%lf", &tau, &alpha, &beta), 3);
  EXPECT_EQ(tau, 1.0);
  EXPECT_NEAR(alpha, np_alpha(spec, 1.0), 1e-15);
  EXPECT_NEAR(beta, np_beta(spec, 1.0), 1e-15);
}

TEST(Commands, DetectRejectsEqualHypotheses) {
  DetectRequest r;
  r.sigma = 1.0;
  r.output_dir = scratch("detect_sigma").string();
  std::ostringstream log;
  EXPECT_EQ(cmd_detect(r, log), kExitConfig);
}

TEST(Commands, ValidateFaultHookFailsIdentity) {
  ValidateOptions v;
  v.quick = true;
  v.output_dir = scratch("validate_fault").string();
  v.gamma_override = [](double xi, double lambda) {
    return xi * lambda / (lambda + xi);
  };
  std::ostringstream log;
  EXPECT_EQ(cmd_validate(v, log), kExitNumerical);
  EXPECT_NE(log.str().find("FAIL gain_identity_unicycle"), std::string::npos);
}

}  // namespace
}  // namespace stealthpath
