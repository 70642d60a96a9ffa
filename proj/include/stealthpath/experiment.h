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

#ifndef STEALTHPATH_EXPERIMENT_H_
#define STEALTHPATH_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stealthpath/kl_attack.h"
#include "stealthpath/minimax_mitigation.h"
#include "stealthpath/scenarios.h"
#include "stealthpath/stealth_metrics.h"

namespace stealthpath {

enum class ScenarioKind { kUnicycle, kCruise, kAnalytic1d };
enum class RunMode { kNoAttack, kAttackOnly, kMitigate, kGame };

const char* to_string(ScenarioKind kind);
const char* to_string(RunMode mode);

struct ExperimentConfig {
  ScenarioKind scenario = ScenarioKind::kUnicycle;
  RunMode mode = RunMode::kAttackOnly;
  double lambda = 0.1;
  int rollouts = 2000;
  // Zero keeps the scenario's own step.
  double dt = 0.0;
  int replan_every = 50;
  int eval_runs = 100;
  std::uint64_t master_seed = 12345;
  std::string output_dir = "stealthpath_out";
  BiasEstimatorOptions estimator{5, true};
  // Which players act when mode is kGame.
  GameMode game_mode = GameMode::kBothPlay;
  // Source text, echoed into the manifest.
  std::string source;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Parses the YAML text. Errors carry the line and field name.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical YAML rendering of a config (all fields explicit).
std::string render_config(const ExperimentConfig& config);

// Model bundle for one scenario at the configured step.
struct ScenarioModel {
  std::string name;
  ControlAffineDynamics dynamics;
  CostModel cost;
  TimeGrid grid;
  Vec x0;
  FeedbackPolicy nominal;
  UnsafePredicate unsafe;
  std::vector<SamplePoint> samples;
  std::vector<std::string> state_names;
  std::vector<std::string> control_names;
  std::vector<std::string> noise_names;
};

ScenarioModel build_scenario(const ExperimentConfig& config);

struct EssSummary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  int decisions = 0;
  int degenerate = 0;
};

struct EvaluationRun {
  PathRecord path;
  double kl_cost = 0.0;
  std::optional<int> crash_step;
};

struct Evaluation {
  ExperimentConfig config;
  std::vector<EvaluationRun> runs;
  CrashReport crashes;
  EssSummary ess;
  std::optional<GainCertificate> certificate;
  double mean_kl = 0.0;
  double wall_seconds = 0.0;
};

// Runs config.eval_runs closed loops. Run r uses seed
// derive_seed(master_seed, r), so configurations sharing a seed share
// plant noise run by run. Throws AssumptionViolated when mitigation is
// requested and the gain certificate fails.
Evaluation evaluate(const ExperimentConfig& config);

void write_trajectories_csv(std::ostream& out, const Evaluation& eval,
                            const ScenarioModel& model);
void write_crash_report_csv(std::ostream& out, const Evaluation& eval);
void write_kl_report(std::ostream& out, const Evaluation& eval);

// Writes via a temporary file and rename so readers never see a partial
// file.
void write_file_atomically(const std::filesystem::path& path,
                           const std::string& contents);

struct RunManifest {
  std::string command;
  std::string config_echo;
  std::string version;
  std::uint64_t master_seed = 0;
  int threads = 1;
  double wall_seconds = 0.0;
  EssSummary ess;
  std::optional<GainCertificate> certificate;
  // Free-form numeric results (p_crash, mean_kl, ...).
  std::vector<std::pair<std::string, double>> results;
};

std::string render_manifest(const RunManifest& manifest);

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAssumption = 3;
inline constexpr int kExitNumerical = 4;

int cmd_synth(const ExperimentConfig& config, std::ostream& log);
int cmd_mitigate(const ExperimentConfig& config, std::ostream& log);

struct DetectRequest {
  std::vector<int> samples{100, 200, 300};
  double sigma = 1.1;
  // Explicit thresholds; when empty a log grid of tau_count points on
  // [tau_min, tau_max] is used.
  std::vector<double> taus;
  int tau_count = 50;
  double tau_min = 1e-3;
  double tau_max = 1e3;
  // Monte Carlo trials per hypothesis; zero skips the empirical check.
  std::int64_t trials = 0;
  std::uint64_t master_seed = 12345;
  std::string output_dir = "stealthpath_out";
};

int cmd_detect(const DetectRequest& request, std::ostream& log);

struct ValidateOptions {
  bool quick = false;
  std::string output_dir = "stealthpath_out";
  std::uint64_t master_seed = 12345;
  // Replaces the xi -> gamma map in the identity check. Test hook.
  std::function<double(double xi, double lambda)> gamma_override;
};

int cmd_validate(const ValidateOptions& options, std::ostream& log);

}  // namespace stealthpath

#endif  // STEALTHPATH_EXPERIMENT_H_
