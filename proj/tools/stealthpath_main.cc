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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stealthpath/error.h"
#include "stealthpath/experiment.h"

namespace {

using stealthpath::ExperimentConfig;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> rollouts;
  std::optional<double> dt;
  bool quick = false;
};

// Reads the config file and applies command-line overrides.
ExperimentConfig resolve(const GlobalFlags& g) {
  if (g.config.empty()) throw stealthpath::ConfigError("--config is required");
  ExperimentConfig c = stealthpath::load_config(g.config);
  if (g.seed) c.master_seed = *g.seed;
  if (g.out) c.output_dir = *g.out;
  if (g.rollouts) c.rollouts = *g.rollouts;
  if (g.dt) c.dt = *g.dt;
  if (g.quick) {
    c.eval_runs = std::min(c.eval_runs, 5);
    c.rollouts = std::min(c.rollouts, 500);
  }
  c.validate();
  return c;
}

template <typename Fn>
int with_config(const GlobalFlags& g, Fn&& fn) {
  try {
    return fn(resolve(g));
  } catch (const stealthpath::Error& e) {
    std::cerr << "error (" << stealthpath::to_string(e.kind())
              << "): " << e.what() << '\n';
    return stealthpath::kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stealthy attack synthesis and mitigation toolkit"};
  app.set_version_flag("--version", std::string(STEALTHPATH_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "Experiment config (YAML)");
  app.add_option("--seed", g.seed, "Master seed override");
  app.add_option("--out", g.out, "Output directory override");
  app.add_option("--rollouts", g.rollouts, "Rollouts per decision override")
      ->check(CLI::PositiveNumber);
  app.add_option("--dt", g.dt, "Integration step override")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quick", g.quick, "Reduced budgets for a smoke run");

  auto* synth = app.add_subcommand("synth", "Attacked or attack-free closed loops");
  auto* mitigate = app.add_subcommand("mitigate", "Certified saddle-point closed loops");

  stealthpath::DetectRequest detect_req;
  auto* detect = app.add_subcommand("detect", "Chi-square detector trade-off curves");
  detect->add_option("-K,--samples", detect_req.samples, "Samples per unit horizon")
      ->expected(1, -1);
  detect->add_option("--sigma", detect_req.sigma, "Attacked diffusion scale");
  detect->add_option("--tau", detect_req.taus, "Explicit thresholds")
      ->expected(1, -1);
  detect->add_option("--tau-count", detect_req.tau_count, "Log grid size")
      ->check(CLI::PositiveNumber);
  detect->add_option("--tau-min", detect_req.tau_min, "Log grid lower end");
  detect->add_option("--tau-max", detect_req.tau_max, "Log grid upper end");
  detect->add_option("--trials", detect_req.trials,
                     "Monte Carlo trials per hypothesis (0 skips)");

  stealthpath::ValidateOptions validate_opts;
  auto* validate = app.add_subcommand("validate", "Self-checks against closed forms");
  bool gamma_fault = false;
  validate->add_flag("--inject-gamma-fault", gamma_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stealthpath::kExitConfig;
  }

  if (*synth) {
    return with_config(g, [](const ExperimentConfig& c) {
      return stealthpath::cmd_synth(c, std::cout);
    });
  }
  if (*mitigate) {
    return with_config(g, [](const ExperimentConfig& c) {
      return stealthpath::cmd_mitigate(c, std::cout);
    });
  }
  if (*detect) {
    if (g.seed) detect_req.master_seed = *g.seed;
    if (g.out) detect_req.output_dir = *g.out;
    if (g.quick && detect_req.trials > 10000) detect_req.trials = 10000;
    return stealthpath::cmd_detect(detect_req, std::cout);
  }
  validate_opts.quick = g.quick;
  if (g.seed) validate_opts.master_seed = *g.seed;
  if (g.out) validate_opts.output_dir = *g.out;
  if (gamma_fault) {
    validate_opts.gamma_override = [](double xi, double lambda) {
      return xi * lambda / (lambda + xi);
    };
  }
  return stealthpath::cmd_validate(validate_opts, std::cout);
}
