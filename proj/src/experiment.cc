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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "stealthpath/error.h"
#include "stealthpath/parallel.h"

namespace stealthpath {
namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

[[noreturn]] void config_error(const YAML::Node& node, const std::string& key,
                               const std::string& what) {
  std::string where;
  if (node && !node.Mark().is_null()) {
    where = "line " + std::to_string(node.Mark().line + 1) + ": ";
  }
  throw ConfigError(where + "field '" + key + "': " + what);
}

template <typename T>
T read_scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) config_error(node, key, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    config_error(node, key, "cannot parse '" + node.Scalar() + "'");
  }
}

ScenarioKind parse_scenario(const YAML::Node& node) {
  const auto s = read_scalar<std::string>(node, "scenario");
  if (s == "unicycle") return ScenarioKind::kUnicycle;
  if (s == "cruise") return ScenarioKind::kCruise;
  if (s == "analytic_1d") return ScenarioKind::kAnalytic1d;
  config_error(node, "scenario",
               "expected unicycle, cruise or analytic_1d, got '" + s + "'");
}

RunMode parse_mode(const YAML::Node& node) {
  const auto s = read_scalar<std::string>(node, "mode");
  if (s == "no_attack") return RunMode::kNoAttack;
  if (s == "attack_only") return RunMode::kAttackOnly;
  if (s == "mitigate") return RunMode::kMitigate;
  if (s == "game") return RunMode::kGame;
  config_error(node, "mode",
               "expected no_attack, attack_only, mitigate or game, got '" + s +
                   "'");
}

GameMode parse_game_mode(const YAML::Node& node) {
  const auto s = read_scalar<std::string>(node, "game_mode");
  if (s == "both_play") return GameMode::kBothPlay;
  if (s == "controller_only") return GameMode::kControllerOnly;
  if (s == "attacker_only") return GameMode::kAttackerOnly;
  config_error(node, "game_mode",
               "expected both_play, controller_only or attacker_only, got '" +
                   s + "'");
}

void require_positive(const YAML::Node& node, const std::string& key,
                      double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    config_error(node, key, "must be positive");
  }
}

EssSummary summarize_ess(const std::vector<double>& ess, int degenerate) {
  EssSummary s;
  s.decisions = static_cast<int>(ess.size());
  s.degenerate = degenerate;
  if (ess.empty()) return s;
  s.min = *std::min_element(ess.begin(), ess.end());
  s.max = *std::max_element(ess.begin(), ess.end());
  s.mean = pairwise_sum(ess) / ess.size();
  return s;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidArgument:
      return kExitConfig;
    case ErrorKind::kAssumptionViolated:
      return kExitAssumption;
    case ErrorKind::kIntegrationDiverged:
    case ErrorKind::kNumericalFailure:
      return kExitNumerical;
  }
  return kExitNumerical;
}

template <typename Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    log << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

nlohmann::ordered_json certificate_json(const GainCertificate& c) {
  nlohmann::ordered_json j;
  j["lambda"] = c.lambda;
  j["xi"] = c.xi;
  j["gamma"] = c.gamma;
  j["alpha"] = c.alpha;
  j["valid"] = c.valid;
  j["diagnostic"] = c.diagnostic;
  return j;
}

std::string to_text(const std::function<void(std::ostream&)>& write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

void write_run_artifacts(const std::filesystem::path& dir,
                         const std::string& command, const Evaluation& eval,
                         const ScenarioModel& model) {
  std::filesystem::create_directories(dir);
  write_file_atomically(dir / "trajectories.csv", to_text([&](std::ostream& o) {
                          write_trajectories_csv(o, eval, model);
                        }));
  write_file_atomically(dir / "crash_report.csv", to_text([&](std::ostream& o) {
                          write_crash_report_csv(o, eval);
                        }));
  write_file_atomically(dir / "kl_report.txt", to_text([&](std::ostream& o) {
                          write_kl_report(o, eval);
                        }));
  if (eval.certificate) {
    write_file_atomically(dir / "certificate.txt",
                          to_text([&](std::ostream& o) {
                            write_certificate(o, *eval.certificate);
                          }));
  }
  RunManifest m;
  m.command = command;
  m.config_echo = render_config(eval.config);
  m.version = STEALTHPATH_VERSION;
  m.master_seed = eval.config.master_seed;
  m.threads = default_thread_count();
  m.wall_seconds = eval.wall_seconds;
  m.ess = eval.ess;
  m.certificate = eval.certificate;
  m.results = {{"p_crash", eval.crashes.p_crash},
               {"crashed", static_cast<double>(eval.crashes.crashed)},
               {"runs", static_cast<double>(eval.crashes.total)},
               {"mean_kl", eval.mean_kl}};
  write_file_atomically(dir / "manifest.json", render_manifest(m));
}

void log_summary(std::ostream& log, const Evaluation& eval) {
  log << to_string(eval.config.scenario) << ' ' << to_string(eval.config.mode)
      << " lambda=" << fmt(eval.config.lambda) << ": p_crash "
      << fmt(eval.crashes.p_crash) << " (" << eval.crashes.crashed << '/'
      << eval.crashes.total << "), mean kl " << fmt(eval.mean_kl)
      << ", wall " << fmt(eval.wall_seconds) << " s\n";
}

}  // namespace

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kUnicycle:
      return "unicycle";
    case ScenarioKind::kCruise:
      return "cruise";
    case ScenarioKind::kAnalytic1d:
      return "analytic_1d";
  }
  return "unknown";
}

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kNoAttack:
      return "no_attack";
    case RunMode::kAttackOnly:
      return "attack_only";
    case RunMode::kMitigate:
      return "mitigate";
    case RunMode::kGame:
      return "game";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ConfigError("field '" + key + "': " + what);
  };
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda", "must be positive");
  if (rollouts < 2) fail("rollouts", "must be at least 2");
  if (!(dt >= 0.0) || !std::isfinite(dt)) fail("dt", "must be positive");
  if (replan_every < 1) fail("replan_every", "must be at least 1");
  if (eval_runs < 1) fail("eval_runs", "must be at least 1");
  if (estimator.window_steps < 1) fail("estimator.window", "must be at least 1");
  if (output_dir.empty()) fail("output_dir", "must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) +
                      ": malformed YAML: " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("line 1: top level must be a mapping");

  ExperimentConfig c;
  c.source = text;
  bool game_mode_set = false;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "scenario") {
      c.scenario = parse_scenario(v);
    } else if (key == "mode") {
      c.mode = parse_mode(v);
    } else if (key == "lambda") {
      c.lambda = read_scalar<double>(v, key);
      require_positive(v, key, c.lambda);
    } else if (key == "rollouts") {
      c.rollouts = read_scalar<int>(v, key);
      if (c.rollouts < 2) config_error(v, key, "must be at least 2");
    } else if (key == "dt") {
      c.dt = read_scalar<double>(v, key);
      require_positive(v, key, c.dt);
    } else if (key == "replan_every") {
      c.replan_every = read_scalar<int>(v, key);
      if (c.replan_every < 1) config_error(v, key, "must be at least 1");
    } else if (key == "eval_runs") {
      c.eval_runs = read_scalar<int>(v, key);
      if (c.eval_runs < 1) config_error(v, key, "must be at least 1");
    } else if (key == "master_seed") {
      c.master_seed = read_scalar<std::uint64_t>(v, key);
    } else if (key == "output_dir") {
      c.output_dir = read_scalar<std::string>(v, key);
    } else if (key == "game_mode") {
      c.game_mode = parse_game_mode(v);
      game_mode_set = true;
    } else if (key == "estimator") {
      if (!v.IsMap()) config_error(v, key, "expected a mapping");
      for (const auto& e : v) {
        const auto sub = e.first.as<std::string>();
        if (sub == "window") {
          c.estimator.window_steps = read_scalar<int>(e.second, "estimator.window");
          if (c.estimator.window_steps < 1) {
            config_error(e.second, "estimator.window", "must be at least 1");
          }
        } else if (sub == "control_variate") {
          c.estimator.zero_mean_control_variate =
              read_scalar<bool>(e.second, "estimator.control_variate");
        } else {
          config_error(e.first, "estimator." + sub, "unknown field");
        }
      }
    } else {
      config_error(kv.first, key, "unknown field");
    }
  }
  if (game_mode_set && c.mode != RunMode::kGame) {
    throw ConfigError("field 'game_mode': only valid with mode: game");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "scenario: " << to_string(c.scenario) << '\n'
      << "mode: " << to_string(c.mode) << '\n';
  if (c.mode == RunMode::kGame) {
    out << "game_mode: " << to_string(c.game_mode) << '\n';
  }
  out << "lambda: " << fmt(c.lambda) << '\n'
      << "rollouts: " << c.rollouts << '\n';
  // Zero means the scenario's own step and is left implicit.
  if (c.dt > 0.0) out << "dt: " << fmt(c.dt) << '\n';
  out << "replan_every: " << c.replan_every << '\n'
      << "eval_runs: " << c.eval_runs << '\n'
      << "master_seed: " << c.master_seed << '\n'
      << "output_dir: " << c.output_dir << '\n'
      << "estimator:\n"
      << "  window: " << c.estimator.window_steps << '\n'
      << "  control_variate: "
      << (c.estimator.zero_mean_control_variate ? "true" : "false") << '\n';
  return out.str();
}

ScenarioModel build_scenario(const ExperimentConfig& config) {
  switch (config.scenario) {
    case ScenarioKind::kUnicycle: {
      UnicycleScenario s;
      if (config.dt > 0.0) s.dt = config.dt;
      return ScenarioModel{
          "unicycle",
          unicycle_dynamics(s),
          unicycle_cost(s),
          unicycle_grid(s),
          Eigen::Map<const Vec>(s.x0.data(), 4),
          unicycle_nominal_controller(s),
          [s](const ConstVecRef& x) { return unicycle_unsafe(s, x); },
          unicycle_sample_points(s),
          {"px", "py", "speed", "heading"},
          {"u_accel", "u_turn"},
          {"theta_accel", "theta_turn"}};
    }
    case ScenarioKind::kCruise: {
      CruiseScenario s;
      if (config.dt > 0.0) s.dt = config.dt;
      return ScenarioModel{
          "cruise",
          cruise_dynamics(s),
          cruise_cost(s),
          cruise_grid(s),
          Eigen::Map<const Vec>(s.x0.data(), 5),
          cruise_nominal_controller(s),
          [s](const ConstVecRef& x) { return cruise_unsafe(s, x); },
          cruise_sample_points(s),
          {"px", "py", "speed", "heading", "wheel"},
          {"u_accel", "u_wheel"},
          {"theta_accel", "theta_wheel"}};
    }
    case ScenarioKind::kAnalytic1d: {
      AnalyticProblem p = analytic_1d_suite()[2];
      p.lambda = config.lambda;
      const double dt = config.dt > 0.0 ? config.dt : 1e-2;
      return ScenarioModel{
          p.name,
          p.dynamics(),
          p.cost(),
          TimeGrid::covering(0.0, p.horizon, dt),
          Vec::Zero(1),
          FeedbackPolicy::zero(1),
          [](const ConstVecRef&) { return false; },
          {{0.0, Vec::Zero(1)}, {0.5, Vec::Ones(1)}},
          {"x"},
          {"u"},
          {"theta"}};
    }
  }
  throw ConfigError("unsupported scenario");
}

Evaluation evaluate(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const ScenarioModel model = build_scenario(config);
  Evaluation eval;
  eval.config = config;

  const bool game =
      config.mode == RunMode::kMitigate || config.mode == RunMode::kGame;
  if (game) {
    eval.certificate =
        certify(model.dynamics, model.cost, model.samples, config.lambda);
    if (!eval.certificate->valid) {
      throw AssumptionViolated(eval.certificate->diagnostic);
    }
  }
  const GameMode game_mode =
      config.mode == RunMode::kMitigate ? GameMode::kBothPlay : config.game_mode;

  std::vector<double> ess;
  int degenerate = 0;
  std::vector<double> kls;
  for (int r = 0; r < config.eval_runs; ++r) {
    const SeedSpec seed{derive_seed(config.master_seed, r)};
    EvaluationRun run;
    switch (config.mode) {
      case RunMode::kNoAttack: {
        // Same plant-noise stream as the attacked and game loops.
        const FeedbackPolicy& ctrl = model.nominal;
        run.path = simulate_path(
            model.dynamics, model.cost, model.grid, model.x0,
            [&ctrl](int, double t, const ConstVecRef& x, VecRef out) {
              ctrl(t, x, out);
            },
            nullptr, SeedSpec{derive_seed(seed.master_seed, 0)});
        break;
      }
      case RunMode::kAttackOnly: {
        const AttackConfig attack{config.lambda, config.rollouts,
                                  config.replan_every, config.estimator};
        AttackRecord rec =
            synthesize_attack(model.dynamics, model.cost, model.grid, model.x0,
                              model.nominal, attack, seed);
        run.kl_cost = rec.kl_cost;
        ess.insert(ess.end(), rec.decision_ess.begin(), rec.decision_ess.end());
        degenerate += rec.degenerate_decisions;
        run.path = std::move(rec.path);
        break;
      }
      case RunMode::kMitigate:
      case RunMode::kGame: {
        const GameConfig gc{config.rollouts, config.replan_every,
                            config.estimator};
        GameRecord rec = run_closed_loop_game(
            model.dynamics, model.cost, model.grid, model.x0,
            *eval.certificate, gc, seed, game_mode);
        ess.insert(ess.end(), rec.decision_ess.begin(), rec.decision_ess.end());
        degenerate += rec.degenerate_decisions;
        run.path = std::move(rec.path);
        run.kl_cost = kl_cost(run.path.biases, model.grid);
        break;
      }
    }
    run.crash_step = first_unsafe_step(run.path.states, model.unsafe);
    kls.push_back(run.kl_cost);
    eval.runs.push_back(std::move(run));
  }

  std::vector<const Mat*> states;
  for (const auto& run : eval.runs) states.push_back(&run.path.states);
  eval.crashes = crash_probability(states, model.unsafe);
  eval.ess = summarize_ess(ess, degenerate);
  eval.mean_kl = pairwise_sum(kls) / kls.size();
  eval.wall_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  return eval;
}

void write_trajectories_csv(std::ostream& out, const Evaluation& eval,
                            const ScenarioModel& model) {
  out << "run_id,step,t";
  for (const auto& n : model.state_names) out << ',' << n;
  for (const auto& n : model.control_names) out << ',' << n;
  for (const auto& n : model.noise_names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < eval.runs.size(); ++r) {
    const PathRecord& p = eval.runs[r].path;
    const int steps = p.grid.steps;
    for (int k = 0; k <= steps; ++k) {
      out << r << ',' << k << ',' << fmt(p.grid.time(k));
      for (Eigen::Index i = 0; i < p.states.cols(); ++i) {
        out << ',' << fmt(p.states(k, i));
      }
      for (Eigen::Index i = 0; i < p.controls.cols(); ++i) {
        out << ',' << fmt(k < steps ? p.controls(k, i) : 0.0);
      }
      for (Eigen::Index i = 0; i < p.biases.cols(); ++i) {
        out << ',' << fmt(k < steps ? p.biases(k, i) : 0.0);
      }
      out << '\n';
    }
  }
}

void write_crash_report_csv(std::ostream& out, const Evaluation& eval) {
  out << "run_id,crashed,first_unsafe_step,kl_cost\n";
  for (std::size_t r = 0; r < eval.runs.size(); ++r) {
    const auto& step = eval.crashes.crash_step[r];
    out << r << ',' << (step ? 1 : 0) << ',' << (step ? std::to_string(*step) : "")
        << ',' << fmt(eval.runs[r].kl_cost) << '\n';
  }
}

void write_kl_report(std::ostream& out, const Evaluation& eval) {
  const StealthReport report = kl_bound_report(eval.mean_kl);
  double max_kl = 0.0;
  for (const auto& run : eval.runs) max_kl = std::max(max_kl, run.kl_cost);
  out << "runs=" << eval.runs.size() << '\n'
      << "mean_kl=" << fmt(eval.mean_kl) << '\n'
      << "max_kl=" << fmt(max_kl) << '\n'
      << "p_crash=" << fmt(eval.crashes.p_crash) << '\n';
  write_stealth_report(out, report);
}

void write_file_atomically(const std::filesystem::path& path,
                           const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string render_manifest(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["master_seed"] = m.master_seed;
  j["threads"] = m.threads;
  j["wall_seconds"] = m.wall_seconds;
  j["config"] = m.config_echo;
  j["ess"] = {{"decisions", m.ess.decisions},
              {"degenerate", m.ess.degenerate},
              {"min", m.ess.min},
              {"mean", m.ess.mean},
              {"max", m.ess.max}};
  if (m.certificate) j["certificate"] = certificate_json(*m.certificate);
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.results) results[k] = v;
  j["results"] = results;
  return j.dump(2) + "\n";
}

int cmd_synth(const ExperimentConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    if (config.mode != RunMode::kNoAttack &&
        config.mode != RunMode::kAttackOnly) {
      throw ConfigError("field 'mode': synth runs no_attack or attack_only");
    }
    const Evaluation eval = evaluate(config);
    write_run_artifacts(config.output_dir, "synth", eval,
                        build_scenario(config));
    log_summary(log, eval);
    return kExitOk;
  });
}

int cmd_mitigate(const ExperimentConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    if (config.mode != RunMode::kMitigate && config.mode != RunMode::kGame) {
      throw ConfigError("field 'mode': mitigate runs mitigate or game");
    }
    const Evaluation eval = evaluate(config);
    write_run_artifacts(config.output_dir, "mitigate", eval,
                        build_scenario(config));
    log << "certificate: xi=" << fmt(eval.certificate->xi)
        << " gamma=" << fmt(eval.certificate->gamma)
        << " alpha=" << fmt(eval.certificate->alpha) << '\n';
    log_summary(log, eval);
    return kExitOk;
  });
}

int cmd_detect(const DetectRequest& req, std::ostream& log) {
  return guarded(log, [&] {
    if (req.samples.empty()) throw ConfigError("detect: no sample counts");
    std::vector<int> ks = req.samples;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    std::vector<DetectorSpec> specs;
    for (int k : ks) specs.push_back(DetectorSpec::unit_horizon(k, req.sigma));
    const std::vector<double> taus =
        req.taus.empty() ? log_spaced(req.tau_min, req.tau_max, req.tau_count)
                         : req.taus;

    const std::filesystem::path dir(req.output_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::vector<DetectionPoint>> curves;
    RunManifest m;
    m.command = "detect";
    m.version = STEALTHPATH_VERSION;
    m.master_seed = req.master_seed;
    m.threads = default_thread_count();
    const auto start = Clock::now();
    std::ostringstream echo;
    echo << "sigma: " << fmt(req.sigma) << "\nsamples:";
    for (int k : ks) echo << ' ' << k;
    echo << "\ntaus: " << taus.size() << "\ntrials: " << req.trials << '\n';
    m.config_echo = echo.str();

    for (const DetectorSpec& spec : specs) {
      curves.push_back(tradeoff_curve(spec, taus));
      const std::string name = ks.size() == 1
                                   ? "curve.csv"
                                   : "curve_K" + std::to_string(spec.samples) +
                                         ".csv";
      write_file_atomically(dir / name, to_text([&](std::ostream& o) {
                              write_curve_csv(o, curves.back());
                            }));
      double best = 2.0;
      for (const auto& p : curves.back()) best = std::min(best, p.alpha + p.beta);
      m.results.push_back({"min_alpha_plus_beta_K" +
                               std::to_string(spec.samples), best});
      log << "K=" << spec.samples << " sigma=" << fmt(req.sigma)
          << ": min alpha+beta " << fmt(best) << " -> " << dir / name << '\n';

      if (req.trials > 0) {
        const EmpiricalRates mc =
            empirical_np_test(spec, taus, req.trials,
                              SeedSpec{derive_seed(req.master_seed,
                                                   spec.samples)});
        double worst = 0.0;
        std::ostringstream csv;
        csv << "tau,alpha,alpha_empirical,beta,beta_empirical\n";
        for (std::size_t i = 0; i < taus.size(); ++i) {
          const auto& c = curves.back()[i];
          const auto& e = mc.points[i];
          worst = std::max({worst, std::abs(c.alpha - e.alpha),
                            std::abs(c.beta - e.beta)});
          csv << fmt(c.tau) << ',' << fmt(c.alpha) << ',' << fmt(e.alpha)
              << ',' << fmt(c.beta) << ',' << fmt(e.beta) << '\n';
        }
        write_file_atomically(
            dir / ("empirical_K" + std::to_string(spec.samples) + ".csv"),
            csv.str());
        m.results.push_back(
            {"max_empirical_gap_K" + std::to_string(spec.samples), worst});
        log << "  empirical check over " << req.trials
            << " trials: max |closed form - empirical| " << fmt(worst) << '\n';
      }
    }
    for (std::size_t i = 1; i < curves.size(); ++i) {
      const bool dom = dominates(curves[i], curves[i - 1]);
      m.results.push_back({"K" + std::to_string(ks[i]) + "_dominates_K" +
                               std::to_string(ks[i - 1]),
                           dom ? 1.0 : 0.0});
      log << "K=" << ks[i] << (dom ? " dominates " : " does not dominate ")
          << "K=" << ks[i - 1] << '\n';
    }
    m.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    write_file_atomically(dir / "manifest.json", render_manifest(m));
    return kExitOk;
  });
}

}  // namespace stealthpath
