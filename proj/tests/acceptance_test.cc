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

// Acceptance suite. Prints one PASS/FAIL line per criterion followed by
// indented detail lines, and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stealthpath/experiment.h"
#include "stealthpath/feynman_kac.h"
#include "stealthpath/numeric.h"
#include "stealthpath/parallel.h"

namespace stealthpath {
namespace {

constexpr std::uint64_t kSeed = 12345;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double rel_err(double value, double ref) {
  return std::abs(value - ref) / std::abs(ref);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

const AnalyticProblem& attack_problem() {
  static const auto suite = analytic_1d_suite();
  return suite[1];
}

const AnalyticProblem& game_problem() {
  static const auto suite = analytic_1d_suite();
  return suite[2];
}

TrajectoryEnsemble analytic_ensemble(const AnalyticProblem& p, double dt,
                                     int count, std::uint64_t seed,
                                     int leading_steps) {
  const TimeGrid grid = TimeGrid::covering(p.t, p.t + p.horizon, dt);
  Vec x0(1);
  x0 << p.x;
  return rollout_batch(p.dynamics(), p.cost(), grid, x0,
                       FeedbackPolicy::zero(1), FeedbackPolicy::zero(1), count,
                       SeedSpec{seed}, RolloutRecording::summary(leading_steps));
}

const BiasEstimatorOptions kPolicyEstimator{10, true};

Outcome analytic_value() {
  Outcome o;
  const AnalyticProblem& p = attack_problem();
  set_thread_count(1);
  const auto start = std::chrono::steady_clock::now();
  const auto ens = analytic_ensemble(p, 1e-3, 100000, derive_seed(kSeed, 1),
                                     kPolicyEstimator.window_steps);
  const double v = estimate_value(ens, p.lambda).value;
  const double secs = seconds_since(start);
  set_thread_count(0);
  const double err = rel_err(v, p.attack_value());
  o.check(err <= 0.02, "V=" + fmt(v) + " ref=" + fmt(p.attack_value()) +
                           " rel_err=" + fmt(err) + " (<= 0.02)");
  o.check(secs <= 30.0,
          "single-threaded runtime " + fmt(secs) + " s (<= 30 s)");
  return o;
}

Outcome analytic_policies() {
  Outcome o;
  const AnalyticProblem& atk = attack_problem();
  const auto q = analytic_ensemble(atk, 1e-3, 100000, derive_seed(kSeed, 1),
                                   kPolicyEstimator.window_steps);
  const auto b = estimate_bias(q, atk.lambda, atk.dynamics(), Vec::Zero(1),
                               atk.t, kPolicyEstimator);
  const double e_b = rel_err(b.theta(0), atk.attack_bias());
  o.check(e_b <= 0.05, "attack theta=" + fmt(b.theta(0)) +
                           " ref=" + fmt(atk.attack_bias()) +
                           " rel_err=" + fmt(e_b) + " (<= 0.05)");

  const AnalyticProblem& gm = game_problem();
  const auto dyn = gm.dynamics();
  const auto cost = gm.cost();
  const GainCertificate cert =
      certify(dyn, cost, {{gm.t, Vec::Constant(1, gm.x)}}, gm.lambda);
  if (!cert.valid) {
    o.check(false, "game certificate: " + cert.diagnostic);
    return o;
  }
  const auto z = analytic_ensemble(gm, 1e-3, 100000, derive_seed(kSeed, 2),
                                   kPolicyEstimator.window_steps);
  const auto sp = estimate_saddle_point(z, cert, dyn, cost,
                                        Vec::Constant(1, gm.x), gm.t,
                                        kPolicyEstimator);
  const double e_u = rel_err(sp.u_star(0), gm.game_control());
  const double e_t = rel_err(sp.theta_star(0), gm.game_bias());
  o.check(e_u <= 0.05, "game u=" + fmt(sp.u_star(0)) +
                           " ref=" + fmt(gm.game_control()) +
                           " rel_err=" + fmt(e_u) + " (<= 0.05)");
  o.check(e_t <= 0.05, "game theta=" + fmt(sp.theta_star(0)) +
                           " ref=" + fmt(gm.game_bias()) +
                           " rel_err=" + fmt(e_t) + " (<= 0.05)");
  return o;
}

Outcome feynman_kac_agreement() {
  Outcome o;
  constexpr int kPoints = 10;
  constexpr int kRollouts = 20000;
  const TimeGrid grid = TimeGrid::covering(0.0, 1.0, 1e-3);
  for (double sign : {1.0, -1.0}) {
    const auto problem = bounded_cost_benchmark(1.0, sign);
    const PdeSolution pde = solve_feynman_kac(problem);
    const auto dyn = problem.dynamics();
    const auto cost = problem.cost();
    double worst = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double x = -1.8 + 3.6 * i / (kPoints - 1);
      const auto ens = rollout_batch(
          dyn, cost, grid, Vec::Constant(1, x), FeedbackPolicy::zero(1),
          FeedbackPolicy::zero(1), kRollouts,
          SeedSpec{derive_seed(kSeed, sign > 0 ? 3 : 4, i)},
          RolloutRecording::summary(1));
      const double v = sign > 0 ? estimate_value(ens, 1.0).value
                                : estimate_game_value(ens, 1.0).value;
      worst = std::max(worst, rel_err(v, pde.value_at(x)));
    }
    o.check(worst <= 0.02, std::string(sign > 0 ? "attack" : "game") +
                               " value vs PDE, 10 points, max rel_err=" +
                               fmt(worst) + " (<= 0.02)");
  }
  return o;
}

Outcome gain_identities() {
  Outcome o;
  const UnicycleScenario u;
  const CruiseScenario c;
  struct Case {
    std::string name;
    GainCertificate cert;
    double xi;
    double gamma;
  };
  const std::vector<Case> cases = {
      {"unicycle lambda=0.1",
       certify(unicycle_dynamics(u), unicycle_cost(u),
               unicycle_sample_points(u), 0.1),
       0.01, 0.01 * 0.1 / (0.1 - 0.01)},
      {"cruise lambda=1.5",
       certify(cruise_dynamics(c), cruise_cost(c), cruise_sample_points(c),
               1.5),
       0.02, 0.02 * 1.5 / (1.5 - 0.02)},
  };
  for (const Case& k : cases) {
    const GainCertificate& cert = k.cert;
    const bool ok = cert.valid && std::abs(cert.xi - k.xi) <= 1e-9 &&
                    std::abs(cert.gamma - k.gamma) <= 1e-9 &&
                    std::abs(cert.alpha - k.gamma) <= 1e-9 &&
                    std::abs(gamma_from_xi(cert.xi, cert.lambda) - k.gamma) <=
                        1e-9;
    o.check(ok, k.name + ": xi=" + fmt(cert.xi) + " gamma=" +
                    fmt(cert.gamma) + " alpha=" + fmt(cert.alpha) +
                    " expected xi=" + fmt(k.xi) + " gamma=alpha=" +
                    fmt(k.gamma));
  }
  return o;
}

ExperimentConfig scenario_config(const std::string& name) {
  return load_config(std::filesystem::path(STEALTHPATH_CONFIG_DIR) /
                     (name + ".yaml"));
}

struct Measured {
  double p_crash = 0.0;
  int crashed = 0;
  int total = 0;
};

Measured run_config(const ExperimentConfig& config, Outcome& o,
                    const std::string& label) {
  const Evaluation e = evaluate(config);
  o.details.push_back("     " + label + ": p_crash=" +
                      fmt(e.crashes.p_crash) + " (" +
                      std::to_string(e.crashes.crashed) + "/" +
                      std::to_string(e.crashes.total) + "), mean_kl=" +
                      fmt(e.mean_kl) + ", " + fmt(e.wall_seconds) + " s");
  return {e.crashes.p_crash, e.crashes.crashed, e.crashes.total};
}

Outcome scenario_trend(const std::string& scenario, double strong_lambda,
                       double weak_lambda, double strong_floor) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto none = run_config(scenario_config(scenario + "_no_attack"), o,
                               "no attack");
  const auto strong = run_config(
      scenario_config(scenario + "_attack_lambda" + fmt(strong_lambda)), o,
      "attack lambda=" + fmt(strong_lambda));
  const auto weak = run_config(
      scenario_config(scenario + "_attack_lambda" + fmt(weak_lambda)), o,
      "attack lambda=" + fmt(weak_lambda));
  const auto mitigated = run_config(scenario_config(scenario + "_mitigate"), o,
                                    "mitigation lambda=" + fmt(strong_lambda));
  const double secs = seconds_since(start);

  o.check(none.p_crash <= 0.02,
          "no attack p_crash " + fmt(none.p_crash) + " <= 0.02");
  o.check(strong.p_crash >= strong_floor,
          "attack lambda=" + fmt(strong_lambda) + " p_crash " +
              fmt(strong.p_crash) + " >= " + fmt(strong_floor));
  o.check(weak.p_crash < strong.p_crash,
          "p_crash(lambda=" + fmt(weak_lambda) + ") " + fmt(weak.p_crash) +
              " < p_crash(lambda=" + fmt(strong_lambda) + ") " +
              fmt(strong.p_crash));
  if (scenario == "unicycle") {
    o.check(none.p_crash < weak.p_crash,
            "p_crash(no attack) " + fmt(none.p_crash) + " < p_crash(lambda=" +
                fmt(weak_lambda) + ") " + fmt(weak.p_crash));
  }
  o.check(mitigated.p_crash <= 0.05,
          "mitigation p_crash " + fmt(mitigated.p_crash) + " <= 0.05");
  o.check(secs <= 900.0, "wall time " + fmt(secs) + " s (<= 900 s)");
  return o;
}

Outcome detector_closed_forms() {
  Outcome o;
  constexpr std::int64_t kTrials = 1000000;
  const std::vector<double> taus = {0.25, 0.5, 1.0, 2.0, 4.0};
  for (int k : {100, 200, 300}) {
    const auto spec = DetectorSpec::unit_horizon(k, 1.1);
    const auto closed = tradeoff_curve(spec, taus);
    const auto emp = empirical_np_test(spec, taus, kTrials,
                                       SeedSpec{derive_seed(kSeed, 7, k)});
    double worst_alpha = 0.0;
    double worst_beta = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
      worst_alpha = std::max(
          worst_alpha, std::abs(closed[i].alpha - emp.points[i].alpha));
      worst_beta =
          std::max(worst_beta, std::abs(closed[i].beta - emp.points[i].beta));
    }
    o.check(worst_alpha <= 0.005 && worst_beta <= 0.005,
            "K=" + std::to_string(k) + ": max |alpha diff|=" +
                fmt(worst_alpha) + " max |beta diff|=" + fmt(worst_beta) +
                " (<= 0.005, 1e6 trials)");
  }
  const auto grid = log_spaced(1e-3, 1e3, 50);
  const auto c100 = tradeoff_curve(DetectorSpec::unit_horizon(100, 1.1), grid);
  const auto c300 = tradeoff_curve(DetectorSpec::unit_horizon(300, 1.1), grid);
  o.check(dominates(c300, c100),
          "K=300 curve dominates K=100 curve on a 50-point tau grid");
  return o;
}

Outcome property_suites() {
  Outcome o;

  std::mt19937_64 gen(kSeed);
  std::normal_distribution<double> normal(3.0, 4.0);
  std::vector<double> costs(10000);
  for (double& c : costs) c = normal(gen);
  double worst_norm = 0.0;
  for (double temperature : {1e-3, 0.1, 1.0, 10.0}) {
    for (double sign : {1.0, -1.0}) {
      const auto w = exponential_weights(costs, temperature, sign);
      double total = 0.0;
      for (double v : w.normalized) total += v;
      worst_norm = std::max(worst_norm, std::abs(total - 1.0));
    }
  }
  o.check(worst_norm <= 1e-12,
          "weight normalization max |sum-1|=" + fmt(worst_norm));

  {
    AnalyticProblem atk = attack_problem();
    AnalyticProblem moved = atk;
    moved.offset += 2.5;
    const BiasEstimatorOptions opts{1, true};
    const auto a = analytic_ensemble(atk, 0.01, 4000, 21, 1);
    const auto b = analytic_ensemble(moved, 0.01, 4000, 21, 1);
    const double d =
        std::abs(estimate_bias(a, atk.lambda, atk.dynamics(), Vec::Zero(1),
                               0.0, opts).theta(0) -
                 estimate_bias(b, moved.lambda, moved.dynamics(), Vec::Zero(1),
                               0.0, opts).theta(0));
    o.check(d <= 1e-8, "baseline shift, attack theta diff=" + fmt(d));

    AnalyticProblem gm = game_problem();
    AnalyticProblem gm_moved = gm;
    gm_moved.offset += 2.5;
    const auto cert = certify(gm.dynamics(), gm.cost(), {{0.0, Vec::Zero(1)}},
                              gm.lambda);
    const auto za = analytic_ensemble(gm, 0.01, 4000, 22, 1);
    const auto zb = analytic_ensemble(gm_moved, 0.01, 4000, 22, 1);
    const auto sa = estimate_saddle_point(za, cert, gm.dynamics(), gm.cost(),
                                          Vec::Zero(1), 0.0, opts);
    const auto sb =
        estimate_saddle_point(zb, cert, gm_moved.dynamics(), gm_moved.cost(),
                              Vec::Zero(1), 0.0, opts);
    const double du = std::abs(sa.u_star(0) - sb.u_star(0));
    const double dt = std::abs(sa.theta_star(0) - sb.theta_star(0));
    o.check(cert.valid && du <= 1e-8 && dt <= 1e-8,
            "baseline shift, game u diff=" + fmt(du) +
                " theta diff=" + fmt(dt));
  }

  {
    const UnicycleScenario u;
    const auto dyn = unicycle_dynamics(u);
    const auto cost = unicycle_cost(u);
    const auto grid = unicycle_grid(u);
    const Vec x0 = Eigen::Map<const Vec>(u.x0.data(), u.x0.size());
    const auto nominal = unicycle_nominal_controller(u);
    auto run = [&](int threads) {
      set_thread_count(threads);
      auto ens = rollout_batch(dyn, cost, grid, x0, nominal,
                               FeedbackPolicy::zero(2), 203, SeedSpec{kSeed});
      set_thread_count(0);
      return ens;
    };
    const auto ref = run(1);
    bool same = true;
    for (int threads : {1, 2, 5, 8}) {
      const auto other = run(threads);
      same = same && ref.states == other.states &&
             ref.noise_increments == other.noise_increments &&
             ref.controls == other.controls &&
             ref.path_costs == other.path_costs;
    }
    const auto spec = DetectorSpec::unit_horizon(100, 1.1);
    const std::vector<double> taus = {0.5, 1.0, 2.0};
    auto rates = [&](int threads) {
      set_thread_count(threads);
      auto r = empirical_np_test(spec, taus, 20000, SeedSpec{kSeed});
      set_thread_count(0);
      return r;
    };
    const auto r1 = rates(1);
    const auto r4 = rates(4);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      same = same && r1.points[i].alpha == r4.points[i].alpha &&
             r1.points[i].beta == r4.points[i].beta;
    }
    o.check(same, "bitwise identical ensembles and detector rates for "
                  "repeated seeds and 1, 2, 4, 5, 8 threads");
  }

  double worst_pq = 0.0;
  for (double a = 0.5; a <= 500.0; a *= 1.3) {
    for (double x = 1e-3; x <= 2000.0; x *= 1.4) {
      const auto g = regularized_gamma(x, a);
      worst_pq = std::max(worst_pq, std::abs(g.lower + g.upper - 1.0));
    }
  }
  o.check(worst_pq <= 1e-12, "incomplete gamma max |P+Q-1|=" + fmt(worst_pq));

  const bool bounds_exact = pinsker_bound(0.0) == 1.0 &&
                            bh_bound(0.0) == 0.5 &&
                            pinsker_bound(0.625) == 1.0 - std::sqrt(0.3125) &&
                            bh_bound(0.625) == 0.5 * std::exp(-0.625);
  o.check(bounds_exact, "Pinsker/BH at kl=0: " + fmt(pinsker_bound(0.0)) +
                            ", " + fmt(bh_bound(0.0)) + "; at kl=0.625: " +
                            fmt(pinsker_bound(0.625)) + ", " +
                            fmt(bh_bound(0.625)));

  const TimeGrid grid = TimeGrid::covering(0.0, 5.0, 0.01);
  Mat bias(grid.steps, 2);
  bias.col(0).setConstant(0.3);
  bias.col(1).setConstant(0.4);
  const double kl = kl_cost(bias, grid);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", kl);
  o.check(kl == 0.625, std::string("kl_cost of constant bias (0.3, 0.4) "
                                   "over T=5 = ") + buf);
  return o;
}

// Scenario-level mitigation properties beyond the numbered criteria.
Outcome mitigation_modes() {
  Outcome o;
  const auto attacker = run_config(scenario_config("unicycle_attacker_only"),
                                   o, "attacker only lambda=0.1");
  ExperimentConfig controller = scenario_config("unicycle_mitigate");
  controller.mode = RunMode::kGame;
  controller.game_mode = GameMode::kControllerOnly;
  const auto ctrl = run_config(controller, o, "controller only lambda=0.1");
  o.check(attacker.p_crash >= 0.5, "attacker only p_crash " +
                                       fmt(attacker.p_crash) + " >= 0.5");
  o.check(ctrl.p_crash <= 0.05,
          "controller only p_crash " + fmt(ctrl.p_crash) + " <= 0.05");
  return o;
}

struct Entry {
  std::string label;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace stealthpath

int main() {
  using namespace stealthpath;
  const std::vector<Entry> entries = {
      {"criterion 1 analytic value oracle", analytic_value},
      {"criterion 2 analytic policy oracles", analytic_policies},
      {"criterion 3 Feynman-Kac agreement", feynman_kac_agreement},
      {"criterion 4 gain identities", gain_identities},
      {"criterion 5 unicycle crash trend",
       [] { return scenario_trend("unicycle", 0.1, 2.0, 0.5); }},
      {"criterion 6 cruise crash trend",
       [] { return scenario_trend("cruise", 1.5, 3.0, 0.15); }},
      {"criterion 7 detector closed forms", detector_closed_forms},
      {"criterion 8 property suites", property_suites},
      {"property mitigation modes", mitigation_modes},
  };

  int failed = 0;
  std::vector<std::string> summary;
  for (const Entry& e : entries) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o.check(false, std::string("exception: ") + ex.what());
    }
    const std::string line = std::string(o.pass ? "PASS " : "FAIL ") +
                             e.label + " (" + fmt(seconds_since(start)) +
                             " s)";
    std::cout << line << '\n';
    for (const std::string& d : o.details) std::cout << "    " << d << '\n';
    std::cout.flush();
    summary.push_back(line);
    if (!o.pass) ++failed;
  }
  std::cout << "\nSummary\n";
  for (const std::string& s : summary) std::cout << s << '\n';
  std::cout << (entries.size() - failed) << '/' << entries.size()
            << " passed\n";
  return failed == 0 ? 0 : 1;
}
