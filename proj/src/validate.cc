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

// The validate subcommand: self-checks against closed forms and an
// independent PDE solve.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stealthpath/error.h"
#include "stealthpath/experiment.h"
#include "stealthpath/feynman_kac.h"
#include "stealthpath/parallel.h"

namespace stealthpath {
namespace {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double rel_err(double value, double ref) {
  return std::abs(value - ref) / std::abs(ref);
}

std::vector<Check> analytic_checks(std::uint64_t seed) {
  std::vector<Check> out;
  const auto suite = analytic_1d_suite();
  const TimeGrid grid = TimeGrid::covering(0.0, 1.0, 1e-3);
  const BiasEstimatorOptions window{10, true};

  const AnalyticProblem& atk = suite[1];
  const auto atk_dyn = atk.dynamics();
  const auto q = rollout_batch(atk_dyn, atk.cost(), grid, Vec::Zero(1),
                               FeedbackPolicy::zero(1), FeedbackPolicy::zero(1),
                               100000, SeedSpec{derive_seed(seed, 101)},
                               RolloutRecording::summary(10));
  const double v = estimate_value(q, atk.lambda).value;
  const double e_v = rel_err(v, atk.attack_value());
  out.push_back({"attack_value_1d", e_v <= 0.02,
                 "V=" + fmt(v) + " ref=" + fmt(atk.attack_value()) +
                     " rel_err=" + fmt(e_v)});
  const auto b = estimate_bias(q, atk.lambda, atk_dyn, Vec::Zero(1), 0.0, window);
  const double e_b = rel_err(b.theta(0), atk.attack_bias());
  out.push_back({"attack_bias_1d", e_b <= 0.05,
                 "theta=" + fmt(b.theta(0)) + " ref=" + fmt(atk.attack_bias()) +
                     " rel_err=" + fmt(e_b)});

  const AnalyticProblem& gm = suite[2];
  const auto gm_dyn = gm.dynamics();
  const auto gm_cost = gm.cost();
  const auto z = rollout_batch(gm_dyn, gm_cost, grid, Vec::Zero(1),
                               FeedbackPolicy::zero(1), FeedbackPolicy::zero(1),
                               100000, SeedSpec{derive_seed(seed, 102)},
                               RolloutRecording::summary(10));
  const GainCertificate cert =
      certify(gm_dyn, gm_cost, {{0.0, Vec::Zero(1)}}, gm.lambda);
  if (!cert.valid) {
    out.push_back({"game_certificate_1d", false, cert.diagnostic});
    return out;
  }
  const double gv = estimate_game_value(z, cert.alpha).value;
  const double e_gv = rel_err(gv, gm.game_value());
  out.push_back({"game_value_1d", e_gv <= 0.02,
                 "V=" + fmt(gv) + " ref=" + fmt(gm.game_value()) +
                     " rel_err=" + fmt(e_gv)});
  const auto sp = estimate_saddle_point(z, cert, gm_dyn, gm_cost, Vec::Zero(1),
                                        0.0, window);
  const double e_u = rel_err(sp.u_star(0), gm.game_control());
  const double e_t = rel_err(sp.theta_star(0), gm.game_bias());
  out.push_back({"game_control_1d", e_u <= 0.05,
                 "u=" + fmt(sp.u_star(0)) + " ref=" + fmt(gm.game_control()) +
                     " rel_err=" + fmt(e_u)});
  out.push_back({"game_bias_1d", e_t <= 0.05,
                 "theta=" + fmt(sp.theta_star(0)) +
                     " ref=" + fmt(gm.game_bias()) + " rel_err=" + fmt(e_t)});
  return out;
}

std::vector<Check> feynman_kac_checks(std::uint64_t seed, int points,
                                      int rollouts) {
  std::vector<Check> out;
  const TimeGrid grid = TimeGrid::covering(0.0, 1.0, 1e-3);
  for (double sign : {1.0, -1.0}) {
    const auto problem = bounded_cost_benchmark(1.0, sign);
    const PdeSolution pde = solve_feynman_kac(problem);
    const auto dyn = problem.dynamics();
    const auto cost = problem.cost();
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
      const double x = -1.8 + 3.6 * i / std::max(1, points - 1);
      Vec x0(1);
      x0 << x;
      const auto ens = rollout_batch(
          dyn, cost, grid, x0, FeedbackPolicy::zero(1), FeedbackPolicy::zero(1),
          rollouts, SeedSpec{derive_seed(seed, 200 + (sign > 0 ? 0 : 50), i)},
          RolloutRecording::summary(1));
      const double v = sign > 0 ? estimate_value(ens, 1.0).value
                                : estimate_game_value(ens, 1.0).value;
      worst = std::max(worst, rel_err(v, pde.value_at(x)));
    }
    out.push_back({sign > 0 ? "feynman_kac_attack" : "feynman_kac_game",
                   worst <= 0.02,
                   std::to_string(points) +
                       " points, max rel_err=" + fmt(worst)});
  }
  return out;
}

std::vector<Check> gain_checks(const ValidateOptions& options) {
  std::vector<Check> out;
  auto gamma_of = [&](double xi, double lambda) {
    return options.gamma_override ? options.gamma_override(xi, lambda)
                                  : gamma_from_xi(xi, lambda);
  };
  struct Case {
    std::string name;
    ControlAffineDynamics dyn;
    CostModel cost;
    std::vector<SamplePoint> samples;
    double lambda;
    double xi_ref;
    double gamma_ref;
  };
  const UnicycleScenario u;
  const CruiseScenario c;
  std::vector<Case> cases;
  cases.push_back({"unicycle", unicycle_dynamics(u), unicycle_cost(u),
                   unicycle_sample_points(u), 0.1, 0.01, 1.0 / 90.0});
  cases.push_back({"cruise", cruise_dynamics(c), cruise_cost(c),
                   cruise_sample_points(c), 1.5, 0.02, 0.03 / 1.48});
  for (double lambda : {0.05, 0.5, 2.0, 10.0}) {
    cases.push_back({"unicycle_lambda_" + fmt(lambda), unicycle_dynamics(u),
                     unicycle_cost(u), unicycle_sample_points(u), lambda, 0.01,
                     0.01 * lambda / (lambda - 0.01)});
  }
  for (const Case& k : cases) {
    const GainCertificate cert = certify(k.dyn, k.cost, k.samples, k.lambda);
    if (!cert.valid) {
      out.push_back({"gain_identity_" + k.name, false, cert.diagnostic});
      continue;
    }
    const double gamma = gamma_of(cert.xi, k.lambda);
    const double tol = 1e-9 * std::max(1.0, gamma);
    const bool pass = std::abs(cert.alpha - gamma) <= tol &&
                      std::abs(cert.xi - k.xi_ref) <= 1e-9 &&
                      std::abs(gamma - k.gamma_ref) <= tol;
    out.push_back({"gain_identity_" + k.name, pass,
                   "xi=" + fmt(cert.xi) + " gamma=" + fmt(gamma) +
                       " alpha=" + fmt(cert.alpha)});
  }
  return out;
}

std::vector<Check> special_function_checks() {
  std::vector<Check> out;
  double worst_sum = 0.0;
  for (double a = 0.5; a <= 500.0; a *= 1.7) {
    for (double x = 0.01; x <= 600.0; x *= 1.9) {
      const auto g = regularized_gamma(x, a);
      worst_sum = std::max(worst_sum, std::abs(g.lower + g.upper - 1.0));
    }
  }
  out.push_back({"gamma_complement", worst_sum <= 1e-12,
                 "max |P+Q-1|=" + fmt(worst_sum)});
  const double exp_case =
      std::abs(regularized_gamma(1.0, 1.0).lower - (1.0 - std::exp(-1.0)));
  const double erf_case = std::abs(regularized_gamma(0.5, 0.5).lower -
                                   std::erf(1.0 / std::sqrt(2.0)));
  out.push_back({"gamma_closed_forms", exp_case <= 1e-14 && erf_case <= 1e-14,
                 "exp err=" + fmt(exp_case) + " erf err=" + fmt(erf_case)});
  const double p_case = std::abs(pinsker_bound(0.625) - (1.0 - std::sqrt(0.3125)));
  const double bh_case = std::abs(bh_bound(std::log(2.0)) - 0.25);
  out.push_back({"kl_bounds", p_case <= 1e-15 && bh_case <= 1e-15,
                 "pinsker err=" + fmt(p_case) + " bh err=" + fmt(bh_case)});
  Mat bias(500, 2);
  bias.col(0).setConstant(0.3);
  bias.col(1).setConstant(0.4);
  const double kl = kl_cost(bias, TimeGrid{0.0, 0.01, 500});
  out.push_back({"kl_constant_bias", std::abs(kl - 0.625) <= 1e-12,
                 "kl=" + fmt(kl)});
  return out;
}

}  // namespace

int cmd_validate(const ValidateOptions& options, std::ostream& log) {
  try {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Check> checks = gain_checks(options);
    for (auto& c : special_function_checks()) checks.push_back(std::move(c));
    for (auto& c : analytic_checks(options.master_seed)) {
      checks.push_back(std::move(c));
    }
    const int points = options.quick ? 0 : 10;
    if (points > 0) {
      for (auto& c : feynman_kac_checks(options.master_seed, points, 20000)) {
        checks.push_back(std::move(c));
      }
    }

    std::ostringstream report;
    int failed = 0;
    for (const Check& c : checks) {
      report << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail
             << '\n';
      if (!c.pass) ++failed;
    }
    log << report.str();
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    const std::filesystem::path dir(options.output_dir);
    std::filesystem::create_directories(dir);
    write_file_atomically(dir / "validate_report.txt", report.str());
    RunManifest m;
    m.command = options.quick ? "validate --quick" : "validate";
    m.version = STEALTHPATH_VERSION;
    m.master_seed = options.master_seed;
    m.threads = default_thread_count();
    m.wall_seconds = secs;
    m.results = {{"checks", static_cast<double>(checks.size())},
                 {"failed", static_cast<double>(failed)}};
    write_file_atomically(dir / "manifest.json", render_manifest(m));
    log << checks.size() - failed << '/' << checks.size()
        << " checks passed in " << fmt(secs) << " s\n";
    return failed == 0 ? kExitOk : kExitNumerical;
  } catch (const Error& e) {
    log << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == ErrorKind::kAssumptionViolated ? kExitAssumption
                                                      : kExitNumerical;
  }
}

}  // namespace stealthpath
