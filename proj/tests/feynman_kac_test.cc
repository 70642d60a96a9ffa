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

#include "stealthpath/feynman_kac.h"

#include <cmath>

#include <gtest/gtest.h>

#include "stealthpath/error.h"
#include "stealthpath/kl_attack.h"
#include "stealthpath/minimax_mitigation.h"

namespace stealthpath {
namespace {

FeynmanKacProblem constant_cost(double c, double sign) {
  FeynmanKacProblem p;
  p.drift = [](double x) { return -x; };
  p.state_cost = [c](double) { return c; };
  p.sign = sign;
  return p;
}

TEST(FeynmanKacPde, ConstantCostIsRecovered) {
  for (double sign : {1.0, -1.0}) {
    const PdeSolution sol = solve_feynman_kac(constant_cost(0.7, sign));
    for (double x : {-3.0, 0.0, 1.25}) {
      EXPECT_NEAR(sol.value_at(x), 0.7, 1e-6) << sign;
    }
  }
}

// Linear cost, zero drift, unit noise: V = a x tau +- a^2 tau^3 / (6 temp).
TEST(FeynmanKacPde, MatchesGaussianClosedForm) {
  FeynmanKacProblem p;
  p.drift = [](double) { return 0.0; };
  p.state_cost = [](double x) { return 0.3 * x; };
  PdeGrid grid;
  grid.x_min = -20.0;
  grid.x_max = 20.0;
  grid.cells = 4000;
  for (double sign : {1.0, -1.0}) {
    p.sign = sign;
    const PdeSolution sol = solve_feynman_kac(p, grid);
    for (double x : {-1.0, 0.0, 0.5}) {
      const double exact = 0.3 * x + sign * 0.09 / 6.0;
      EXPECT_NEAR(sol.value_at(x), exact, 1e-4) << sign << " " << x;
    }
  }
}

TEST(FeynmanKacPde, RefinementIsStable) {
  const auto p = bounded_cost_benchmark(1.0, 1.0);
  const PdeSolution coarse = solve_feynman_kac(p);
  PdeGrid fine;
  fine.cells = 3200;
  fine.time_steps = 4000;
  const PdeSolution refined = solve_feynman_kac(p, fine);
  for (double x = -2.0; x <= 2.0; x += 0.5) {
    EXPECT_NEAR(coarse.value_at(x), refined.value_at(x), 1e-4);
  }
}

TEST(FeynmanKacPde, RejectsBadInput) {
  auto p = bounded_cost_benchmark(1.0, 1.0);
  PdeGrid grid;
  grid.cells = 2;
  EXPECT_THROW(solve_feynman_kac(p, grid), InvalidArgument);
  p.temperature = 0.0;
  EXPECT_THROW(solve_feynman_kac(p), InvalidArgument);
  const PdeSolution sol = solve_feynman_kac(bounded_cost_benchmark(1.0, 1.0));
  EXPECT_THROW(sol.value_at(100.0), InvalidArgument);
}

TEST(FeynmanKacPde, RiskAttitudesBracketTheMean) {
  const PdeSolution seeking = solve_feynman_kac(bounded_cost_benchmark(1.0, 1.0));
  const PdeSolution averse = solve_feynman_kac(bounded_cost_benchmark(1.0, -1.0));
  for (double x : {-1.5, 0.0, 1.0}) {
    EXPECT_GT(seeking.value_at(x), averse.value_at(x));
  }
}

// Monte Carlo at a coarse step against the PDE, both risk attitudes.
TEST(FeynmanKacPde, AgreesWithMonteCarlo) {
  for (double sign : {1.0, -1.0}) {
    const auto problem = bounded_cost_benchmark(1.0, sign);
    const PdeSolution sol = solve_feynman_kac(problem);
    const auto dyn = problem.dynamics();
    const auto cost = problem.cost();
    const TimeGrid grid = TimeGrid::covering(0.0, 1.0, 1e-2);
    int i = 0;
    for (double x : {-1.4, 0.6, 1.8}) {
      Vec x0(1);
      x0 << x;
      const auto ens = rollout_batch(
          dyn, cost, grid, x0, FeedbackPolicy::zero(1), FeedbackPolicy::zero(1),
          20000, SeedSpec{derive_seed(31, i++)}, RolloutRecording::summary(1));
      const double v = sign > 0 ? estimate_value(ens, 1.0).value
                                : estimate_game_value(ens, 1.0).value;
      EXPECT_NEAR(v / sol.value_at(x), 1.0, 0.03) << sign << " " << x;
    }
  }
}

}  // namespace
}  // namespace stealthpath
