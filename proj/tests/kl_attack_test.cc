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

#include "stealthpath/kl_attack.h"

#include <cmath>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "stealthpath/error.h"

namespace stealthpath {
namespace {

// dx = h (theta dt + dw), no drift, no actuation.
ControlAffineDynamics brownian_1d(double h = 1.0) {
  return ControlAffineDynamics(
      1, 1, 1, [](double, const ConstVecRef&, VecRef out) { out.setZero(); },
      [](double, const ConstVecRef&, MatRef out) { out.setZero(); },
      [h](double, const ConstVecRef&, MatRef out) { out(0, 0) = h; }, true);
}

CostModel linear_cost(double slope, double horizon, double offset = 0.0) {
  return CostModel(
      [slope, offset](double, const ConstVecRef& x) {
        return slope * x(0) + offset;
      },
      Mat::Identity(1, 1), horizon);
}

TrajectoryEnsemble q_ensemble(const ControlAffineDynamics& dyn,
                              const CostModel& cost, const TimeGrid& grid,
                              double x0, int count, std::uint64_t seed,
                              int leading = 1) {
  return rollout_batch(dyn, cost, grid, Vec::Constant(1, x0),
                       FeedbackPolicy::zero(1), FeedbackPolicy::zero(1), count, SeedSpec{seed},
                       RolloutRecording::summary(leading));
}

// Standard error of the literal single-increment estimator with uniform
// weights: sqrt(dt / N) / dt.
double uniform_bias_stderr(const TrajectoryEnsemble& ens) {
  return 1.0 / std::sqrt(ens.grid.dt * ens.count);
}

TEST(EstimateValue, ConstantCostIsExact) {
  const auto grid = TimeGrid::covering(0.25, 2.0, 0.01);
  const CostModel cost([](double, const ConstVecRef&) { return 3.0; },
                       Mat::Identity(1, 1), 2.0);
  const auto ens = q_ensemble(brownian_1d(), cost, grid, 0.0, 64, 1);
  const auto v = estimate_value(ens, 0.37);
  EXPECT_NEAR(v.value, 3.0 * 1.75, 1e-12);
  EXPECT_NEAR(v.effective_sample_size, 64.0, 1e-9);
  EXPECT_FALSE(v.degenerate);
}

TEST(EstimateValue, LinearCostMatchesGaussianIntegral) {
  // V = a x tau + a^2 tau^3 / (6 lambda) = 1/6 at a = lambda = tau = 1.
  const auto grid = TimeGrid::covering(0.0, 1.0, 1e-3);
  const auto ens =
      q_ensemble(brownian_1d(), linear_cost(1.0, 1.0), grid, 0.0, 100000, 7);
  const double v = estimate_value(ens, 1.0).value;
  EXPECT_NEAR(v, 1.0 / 6.0, 0.02 / 6.0);
}

TEST(EstimateValue, LargeTemperatureApproachesMean) {
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.01);
  const CostModel cost(
      [](double, const ConstVecRef& x) { return std::sin(x(0)) + 1.5; },
      Mat::Identity(1, 1), 1.0);
  const auto ens = q_ensemble(brownian_1d(), cost, grid, 0.3, 5000, 3);
  const double mean = pairwise_sum(ens.path_costs) / ens.count;
  EXPECT_NEAR(estimate_value(ens, 1e6).value, mean, 1e-3 * std::abs(mean));
}

TEST(EstimateValue, RejectsWrongMeasureAndTinyEnsembles) {
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.1);
  const auto biased = rollout_batch(
      brownian_1d(), linear_cost(1, 1), grid, Vec::Zero(1),
      FeedbackPolicy::zero(1), FeedbackPolicy::constant(Vec::Ones(1)), 10,
      SeedSpec{1});
  EXPECT_THROW(estimate_value(biased, 1.0), InvalidArgument);
  const auto single =
      q_ensemble(brownian_1d(), linear_cost(1, 1), grid, 0.0, 1, 1);
  EXPECT_THROW(estimate_value(single, 1.0), InvalidArgument);
  const auto ok = q_ensemble(brownian_1d(), linear_cost(1, 1), grid, 0, 8, 1);
  EXPECT_THROW(estimate_value(ok, 0.0), InvalidArgument);
}

TEST(EstimateValue, FlagsDegenerateWeights) {
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.01);
  const auto ens =
      q_ensemble(brownian_1d(), linear_cost(50.0, 1.0), grid, 0.0, 200, 5);
  const auto v = estimate_value(ens, 1e-3);
  EXPECT_TRUE(v.degenerate);
  EXPECT_GE(v.effective_sample_size, 1.0);
  EXPECT_TRUE(std::isfinite(v.value));
}

TEST(EstimateBias, ConstantCostGivesZero) {
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.01);
  const CostModel cost([](double, const ConstVecRef&) { return 1.0; },
                       Mat::Identity(1, 1), 1.0);
  const auto ens = q_ensemble(brownian_1d(), cost, grid, 0.0, 20000, 9);
  const auto b = estimate_bias(ens, 0.5, brownian_1d(), Vec::Zero(1), 0.0);
  EXPECT_LE(std::abs(b.theta(0)), 3.0 * uniform_bias_stderr(ens));
  EXPECT_EQ(b.gain_rank, 1);
}

TEST(EstimateBias, EvenCostAtOriginGivesZero) {
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.01);
  const CostModel cost([](double, const ConstVecRef& x) { return x(0) * x(0); },
                       Mat::Identity(1, 1), 1.0);
  const auto ens = q_ensemble(brownian_1d(), cost, grid, 0.0, 20000, 10);
  const auto b = estimate_bias(ens, 1.0, brownian_1d(), Vec::Zero(1), 0.0);
  // Weights are bounded by e^{S/lambda}; inflate the uniform error by the
  // ESS deficit.
  const double se =
      uniform_bias_stderr(ens) * std::sqrt(ens.count / b.effective_sample_size);
  EXPECT_LE(std::abs(b.theta(0)), 3.0 * se);
}

TEST(EstimateBias, LiteralEstimatorIsUnbiasedOnLinearCost) {
  // theta* = a tau / lambda = 1. The single-increment estimator is noisy, so
  // average independent ensembles and compare against the pooled error.
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.01);
  const int reps = 20;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto ens = q_ensemble(brownian_1d(), linear_cost(1.0, 1.0), grid,
                                0.0, 20000, 100 + r);
    const double th =
        estimate_bias(ens, 1.0, brownian_1d(), Vec::Zero(1), 0.0).theta(0);
    sum += th;
    sum_sq += th * th;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sum_sq - reps * mean * mean) / (reps - 1));
  EXPECT_NEAR(mean, 1.0, 3.0 * sd / std::sqrt(reps) + 0.01);
}

TEST(EstimateBias, WindowedEstimatorMatchesGradientOracle) {
  // Held-bias estimator over a 10-step window: expected relative offset is
  // -window dt / (2 tau) = -0.5%.
  const auto grid = TimeGrid::covering(0.0, 1.0, 1e-3);
  const BiasEstimatorOptions options{10, true};
  const auto ens = q_ensemble(brownian_1d(), linear_cost(1.0, 1.0), grid, 0.0,
                              100000, 7, options.window_steps);
  const auto b =
      estimate_bias(ens, 1.0, brownian_1d(), Vec::Zero(1), 0.0, options);
  EXPECT_NEAR(b.theta(0), 1.0, 0.05);
}

TEST(EstimateBias, WindowLongerThanRecordingIsRejected) {
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.01);
  const auto ens =
      q_ensemble(brownian_1d(), linear_cost(1, 1), grid, 0.0, 10, 1, 2);
  EXPECT_THROW(estimate_bias(ens, 1.0, brownian_1d(), Vec::Zero(1), 0.0,
                             BiasEstimatorOptions{3, false}),
               InvalidArgument);
}

TEST(EstimateBias, SingularNoiseGainUsesPseudoInverse) {
  // Two states, one noise channel entering the second state only.
  const ControlAffineDynamics dyn(
      2, 1, 2, [](double, const ConstVecRef&, VecRef out) { out.setZero(); },
      [](double, const ConstVecRef&, MatRef out) { out.setZero(); },
      [](double, const ConstVecRef&, MatRef out) {
        out.setZero();
        out(1, 1) = 0.5;
      },
      true);
  const CostModel cost([](double, const ConstVecRef& x) { return x(1); },
                       Mat::Identity(1, 1), 1.0);
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.01);
  const auto ens = rollout_batch(dyn, cost, grid, Vec::Zero(2),
                                 FeedbackPolicy::constant(Vec::Zero(1)),
                                 FeedbackPolicy::zero(2), 5000, SeedSpec{4},
                                 RolloutRecording::summary(1));
  const auto b = estimate_bias(ens, 1.0, dyn, Vec::Zero(2), 0.0);
  EXPECT_EQ(b.gain_rank, 1);
  // The unexcited channel is projected out exactly.
  EXPECT_EQ(b.theta(0), 0.0);
  EXPECT_TRUE(b.theta.allFinite());
}

TEST(Invariants, BaselineShift) {
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.01);
  const double shift = 2.5;
  const auto base =
      q_ensemble(brownian_1d(), linear_cost(1.0, 1.0), grid, 0.2, 4000, 12);
  const auto moved = q_ensemble(brownian_1d(), linear_cost(1.0, 1.0, shift),
                                grid, 0.2, 4000, 12);
  const auto b0 = estimate_bias(base, 0.7, brownian_1d(), Vec::Zero(1), 0.0);
  const auto b1 = estimate_bias(moved, 0.7, brownian_1d(), Vec::Zero(1), 0.0);
  EXPECT_NEAR(b1.value - b0.value, shift * 1.0, 1e-9);
  EXPECT_NEAR(b1.theta(0), b0.theta(0), 1e-8);
}

TEST(Invariants, GradientConsistency) {
  // Central difference of the value with common random numbers, times
  // h / lambda, against the windowed bias estimate.
  const auto grid = TimeGrid::covering(0.0, 1.0, 1e-2);
  const double eps = 0.05;
  const auto plus = q_ensemble(brownian_1d(), linear_cost(1.0, 1.0), grid,
                               eps, 100000, 31);
  const auto minus = q_ensemble(brownian_1d(), linear_cost(1.0, 1.0), grid,
                                -eps, 100000, 31);
  const double fd =
      (estimate_value(plus, 1.0).value - estimate_value(minus, 1.0).value) /
      (2 * eps);
  const BiasEstimatorOptions options{2, true};
  const auto center = q_ensemble(brownian_1d(), linear_cost(1.0, 1.0), grid,
                                 0.0, 100000, 31, options.window_steps);
  const double theta =
      estimate_bias(center, 1.0, brownian_1d(), Vec::Zero(1), 0.0, options)
          .theta(0);
  EXPECT_NEAR(theta, fd * 1.0 / 1.0, 0.05 * std::abs(fd));
}

TEST(KlCost, Arithmetic) {
  const auto grid = TimeGrid::covering(0.0, 5.0, 0.01);
  EXPECT_EQ(kl_cost(Mat::Zero(grid.steps, 2), grid), 0.0);
  Mat constant(grid.steps, 2);
  constant.col(0).setConstant(0.3);
  constant.col(1).setConstant(0.4);
  EXPECT_NEAR(kl_cost(constant, grid), 0.625, 1e-12);
  EXPECT_THROW(kl_cost(Mat::Zero(3, 2), grid), InvalidArgument);
}

TEST(KlCost, PositiveIffNonzero) {
  const auto grid = TimeGrid::covering(0.0, 1.0, 0.1);
  Mat bias = Mat::Zero(grid.steps, 1);
  bias(4, 0) = 1e-6;
  EXPECT_GT(kl_cost(bias, grid), 0.0);
}

// Drift toward the origin keeps the plant bounded; the cost rewards x.
struct AttackFixture {
  ControlAffineDynamics dyn{
      1, 1, 1,
      [](double, const ConstVecRef& x, VecRef out) { out(0) = -x(0); },
      [](double, const ConstVecRef&, MatRef out) { out(0, 0) = 1.0; },
      [](double, const ConstVecRef&, MatRef out) { out(0, 0) = 0.3; }, true};
  CostModel cost{[](double, const ConstVecRef& x) { return x(0); },
                 Mat::Identity(1, 1), 1.0};
  TimeGrid grid = TimeGrid::covering(0.0, 1.0, 0.02);
  FeedbackPolicy control{1, [](double, const ConstVecRef& x, VecRef out) {
                           out(0) = -0.5 * x(0);
                         }};
};

TEST(SynthesizeAttack, VanishingIncentive) {
  AttackFixture fx;
  // With uniform weights the control variate cancels the increment noise
  // that the literal estimator would pass through.
  const AttackConfig config{1e6, 200, 5, {1, true}};
  const auto attacked = synthesize_attack(fx.dyn, fx.cost, fx.grid,
                                          Vec::Zero(1), fx.control, config,
                                          SeedSpec{8});
  EXPECT_LE(attacked.kl_cost, 1e-3);
  EXPECT_EQ(attacked.decision_ess.size(), 10u);
}

TEST(SynthesizeAttack, StrongerAttackCostsMoreKl) {
  AttackFixture fx;
  const auto weak = synthesize_attack(fx.dyn, fx.cost, fx.grid, Vec::Zero(1),
                                      fx.control, {2.0, 500, 5, {5, true}},
                                      SeedSpec{8});
  const auto strong = synthesize_attack(fx.dyn, fx.cost, fx.grid,
                                        Vec::Zero(1), fx.control,
                                        {0.1, 500, 5, {5, true}}, SeedSpec{8});
  EXPECT_GT(strong.kl_cost, weak.kl_cost);
  EXPECT_GT(strong.path.states(fx.grid.steps, 0),
            weak.path.states(fx.grid.steps, 0));
  // Bias is held between decisions.
  for (int k = 1; k < 5; ++k) {
    EXPECT_EQ(strong.bias_history(k, 0), strong.bias_history(0, 0));
  }
}

TEST(SynthesizeAttack, Deterministic) {
  AttackFixture fx;
  const AttackConfig config{0.5, 100, 10, {}};
  const auto a = synthesize_attack(fx.dyn, fx.cost, fx.grid, Vec::Zero(1),
                                   fx.control, config, SeedSpec{3});
  const auto b = synthesize_attack(fx.dyn, fx.cost, fx.grid, Vec::Zero(1),
                                   fx.control, config, SeedSpec{3});
  EXPECT_EQ(a.path.states, b.path.states);
  EXPECT_EQ(a.bias_history, b.bias_history);
}

TEST(SynthesizeAttack, RejectsBadConfig) {
  AttackFixture fx;
  EXPECT_THROW(synthesize_attack(fx.dyn, fx.cost, fx.grid, Vec::Zero(1),
                                 fx.control, {0.0, 100, 1, {}}, SeedSpec{1}),
               InvalidArgument);
  EXPECT_THROW(synthesize_attack(fx.dyn, fx.cost, fx.grid, Vec::Zero(1),
                                 fx.control, {1.0, 1, 1, {}}, SeedSpec{1}),
               InvalidArgument);
}

TEST(AttackCsv, Schema) {
  AttackFixture fx;
  const auto rec = synthesize_attack(fx.dyn, fx.cost, fx.grid, Vec::Zero(1),
                                     fx.control, {1.0, 50, 10, {}},
                                     SeedSpec{2});
  std::ostringstream out;
  write_attack_csv(out, rec);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,t,x0,theta0,running_kl");
  int rows = 0;
  std::string line, last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, fx.grid.steps + 1);
  const double final_kl = std::stod(last.substr(last.rfind(',') + 1));
  EXPECT_NEAR(final_kl, rec.kl_cost, 1e-12);
}

}  // namespace
}  // namespace stealthpath
