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

#ifndef STEALTHPATH_KL_ATTACK_H_
#define STEALTHPATH_KL_ATTACK_H_

#include <iosfwd>
#include <vector>

#include "stealthpath/numeric.h"
#include "stealthpath/random.h"
#include "stealthpath/sde_engine.h"

namespace stealthpath {

// How the weighted noise average is turned into a bias per unit time.
struct BiasEstimatorOptions {
  // Number of leading increments aggregated; the estimate is the weighted
  // mean of their sum divided by window_steps * dt. One step reproduces the
  // instantaneous estimator; a longer window estimates the bias held
  // constant over the window and trades an O(window / horizon) bias for
  // lower variance.
  int window_steps = 1;
  // Subtract the unweighted increment mean (which has zero expectation)
  // from the weighted one.
  bool zero_mean_control_variate = false;
};

struct AttackConfig {
  double lambda = 1.0;
  int rollouts_per_decision = 2000;
  int replan_every = 1;
  BiasEstimatorOptions estimator{1, true};
};

struct ValueEstimate {
  double value = 0.0;
  double effective_sample_size = 0.0;
  // Set when fewer than two samples carry the weight.
  bool degenerate = false;
};

struct BiasEstimate {
  Vec theta;
  double value = 0.0;
  double effective_sample_size = 0.0;
  bool degenerate = false;
  // Rank of h h^T at the query point under the pseudo-inverse tolerance.
  int gain_rank = 0;
};

// lambda * log((1/N) sum exp(S_i / lambda)) over a Brownian-measure ensemble
// started at the query state.
ValueEstimate estimate_value(const TrajectoryEnsemble& ensemble,
                             double lambda);

// Optimal attack bias h^T pinv(h h^T) E[w h dw] / dt at (t, x).
BiasEstimate estimate_bias(const TrajectoryEnsemble& ensemble, double lambda,
                           const ControlAffineDynamics& dyn, const Vec& x,
                           double t, const BiasEstimatorOptions& options = {});

// One receding-horizon attacked closed loop.
struct AttackRecord {
  PathRecord path;
  Mat bias_history;  // steps x m, the applied bias
  double kl_cost = 0.0;
  std::vector<double> decision_ess;
  int degenerate_decisions = 0;
};

// Runs the plant under `control_policy` while the attacker re-estimates
// the bias from a fresh Brownian-measure ensemble over the remaining horizon
// every replan_every steps and holds it in between.
AttackRecord synthesize_attack(const ControlAffineDynamics& dyn,
                               const CostModel& cost, const TimeGrid& grid,
                               const Vec& x0,
                               const FeedbackPolicy& control_policy,
                               const AttackConfig& config,
                               const SeedSpec& seed);

// 1/2 sum_k |theta_k|^2 dt for a steps x m bias history.
double kl_cost(const Mat& bias_history, const TimeGrid& grid);

// Columns: step, t, x0..x{n-1}, theta0..theta{m-1}, running_kl. The terminal
// row carries the final state with zero bias.
void write_attack_csv(std::ostream& out, const AttackRecord& record);

}  // namespace stealthpath

#endif  // STEALTHPATH_KL_ATTACK_H_
