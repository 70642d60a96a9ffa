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
#include <ostream>
#include <string>

#include "stealthpath/error.h"
#include "weighted_increment.h"

namespace stealthpath {

ValueEstimate estimate_value(const TrajectoryEnsemble& ensemble,
                             double lambda) {
  // An uncontrolled ensemble is the Brownian measure with u = 0.
  if (ensemble.measure == SamplingMeasure::kNominal) {
    throw InvalidArgument(std::string("estimate_value: expected a ") +
                          to_string(SamplingMeasure::kBrownian) +
                          " ensemble, got " + to_string(ensemble.measure));
  }
  if (ensemble.count < 2) {
    throw InvalidArgument("estimate_value: need at least 2 rollouts");
  }
  if (!(lambda > 0.0)) {
    throw InvalidArgument("estimate_value: lambda must be positive");
  }
  const auto w = exponential_weights(ensemble.path_costs, lambda, 1.0);
  ValueEstimate out;
  out.value = lambda * w.log_mean;
  out.effective_sample_size = w.effective_sample_size;
  out.degenerate = w.effective_sample_size < 2.0;
  return out;
}

BiasEstimate estimate_bias(const TrajectoryEnsemble& ensemble, double lambda,
                           const ControlAffineDynamics& dyn, const Vec& x,
                           double t, const BiasEstimatorOptions& options) {
  const ValueEstimate value = estimate_value(ensemble, lambda);
  const auto w = exponential_weights(ensemble.path_costs, lambda, 1.0);
  const Vec mean_increment =
      internal::weighted_increment(ensemble, w.normalized, options);

  const Mat h = dyn.noise_gain(t, x);
  const Mat hht = h * h.transpose();
  const PseudoInverse pinv = pseudo_inverse(hht, 1e-10);

  BiasEstimate out;
  out.theta = h.transpose() * pinv.matrix * (h * mean_increment);
  out.value = value.value;
  out.effective_sample_size = value.effective_sample_size;
  out.degenerate = value.degenerate;
  out.gain_rank = pinv.rank;
  if (!out.theta.allFinite()) {
    throw NumericalFailure("estimate_bias: non-finite bias estimate");
  }
  return out;
}

AttackRecord synthesize_attack(const ControlAffineDynamics& dyn,
                               const CostModel& cost, const TimeGrid& grid,
                               const Vec& x0,
                               const FeedbackPolicy& control_policy,
                               const AttackConfig& config,
                               const SeedSpec& seed) {
  if (!(config.lambda > 0.0)) {
    throw InvalidArgument("synthesize_attack: lambda must be positive");
  }
  if (config.rollouts_per_decision < 2) {
    throw InvalidArgument("synthesize_attack: need at least 2 rollouts");
  }
  if (config.replan_every < 1) {
    throw InvalidArgument("synthesize_attack: replan_every must be >= 1");
  }

  AttackRecord record;
  Vec held = Vec::Zero(dyn.noise_dim());
  const SeedSpec path_seed{derive_seed(seed.master_seed, 0)};

  auto control = [&](int, double t, const ConstVecRef& x, VecRef out) {
    control_policy(t, x, out);
  };
  auto attacker = [&](int k, double t, const ConstVecRef& x, VecRef out) {
    if (k % config.replan_every == 0) {
      const TimeGrid remaining = grid.tail(k);
      const int window = std::min(config.estimator.window_steps,
                                  remaining.steps);
      BiasEstimatorOptions options = config.estimator;
      options.window_steps = window;
      const SeedSpec decision_seed{derive_seed(seed.master_seed, 1, k)};
      const Vec state = x;
      try {
        const auto ensemble = rollout_batch(
            dyn, cost, remaining, state, control_policy,
            FeedbackPolicy::zero(dyn.noise_dim()),
            config.rollouts_per_decision, decision_seed,
            RolloutRecording::summary(window));
        const auto estimate =
            estimate_bias(ensemble, config.lambda, dyn, state, t, options);
        held = estimate.theta;
        record.decision_ess.push_back(estimate.effective_sample_size);
        if (estimate.degenerate) ++record.degenerate_decisions;
      } catch (const IntegrationDiverged& e) {
        throw IntegrationDiverged(
            "attack decision ensemble failed: " + std::string(e.what()),
            std::nullopt, k);
      }
    }
    out = held;
  };

  record.path = simulate_path(dyn, cost, grid, x0, control, attacker,
                              path_seed);
  record.bias_history = record.path.biases;
  record.kl_cost = kl_cost(record.bias_history, grid);
  return record;
}

double kl_cost(const Mat& bias_history, const TimeGrid& grid) {
  if (bias_history.rows() != grid.steps) {
    throw InvalidArgument("kl_cost: bias history length differs from grid");
  }
  std::vector<double> squared(bias_history.rows());
  for (Eigen::Index k = 0; k < bias_history.rows(); ++k) {
    squared[k] = bias_history.row(k).squaredNorm();
  }
  return 0.5 * grid.dt * pairwise_sum(squared);
}

void write_attack_csv(std::ostream& out, const AttackRecord& record) {
  const PathRecord& path = record.path;
  const int n = static_cast<int>(path.states.cols());
  const int m = static_cast<int>(record.bias_history.cols());
  out << "step,t";
  for (int j = 0; j < n; ++j) out << ",x" << j;
  for (int j = 0; j < m; ++j) out << ",theta" << j;
  out << ",running_kl\n";
  const auto old_precision = out.precision(17);
  double running = 0.0;
  for (int k = 0; k <= path.grid.steps; ++k) {
    out << k << ',' << path.grid.time(k);
    for (int j = 0; j < n; ++j) out << ',' << path.states(k, j);
    for (int j = 0; j < m; ++j) {
      out << ',' << (k < path.grid.steps ? record.bias_history(k, j) : 0.0);
    }
    if (k < path.grid.steps) {
      running += 0.5 * record.bias_history.row(k).squaredNorm() *
                 path.grid.dt;
    }
    out << ',' << running << '\n';
  }
  out.precision(old_precision);
}

}  // namespace stealthpath
