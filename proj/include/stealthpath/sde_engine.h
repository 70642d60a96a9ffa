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

#ifndef STEALTHPATH_SDE_ENGINE_H_
#define STEALTHPATH_SDE_ENGINE_H_

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stealthpath/numeric.h"
#include "stealthpath/random.h"

namespace stealthpath {

using ConstVecRef = Eigen::Ref<const Vec>;
using VecRef = Eigen::Ref<Vec>;
using MatRef = Eigen::Ref<Mat>;

// dx = f(t,x) dt + g(t,x) u dt + h(t,x) (theta dt + dw).
//
// The callbacks write into caller-owned buffers of the declared shapes and
// must be pure. When `gains_state_independent` is set, g and h are evaluated
// once per trajectory.
class ControlAffineDynamics {
 public:
  using DriftFn = std::function<void(double t, const ConstVecRef& x, VecRef out)>;
  using GainFn = std::function<void(double t, const ConstVecRef& x, MatRef out)>;

  ControlAffineDynamics(int state_dim, int control_dim, int noise_dim,
                        DriftFn drift, GainFn control_gain, GainFn noise_gain,
                        bool gains_state_independent = false);

  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  int noise_dim() const { return noise_dim_; }
  bool gains_state_independent() const { return gains_state_independent_; }

  void drift(double t, const ConstVecRef& x, VecRef out) const {
    drift_(t, x, out);
  }
  void control_gain(double t, const ConstVecRef& x, MatRef out) const {
    control_gain_(t, x, out);
  }
  void noise_gain(double t, const ConstVecRef& x, MatRef out) const {
    noise_gain_(t, x, out);
  }

  Vec drift(double t, const ConstVecRef& x) const;
  Mat control_gain(double t, const ConstVecRef& x) const;
  Mat noise_gain(double t, const ConstVecRef& x) const;

 private:
  int state_dim_;
  int control_dim_;
  int noise_dim_;
  DriftFn drift_;
  GainFn control_gain_;
  GainFn noise_gain_;
  bool gains_state_independent_;
};

// Running cost c(t,x,u) = state_cost(t,x) + 1/2 u^T R(t,x) u on [0, horizon].
class CostModel {
 public:
  using StateCostFn = std::function<double(double t, const ConstVecRef& x)>;
  using WeightFn = std::function<void(double t, const ConstVecRef& x, MatRef out)>;

  // Constant control weight R.
  CostModel(StateCostFn state_cost, Mat control_weight, double horizon);
  // State-dependent control weight.
  CostModel(StateCostFn state_cost, int control_dim, WeightFn control_weight,
            double horizon);

  double state_cost(double t, const ConstVecRef& x) const {
    return state_cost_(t, x);
  }
  void control_weight(double t, const ConstVecRef& x, MatRef out) const;
  Mat control_weight(double t, const ConstVecRef& x) const;

  // `scratch` must be control_dim x control_dim; it is only touched when R
  // is state dependent and u is nonzero.
  double running_cost(double t, const ConstVecRef& x, const ConstVecRef& u,
                      Mat& scratch) const;

  // Same model with `offset` added to the state cost.
  CostModel shifted(double offset) const;

  int control_dim() const { return control_dim_; }
  double horizon() const { return horizon_; }
  bool has_constant_weight() const { return !weight_fn_; }

 private:
  StateCostFn state_cost_;
  int control_dim_;
  Mat constant_weight_;
  WeightFn weight_fn_;
  double horizon_;
};

// Uniform grid t_k = t0 + k dt, k = 0..steps.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  int steps = 0;

  // steps = round((horizon - t0) / dt); rejects grids whose step count does
  // not tile [t0, horizon] within 1e-9.
  static TimeGrid covering(double t0, double horizon, double dt);

  double time(int k) const { return t0 + k * dt; }
  double end() const { return time(steps); }
  // The remaining grid starting at step k.
  TimeGrid tail(int k) const;
  Vec times() const;
};

// State feedback policy (t, x) -> R^dim, with an explicit zero marker used
// for measure tagging.
class FeedbackPolicy {
 public:
  using Fn = std::function<void(double t, const ConstVecRef& x, VecRef out)>;

  FeedbackPolicy(int dim, Fn fn);
  static FeedbackPolicy zero(int dim);
  static FeedbackPolicy constant(const Vec& value);

  int dim() const { return dim_; }
  bool is_zero() const { return !fn_; }
  void operator()(double t, const ConstVecRef& x, VecRef out) const {
    if (fn_) {
      fn_(t, x, out);
    } else {
      out.setZero();
    }
  }

 private:
  int dim_;
  Fn fn_;
};

enum class SamplingMeasure {
  kNominal,       // P: control and/or bias active
  kBrownian,      // Q: bias identically zero
  kUncontrolled,  // Z: bias and control identically zero
};

const char* to_string(SamplingMeasure measure);

// What a rollout keeps besides the path costs. Estimators only need the
// leading noise increments, which keeps large ensembles cheap.
struct RolloutRecording {
  bool states = true;
  // Per-step noise/control/bias arrays are kept for the first
  // `leading_steps` steps; negative means all steps.
  int leading_steps = -1;

  static RolloutRecording full() { return {}; }
  static RolloutRecording summary(int leading_steps) {
    return {false, leading_steps};
  }
};

struct TrajectoryEnsemble {
  int count = 0;
  int state_dim = 0;
  int control_dim = 0;
  int noise_dim = 0;
  TimeGrid grid;
  SamplingMeasure measure = SamplingMeasure::kNominal;
  bool states_recorded = false;
  int recorded_steps = 0;

  std::vector<double> states;            // count x (steps+1) x state_dim
  std::vector<double> noise_increments;  // count x recorded_steps x noise_dim
  std::vector<double> controls;          // count x recorded_steps x control_dim
  std::vector<double> biases;            // count x recorded_steps x noise_dim
  std::vector<double> path_costs;        // count

  Vec times() const { return grid.times(); }
  Eigen::Map<const Vec> state(int i, int k) const;
  Eigen::Map<const Vec> noise_increment(int i, int k) const;
  Eigen::Map<const Vec> control(int i, int k) const;
  Eigen::Map<const Vec> bias(int i, int k) const;
  // Path i as a (steps+1) x state_dim matrix.
  Mat path(int i) const;
  // Controls of path i over the recorded steps, recorded_steps x control_dim.
  Mat path_controls(int i) const;
  // Sum of the first `steps` noise increments of path i.
  Vec leading_increment(int i, int steps) const;
};

// One Euler-Maruyama step x + f dt + g u dt + h (theta dt + dw). Throws
// IntegrationDiverged if the result is not finite.
Vec em_step(const Vec& x, double t, const Vec& u, const Vec& theta,
            const Vec& dw, const ControlAffineDynamics& dyn, double dt);

// N independent Euler-Maruyama paths from x0 over `grid`. Path i, step k
// draws dw from counter (seed, i, k). Path costs are the left-endpoint
// Riemann sums dt * sum_k c(t_k, x_k, u_k), reduced pairwise.
TrajectoryEnsemble rollout_batch(const ControlAffineDynamics& dyn,
                                 const CostModel& cost, const TimeGrid& grid,
                                 const Vec& x0,
                                 const FeedbackPolicy& control_policy,
                                 const FeedbackPolicy& bias_policy, int count,
                                 const SeedSpec& seed,
                                 const RolloutRecording& recording = {});

// Left Riemann sum of the running cost along one recorded path.
// `states` is (steps+1) x n, `controls` is steps x l.
double path_cost(const Mat& states, const Mat& controls, const CostModel& cost,
                 const TimeGrid& grid);

// A single realized path driven by step-indexed policies. Unlike
// FeedbackPolicy these may keep state between calls (receding-horizon
// controllers hold their last decision). The path draws dw from counter
// (seed, stream 0, step k).
using StepPolicy =
    std::function<void(int step, double t, const ConstVecRef& x, VecRef out)>;

struct PathRecord {
  TimeGrid grid;
  Mat states;    // (steps+1) x n
  Mat controls;  // steps x l
  Mat biases;    // steps x m
  double cost = 0.0;
};

PathRecord simulate_path(const ControlAffineDynamics& dyn,
                         const CostModel& cost, const TimeGrid& grid,
                         const Vec& x0, const StepPolicy& control,
                         const StepPolicy& bias, const SeedSpec& seed);

// Columnar little-endian dump: "SPE1", n, m, l, N, K (u64), dt (f64), then
// t0, measure, states flag, recorded steps, and the arrays.
void write_ensemble(std::ostream& out, const TrajectoryEnsemble& ensemble);
TrajectoryEnsemble read_ensemble(std::istream& in);

}  // namespace stealthpath

#endif  // STEALTHPATH_SDE_ENGINE_H_
