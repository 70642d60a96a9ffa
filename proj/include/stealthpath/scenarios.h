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

#ifndef STEALTHPATH_SCENARIOS_H_
#define STEALTHPATH_SCENARIOS_H_

#include <optional>
#include <string>
#include <vector>

#include "stealthpath/minimax_mitigation.h"
#include "stealthpath/sde_engine.h"

namespace stealthpath {

struct Box {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

// Proportional law driving a unicycle toward the goal: acceleration tracks
// a distance-scheduled speed, turn rate tracks the bearing to the goal.
struct UnicycleNominalGains {
  double cruise_speed = 1.0;
  double speed_per_distance = 1.0;
  double speed_gain = 2.0;
  double heading_gain = 0.15;
  // Below this distance the heading correction fades out.
  double heading_fade_radius = 0.2;
};

// State (px, py, s, phi); inputs (acceleration, turn rate).
struct UnicycleScenario {
  double goal_x = 4.0;
  double goal_y = -1.0;
  Box unsafe{2.5, 4.0, 0.5, 1.5};
  double b = 0.1;
  double eta = 0.1;
  double sigma = 0.1;
  double nu = 0.1;
  double horizon = 5.0;
  double dt = 0.01;
  std::vector<double> x0{0.0, 0.0, 1.0, 0.0};
  UnicycleNominalGains nominal;
};

// Lateral pole placement plus speed regulation toward the finish line:
// steering rate = -(k_y y + k_heading delta + k_wheel phi).
struct CruiseNominalGains {
  double cruise_speed = 0.5;
  double speed_per_distance = 0.5;
  double speed_gain = 1.0;
  double k_y = 1.2;
  double k_heading = 1.1;
  double k_wheel = 6.0;
};

// State (px, py, s, delta, phi); inputs (acceleration, wheel rate).
struct CruiseScenario {
  double wheelbase = 0.05;
  double road_center_y = 0.0;
  double road_half_width = 0.5;
  double finish_x = 4.0;
  double b = 0.02;
  double control_weight = 4.0;
  double eta = 0.02;
  double sigma = 0.07071067811865475;  // sqrt(0.005)
  double nu = 0.07071067811865475;
  double horizon = 10.0;
  double dt = 0.02;
  std::vector<double> x0{0.0, 0.0, 0.5, 0.0, 0.0};
  CruiseNominalGains nominal;
  // |phi| at or beyond pi/2 - wheel_guard makes the drift non-finite.
  double wheel_guard = 1e-3;
};

ControlAffineDynamics unicycle_dynamics(const UnicycleScenario& scn);
CostModel unicycle_cost(const UnicycleScenario& scn);
FeedbackPolicy unicycle_nominal_controller(const UnicycleScenario& scn);
bool unicycle_unsafe(const UnicycleScenario& scn, const ConstVecRef& x);
TimeGrid unicycle_grid(const UnicycleScenario& scn);

ControlAffineDynamics cruise_dynamics(const CruiseScenario& scn);
CostModel cruise_cost(const CruiseScenario& scn);
FeedbackPolicy cruise_nominal_controller(const CruiseScenario& scn);
bool cruise_unsafe(const CruiseScenario& scn, const ConstVecRef& x);
TimeGrid cruise_grid(const CruiseScenario& scn);

// Points covering the operating region, for gain certification.
std::vector<SamplePoint> unicycle_sample_points(const UnicycleScenario& scn);
std::vector<SamplePoint> cruise_sample_points(const CruiseScenario& scn);

struct CrashReport {
  int total = 0;
  int crashed = 0;
  double p_crash = 0.0;
  // First unsafe grid step per run, empty when the run stayed safe.
  std::vector<std::optional<int>> crash_step;
};

using UnsafePredicate = std::function<bool(const ConstVecRef& x)>;

// First grid index whose state is unsafe.
std::optional<int> first_unsafe_step(const Mat& states,
                                     const UnsafePredicate& unsafe);
std::vector<bool> unsafe_flags(const Mat& states,
                               const UnsafePredicate& unsafe);

CrashReport crash_probability(const std::vector<const Mat*>& runs,
                              const UnsafePredicate& unsafe);

// One-dimensional problems with closed-form answers: dx = g u dt +
// h (theta dt + dw), state cost slope * x + offset on [0, horizon].
struct AnalyticProblem {
  std::string name;
  double slope = 0.0;
  double offset = 0.0;
  double g = 0.0;
  double h = 1.0;
  double r = 1.0;
  double lambda = 1.0;
  double horizon = 1.0;
  double x = 0.0;
  double t = 0.0;

  ControlAffineDynamics dynamics() const;
  CostModel cost() const;
  // Attack value and bias under the Brownian measure.
  double attack_value() const;
  double attack_bias() const;
  // Game temperature h^2 / (g^2 / r - h^2 / lambda), then value and policies.
  double game_temperature() const;
  double game_value() const;
  double game_control() const;
  double game_bias() const;
};

std::vector<AnalyticProblem> analytic_1d_suite();

}  // namespace stealthpath

#endif  // STEALTHPATH_SCENARIOS_H_
