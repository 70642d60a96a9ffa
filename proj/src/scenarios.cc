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

#include "stealthpath/scenarios.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stealthpath/error.h"

namespace stealthpath {
namespace {

double wrap_angle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

// Selector placing the two inputs on the given state rows.
void write_selector(MatRef out, int row_a, int row_b, double scale_a,
                    double scale_b) {
  out.setZero();
  out(row_a, 0) = scale_a;
  out(row_b, 1) = scale_b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Unicycle

ControlAffineDynamics unicycle_dynamics(const UnicycleScenario& scn) {
  const double sigma = scn.sigma, nu = scn.nu;
  return ControlAffineDynamics(
      4, 2, 2,
      [](double, const ConstVecRef& x, VecRef out) {
        out(0) = x(2) * std::cos(x(3));
        out(1) = x(2) * std::sin(x(3));
        out(2) = 0.0;
        out(3) = 0.0;
      },
      [](double, const ConstVecRef&, MatRef out) {
        write_selector(out, 2, 3, 1.0, 1.0);
      },
      [sigma, nu](double, const ConstVecRef&, MatRef out) {
        write_selector(out, 2, 3, sigma, nu);
      },
      true);
}

CostModel unicycle_cost(const UnicycleScenario& scn) {
  const double gx = scn.goal_x, gy = scn.goal_y, b = scn.b, eta = scn.eta;
  const Box box = scn.unsafe;
  return CostModel(
      [=](double, const ConstVecRef& x) {
        const double dx = gx - x(0), dy = gy - x(1);
        return b * (dx * dx + dy * dy) + (box.contains(x(0), x(1)) ? eta : 0.0);
      },
      Mat::Identity(2, 2), scn.horizon);
}

FeedbackPolicy unicycle_nominal_controller(const UnicycleScenario& scn) {
  const double gx = scn.goal_x, gy = scn.goal_y;
  const UnicycleNominalGains k = scn.nominal;
  return FeedbackPolicy(2, [=](double, const ConstVecRef& x, VecRef out) {
    const double dx = gx - x(0), dy = gy - x(1);
    const double dist = std::hypot(dx, dy);
    const double target_speed =
        std::min(k.cruise_speed, k.speed_per_distance * dist);
    out(0) = k.speed_gain * (target_speed - x(2));
    const double fade = std::min(1.0, dist / k.heading_fade_radius);
    out(1) = k.heading_gain * wrap_angle(std::atan2(dy, dx) - x(3)) * fade;
  });
}

bool unicycle_unsafe(const UnicycleScenario& scn, const ConstVecRef& x) {
  return scn.unsafe.contains(x(0), x(1));
}

TimeGrid unicycle_grid(const UnicycleScenario& scn) {
  return TimeGrid::covering(0.0, scn.horizon, scn.dt);
}

std::vector<SamplePoint> unicycle_sample_points(const UnicycleScenario& scn) {
  std::vector<SamplePoint> out;
  for (double px : {-1.0, 2.0, 5.0}) {
    for (double s : {0.0, 1.0}) {
      for (double phi : {-2.0, 0.0, 2.0}) {
        Vec x(4);
        x << px, scn.goal_y + px, s, phi;
        out.push_back({0.5 * scn.horizon, x});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cruise

ControlAffineDynamics cruise_dynamics(const CruiseScenario& scn) {
  const double wheelbase = scn.wheelbase;
  const double limit = 0.5 * std::numbers::pi - scn.wheel_guard;
  const double sigma = scn.sigma, nu = scn.nu;
  return ControlAffineDynamics(
      5, 2, 2,
      [=](double, const ConstVecRef& x, VecRef out) {
        out(0) = x(2) * std::cos(x(3));
        out(1) = x(2) * std::sin(x(3));
        out(2) = 0.0;
        out(3) = std::abs(x(4)) >= limit
                     ? std::numeric_limits<double>::quiet_NaN()
                     : x(2) * std::tan(x(4)) / wheelbase;
        out(4) = 0.0;
      },
      [](double, const ConstVecRef&, MatRef out) {
        write_selector(out, 2, 4, 1.0, 1.0);
      },
      [sigma, nu](double, const ConstVecRef&, MatRef out) {
        write_selector(out, 2, 4, sigma, nu);
      },
      true);
}

CostModel cruise_cost(const CruiseScenario& scn) {
  const double fx = scn.finish_x, cy = scn.road_center_y, b = scn.b;
  const double eta = scn.eta, half = scn.road_half_width;
  return CostModel(
      [=](double, const ConstVecRef& x) {
        const double dx = fx - x(0), dy = cy - x(1);
        return b * (dx * dx + dy * dy) + (std::abs(dy) > half ? eta : 0.0);
      },
      scn.control_weight * Mat::Identity(2, 2), scn.horizon);
}

FeedbackPolicy cruise_nominal_controller(const CruiseScenario& scn) {
  const double fx = scn.finish_x, cy = scn.road_center_y;
  const CruiseNominalGains k = scn.nominal;
  return FeedbackPolicy(2, [=](double, const ConstVecRef& x, VecRef out) {
    const double remaining = std::max(0.0, fx - x(0));
    const double target_speed =
        std::min(k.cruise_speed, k.speed_per_distance * remaining);
    out(0) = k.speed_gain * (target_speed - x(2));
    out(1) = -(k.k_y * (x(1) - cy) + k.k_heading * x(3) + k.k_wheel * x(4));
  });
}

bool cruise_unsafe(const CruiseScenario& scn, const ConstVecRef& x) {
  return std::abs(x(1) - scn.road_center_y) > scn.road_half_width;
}

TimeGrid cruise_grid(const CruiseScenario& scn) {
  return TimeGrid::covering(0.0, scn.horizon, scn.dt);
}

std::vector<SamplePoint> cruise_sample_points(const CruiseScenario& scn) {
  std::vector<SamplePoint> out;
  for (double px : {0.0, 2.0, 4.0}) {
    for (double s : {0.0, 0.5}) {
      for (double phi : {-0.5, 0.0, 0.5}) {
        Vec x(5);
        x << px, scn.road_center_y + 0.1 * px, s, 0.1, phi;
        out.push_back({0.5 * scn.horizon, x});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Crash statistics

std::optional<int> first_unsafe_step(const Mat& states,
                                     const UnsafePredicate& unsafe) {
  for (Eigen::Index k = 0; k < states.rows(); ++k) {
    const Vec x = states.row(k).transpose();
    if (unsafe(x)) return static_cast<int>(k);
  }
  return std::nullopt;
}

std::vector<bool> unsafe_flags(const Mat& states,
                               const UnsafePredicate& unsafe) {
  std::vector<bool> out(states.rows());
  for (Eigen::Index k = 0; k < states.rows(); ++k) {
    const Vec x = states.row(k).transpose();
    out[k] = unsafe(x);
  }
  return out;
}

CrashReport crash_probability(const std::vector<const Mat*>& runs,
                              const UnsafePredicate& unsafe) {
  if (runs.empty()) throw InvalidArgument("crash_probability: no runs");
  CrashReport report;
  report.total = static_cast<int>(runs.size());
  for (const Mat* states : runs) {
    report.crash_step.push_back(first_unsafe_step(*states, unsafe));
    if (report.crash_step.back()) ++report.crashed;
  }
  report.p_crash = static_cast<double>(report.crashed) / report.total;
  return report;
}

// ---------------------------------------------------------------------------
// Analytic problems

ControlAffineDynamics AnalyticProblem::dynamics() const {
  const double gg = g, hh = h;
  return ControlAffineDynamics(
      1, 1, 1, [](double, const ConstVecRef&, VecRef out) { out.setZero(); },
      [gg](double, const ConstVecRef&, MatRef out) { out(0, 0) = gg; },
      [hh](double, const ConstVecRef&, MatRef out) { out(0, 0) = hh; }, true);
}

CostModel AnalyticProblem::cost() const {
  const double a = slope, c = offset;
  return CostModel([a, c](double, const ConstVecRef& x) { return a * x(0) + c; },
                   Mat::Constant(1, 1, r), horizon);
}

// With tau = horizon - t the path cost under zero inputs is
// (a x + c) tau + a h I, I ~ N(0, tau^3 / 3).
double AnalyticProblem::attack_value() const {
  const double tau = horizon - t;
  return (slope * x + offset) * tau +
         slope * slope * h * h * tau * tau * tau / (6.0 * lambda);
}

double AnalyticProblem::attack_bias() const {
  return h * slope * (horizon - t) / lambda;
}

double AnalyticProblem::game_temperature() const {
  const double bracket = g * g / r - h * h / lambda;
  if (!(bracket > 0.0)) {
    throw AssumptionViolated("analytic game: bracket is not positive");
  }
  return h * h / bracket;
}

double AnalyticProblem::game_value() const {
  const double tau = horizon - t;
  return (slope * x + offset) * tau -
         slope * slope * h * h * tau * tau * tau / (6.0 * game_temperature());
}

double AnalyticProblem::game_control() const {
  return -g * slope * (horizon - t) / r;
}

double AnalyticProblem::game_bias() const {
  return h * slope * (horizon - t) / lambda;
}

std::vector<AnalyticProblem> analytic_1d_suite() {
  std::vector<AnalyticProblem> suite;
  AnalyticProblem constant;
  constant.name = "constant_cost";
  constant.offset = 0.8;
  constant.g = 1.0;
  constant.r = 0.5;
  constant.horizon = 1.0;
  suite.push_back(constant);

  AnalyticProblem attack;
  attack.name = "linear_cost_attack";
  attack.slope = 1.0;
  suite.push_back(attack);

  AnalyticProblem game;
  game.name = "linear_cost_game";
  game.slope = 1.0;
  game.g = 1.0;
  game.r = 0.5;
  suite.push_back(game);
  return suite;
}

}  // namespace stealthpath
