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

#ifndef STEALTHPATH_FEYNMAN_KAC_H_
#define STEALTHPATH_FEYNMAN_KAC_H_

#include <functional>
#include <vector>

#include "stealthpath/sde_engine.h"

namespace stealthpath {

// Scalar diffusion dx = drift(x) dt + noise dw with running cost
// state_cost(x) on [0, horizon] and no terminal cost. The exponentiated value
// psi = exp(sign * V / temperature) solves the linear backward equation
//   psi_t + drift psi_x + noise^2 / 2 psi_xx + sign * state_cost / temperature
//   psi = 0,  psi(horizon) = 1,
// with sign = +1 for the risk-seeking (attack) value and -1 for the
// risk-averse (game) value.
struct FeynmanKacProblem {
  std::function<double(double)> drift;
  std::function<double(double)> state_cost;
  double noise = 1.0;
  double temperature = 1.0;
  double sign = 1.0;
  double horizon = 1.0;

  // Model for Monte Carlo: one state, one (unused) input, one noise channel.
  ControlAffineDynamics dynamics() const;
  CostModel cost() const;
};

struct PdeGrid {
  double x_min = -8.0;
  double x_max = 8.0;
  int cells = 1600;
  int time_steps = 1000;
};

struct PdeSolution {
  std::vector<double> x;
  std::vector<double> psi;  // at t = 0
  double temperature = 1.0;
  double sign = 1.0;

  // sign * temperature * log(psi), linearly interpolated in x.
  double value_at(double x) const;
};

// Crank-Nicolson solve with zero-flux boundaries. Throws NumericalFailure if
// psi leaves (0, inf).
PdeSolution solve_feynman_kac(const FeynmanKacProblem& problem,
                              const PdeGrid& grid = {});

// Cost x^2 / (1 + x^2), drift -x / 2, unit noise, unit horizon.
FeynmanKacProblem bounded_cost_benchmark(double temperature, double sign);

}  // namespace stealthpath

#endif  // STEALTHPATH_FEYNMAN_KAC_H_
