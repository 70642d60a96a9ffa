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

#include <algorithm>
#include <cmath>

#include "stealthpath/error.h"

namespace stealthpath {
namespace {

// Thomas algorithm; sub, diag, sup and rhs are overwritten.
void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag,
                       std::vector<double>& sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
  }
}

}  // namespace

ControlAffineDynamics FeynmanKacProblem::dynamics() const {
  const auto f = drift;
  const double h = noise;
  return ControlAffineDynamics(
      1, 1, 1, [f](double, const ConstVecRef& x, VecRef out) { out(0) = f(x(0)); },
      [](double, const ConstVecRef&, MatRef out) { out(0, 0) = 0.0; },
      [h](double, const ConstVecRef&, MatRef out) { out(0, 0) = h; }, true);
}

CostModel FeynmanKacProblem::cost() const {
  const auto c = state_cost;
  return CostModel([c](double, const ConstVecRef& x) { return c(x(0)); },
                   Mat::Identity(1, 1), horizon);
}

double PdeSolution::value_at(double xq) const {
  if (xq < x.front() || xq > x.back()) {
    throw InvalidArgument("PdeSolution: query outside the grid");
  }
  const double dx = x[1] - x[0];
  const auto i = std::min<std::size_t>(
      static_cast<std::size_t>((xq - x.front()) / dx), x.size() - 2);
  const double w = (xq - x[i]) / dx;
  const double p = (1.0 - w) * psi[i] + w * psi[i + 1];
  return sign * temperature * std::log(p);
}

PdeSolution solve_feynman_kac(const FeynmanKacProblem& problem,
                              const PdeGrid& grid) {
  if (grid.cells < 4 || grid.time_steps < 1 || !(grid.x_max > grid.x_min)) {
    throw InvalidArgument("solve_feynman_kac: bad grid");
  }
  if (!(problem.temperature > 0.0) || !(problem.horizon > 0.0)) {
    throw InvalidArgument("solve_feynman_kac: temperature and horizon must "
                          "be positive");
  }
  const int n = grid.cells + 1;
  const double dx = (grid.x_max - grid.x_min) / grid.cells;
  const double dt = problem.horizon / grid.time_steps;
  const double half_var = 0.5 * problem.noise * problem.noise;

  PdeSolution sol;
  sol.temperature = problem.temperature;
  sol.sign = problem.sign;
  sol.x.resize(n);
  // Operator row i: lo psi[i-1] + mid psi[i] + hi psi[i+1].
  std::vector<double> lo(n), mid(n), hi(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid.x_min + i * dx;
    sol.x[i] = x;
    const double f = problem.drift(x);
    const double diff = half_var / (dx * dx);
    const double adv = f / (2.0 * dx);
    lo[i] = diff - adv;
    hi[i] = diff + adv;
    mid[i] = -2.0 * diff +
             problem.sign * problem.state_cost(x) / problem.temperature;
  }
  // Zero flux: mirror the ghost node onto the interior neighbour.
  hi[0] += lo[0];
  lo[0] = 0.0;
  lo[n - 1] += hi[n - 1];
  hi[n - 1] = 0.0;

  std::vector<double> psi(n, 1.0), rhs(n), a(n), b(n), c(n);
  for (int step = 0; step < grid.time_steps; ++step) {
    for (int i = 0; i < n; ++i) {
      double r = (1.0 + 0.5 * dt * mid[i]) * psi[i];
      if (i > 0) r += 0.5 * dt * lo[i] * psi[i - 1];
      if (i + 1 < n) r += 0.5 * dt * hi[i] * psi[i + 1];
      rhs[i] = r;
      a[i] = -0.5 * dt * lo[i];
      b[i] = 1.0 - 0.5 * dt * mid[i];
      c[i] = -0.5 * dt * hi[i];
    }
    solve_tridiagonal(a, b, c, rhs);
    psi.swap(rhs);
  }
  for (double p : psi) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw NumericalFailure("solve_feynman_kac: solution left (0, inf)");
    }
  }
  sol.psi = std::move(psi);
  return sol;
}

FeynmanKacProblem bounded_cost_benchmark(double temperature, double sign) {
  FeynmanKacProblem p;
  p.drift = [](double x) { return -0.5 * x; };
  p.state_cost = [](double x) { return x * x / (1.0 + x * x); };
  p.noise = 1.0;
  p.temperature = temperature;
  p.sign = sign;
  p.horizon = 1.0;
  return p;
}

}  // namespace stealthpath
