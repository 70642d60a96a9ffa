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

#ifndef STEALTHPATH_STEALTH_METRICS_H_
#define STEALTHPATH_STEALTH_METRICS_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stealthpath/kl_attack.h"
#include "stealthpath/random.h"

namespace stealthpath {

// Lower bounds on the summed error rates of any detector given the KL
// divergence between the nominal and attacked laws.
double pinsker_bound(double kl);  // 1 - sqrt(kl / 2), may be negative
double bh_bound(double kl);       // exp(-kl) / 2

struct IncompleteGamma {
  double lower = 0.0;  // P(a, x)
  double upper = 1.0;  // Q(a, x)
};

// Regularized incomplete gamma functions at (x, a).
IncompleteGamma regularized_gamma(double x, double a);

// Chi-square variance test on K increments over a unit horizon. H0 has unit
// diffusion, H1 has diffusion sigma.
struct DetectorSpec {
  int samples = 100;
  double sigma = 1.1;
  double step = 0.01;

  static DetectorSpec unit_horizon(int samples, double sigma);
  void validate() const;
};

struct DetectionPoint {
  double tau = 0.0;
  double alpha = 0.0;  // false alarm rate
  double beta = 0.0;   // missed detection rate
};

// Rejection threshold on sum (y_k / sqrt(step))^2. For sigma > 1 the test
// declares H1 at or above it, for sigma < 1 at or below it.
double np_threshold(const DetectorSpec& spec, double tau);

double np_alpha(const DetectorSpec& spec, double tau);
double np_beta(const DetectorSpec& spec, double tau);

std::vector<DetectionPoint> tradeoff_curve(const DetectorSpec& spec,
                                           std::span<const double> taus);

// n log-spaced thresholds on [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int n);

// Beta of `curve` at false alarm rate `alpha`, by linear interpolation along
// the curve. Points must come from a monotone curve.
double beta_at_alpha(const std::vector<DetectionPoint>& curve, double alpha);

// True when, at every alpha of `candidate`, the reference curve has a beta no
// smaller than the candidate's (within `slack`).
bool dominates(const std::vector<DetectionPoint>& candidate,
               const std::vector<DetectionPoint>& reference,
               double slack = 0.0);

bool declares_attack(const DetectorSpec& spec, double tau, double statistic);

// Normalized chi-square statistic of one path of increments.
double np_statistic(const DetectorSpec& spec, std::span<const double> path);

struct EmpiricalRates {
  std::vector<DetectionPoint> points;  // one per tau
  std::int64_t trials = 0;
};

// Streams `trials` simulated paths under each hypothesis and counts test
// outcomes for every tau. Trial i under hypothesis j uses counter stream
// (i, j) of `seed`, so results do not depend on the thread count.
EmpiricalRates empirical_np_test(const DetectorSpec& spec,
                                 std::span<const double> taus,
                                 std::int64_t trials, const SeedSpec& seed);

// Half-width of a two-sided binomial normal-approximation interval.
double binomial_half_width(double p, std::int64_t trials, double z = 2.576);

struct StealthReport {
  double kl = 0.0;
  double pinsker = 1.0;
  double bretagnolle_huber = 0.5;
  // max(pinsker, bh, 0): no detector achieves alpha + beta below this.
  double error_floor = 0.5;
};

StealthReport kl_bound_report(double kl);
StealthReport kl_bound_report(const AttackRecord& record);
void write_stealth_report(std::ostream& out, const StealthReport& report);

void write_curve_csv(std::ostream& out,
                     const std::vector<DetectionPoint>& curve);

}  // namespace stealthpath

#endif  // STEALTHPATH_STEALTH_METRICS_H_
