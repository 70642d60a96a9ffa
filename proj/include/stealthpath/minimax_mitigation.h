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

#ifndef STEALTHPATH_MINIMAX_MITIGATION_H_
#define STEALTHPATH_MINIMAX_MITIGATION_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "stealthpath/kl_attack.h"
#include "stealthpath/numeric.h"
#include "stealthpath/random.h"
#include "stealthpath/sde_engine.h"

namespace stealthpath {

// A (t, x) pair at which the gain conditions are checked.
struct SamplePoint {
  double t = 0.0;
  Vec x;
};

// Scalar least-squares fit of a matrix identity across sample points.
struct GainFit {
  double value = 0.0;
  // Max-norm misfit over all sample points.
  double residual = 0.0;
  // Sample with the largest misfit.
  int worst_sample = 0;
  // Residual tolerance, 1e-8 * max |h h^T|_2 over the samples.
  double tolerance = 0.0;
};

// Fits h h^T = xi g R^{-1} g^T. Throws AssumptionViolated when the residual
// exceeds the tolerance or xi is outside (0, lambda).
GainFit solve_xi(const ControlAffineDynamics& dyn, const CostModel& cost,
                 const std::vector<SamplePoint>& samples, double lambda);

// xi lambda / (lambda - xi); requires 0 < xi < lambda.
double gamma_from_xi(double xi, double lambda);

// Fits h h^T = alpha (g R^{-1} g^T - h h^T / lambda). Throws
// AssumptionViolated when the residual exceeds the tolerance or alpha <= 0.
GainFit solve_alpha(const ControlAffineDynamics& dyn, const CostModel& cost,
                    const std::vector<SamplePoint>& samples, double lambda);

struct GainCertificate {
  double lambda = 0.0;
  double xi = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double residual_xi = 0.0;
  double residual_alpha = 0.0;
  double tolerance = 0.0;
  bool valid = false;
  // Human-readable reason when invalid.
  std::string diagnostic;
};

// Never throws on assumption failures; they are encoded in the result.
GainCertificate certify(const ControlAffineDynamics& dyn, const CostModel& cost,
                        const std::vector<SamplePoint>& samples,
                        double lambda);

// key=value lines.
void write_certificate(std::ostream& out, const GainCertificate& cert);

// -alpha log((1/N) sum exp(-S_i / alpha)) over an uncontrolled ensemble.
ValueEstimate estimate_game_value(const TrajectoryEnsemble& ensemble,
                                  double alpha);
// The risk-sensitive value at temperature gamma. Identical computation.
ValueEstimate estimate_risk_sensitive_value(const TrajectoryEnsemble& ensemble,
                                            double gamma);

struct SaddlePointEstimate {
  Vec u_star;
  Vec theta_star;
  double value = 0.0;
  double effective_sample_size = 0.0;
  bool degenerate = false;
  // Rank of g R^{-1} g^T - h h^T / lambda under the pseudo-inverse tolerance.
  int bracket_rank = 0;
};

// Controller and attacker policies at (t, x), both linear images of one
// weighted noise increment.
SaddlePointEstimate estimate_saddle_point(
    const TrajectoryEnsemble& ensemble, const GainCertificate& certificate,
    const ControlAffineDynamics& dyn, const CostModel& cost, const Vec& x,
    double t, const BiasEstimatorOptions& options = {});

enum class GameMode { kBothPlay, kControllerOnly, kAttackerOnly };

const char* to_string(GameMode mode);

struct GameConfig {
  int rollouts_per_decision = 2000;
  int replan_every = 1;
  BiasEstimatorOptions estimator{1, true};
};

struct GameRecord {
  PathRecord path;
  GameMode mode = GameMode::kBothPlay;
  std::vector<double> decision_ess;
  int degenerate_decisions = 0;
};

// Receding-horizon closed loop. Each decision draws a fresh uncontrolled
// ensemble over the remaining horizon and holds (u*, theta*) until the next
// decision. A player that does not play applies zero, except that a
// non-null `fallback_control` replaces the idle controller.
GameRecord run_closed_loop_game(const ControlAffineDynamics& dyn,
                                const CostModel& cost, const TimeGrid& grid,
                                const Vec& x0,
                                const GainCertificate& certificate,
                                const GameConfig& config, const SeedSpec& seed,
                                GameMode mode,
                                const FeedbackPolicy* fallback_control =
                                    nullptr);

// Columns: step, t, x0.., u0.., theta0.., cumulative_cost, crashed. The
// terminal row carries the final state with zero inputs. `crashed` marks
// rows at or after the first unsafe grid point.
void write_game_csv(std::ostream& out, const GameRecord& record,
                    const CostModel& cost,
                    const std::vector<bool>& unsafe_at_step);

}  // namespace stealthpath

#endif  // STEALTHPATH_MINIMAX_MITIGATION_H_
