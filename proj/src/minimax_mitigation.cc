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

#include "stealthpath/minimax_mitigation.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "stealthpath/error.h"
#include "weighted_increment.h"

namespace stealthpath {
namespace {

struct GainMatrices {
  Mat noise;    // h h^T
  Mat control;  // g R^{-1} g^T
};

GainMatrices gain_matrices(const ControlAffineDynamics& dyn,
                           const CostModel& cost, double t, const Vec& x) {
  const Mat g = dyn.control_gain(t, x);
  const Mat h = dyn.noise_gain(t, x);
  const Mat r = cost.control_weight(t, x);
  const Eigen::LLT<Mat> llt(r);
  if (llt.info() != Eigen::Success) {
    throw AssumptionViolated("control weight R is not positive definite");
  }
  return {h * h.transpose(), g * llt.solve(g.transpose())};
}

std::string describe(const SamplePoint& p) {
  std::ostringstream s;
  s << "t=" << p.t << ", x=(";
  for (Eigen::Index i = 0; i < p.x.size(); ++i) {
    s << (i ? ", " : "") << p.x(i);
  }
  s << ")";
  return s.str();
}

// Least-squares scalar c in lhs_k = c * rhs_k and its max-norm residual.
template <typename RhsFn>
GainFit fit_scalar(const ControlAffineDynamics& dyn, const CostModel& cost,
                   const std::vector<SamplePoint>& samples, RhsFn rhs_of) {
  if (samples.empty()) {
    throw InvalidArgument("gain fit needs at least one sample point");
  }
  std::vector<Mat> lhs, rhs;
  double numerator = 0.0, denominator = 0.0, scale = 0.0;
  for (const auto& p : samples) {
    if (p.x.size() != dyn.state_dim()) {
      throw InvalidArgument("sample point has the wrong state dimension");
    }
    const GainMatrices gm = gain_matrices(dyn, cost, p.t, p.x);
    lhs.push_back(gm.noise);
    rhs.push_back(rhs_of(gm));
    numerator += (lhs.back().array() * rhs.back().array()).sum();
    denominator += rhs.back().squaredNorm();
    scale = std::max(scale, spectral_norm(gm.noise));
  }
  GainFit fit;
  fit.tolerance = 1e-8 * scale;
  fit.value = denominator > 0.0 ? numerator / denominator : 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double r = (lhs[k] - fit.value * rhs[k]).cwiseAbs().maxCoeff();
    if (r > fit.residual || k == 0) {
      fit.residual = r;
      fit.worst_sample = static_cast<int>(k);
    }
  }
  return fit;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("lambda must be positive and finite");
  }
}

GainFit fit_xi(const ControlAffineDynamics& dyn, const CostModel& cost,
               const std::vector<SamplePoint>& samples) {
  return fit_scalar(dyn, cost, samples,
                    [](const GainMatrices& gm) { return gm.control; });
}

GainFit fit_alpha(const ControlAffineDynamics& dyn, const CostModel& cost,
                  const std::vector<SamplePoint>& samples, double lambda) {
  return fit_scalar(dyn, cost, samples, [lambda](const GainMatrices& gm) {
    return Mat(gm.control - gm.noise / lambda);
  });
}

std::string misfit_message(const char* name, const GainFit& fit,
                           const std::vector<SamplePoint>& samples) {
  std::ostringstream s;
  s << "no scalar " << name << " fits the gain identity: residual "
    << fit.residual << " > tolerance " << fit.tolerance
    << " (worst sample " << fit.worst_sample << ": "
    << describe(samples[fit.worst_sample]) << ")";
  return s.str();
}

}  // namespace

GainFit solve_xi(const ControlAffineDynamics& dyn, const CostModel& cost,
                 const std::vector<SamplePoint>& samples, double lambda) {
  check_lambda(lambda);
  const GainFit fit = fit_xi(dyn, cost, samples);
  if (fit.residual > fit.tolerance) {
    throw AssumptionViolated(misfit_message("xi", fit, samples));
  }
  if (!(fit.value > 0.0 && fit.value < lambda)) {
    std::ostringstream s;
    s << "xi = " << fit.value << " is outside (0, lambda = " << lambda << ")";
    throw AssumptionViolated(s.str());
  }
  return fit;
}

double gamma_from_xi(double xi, double lambda) {
  check_lambda(lambda);
  if (!(xi > 0.0 && xi < lambda)) {
    throw InvalidArgument("gamma_from_xi: need 0 < xi < lambda");
  }
  return xi * lambda / (lambda - xi);
}

GainFit solve_alpha(const ControlAffineDynamics& dyn, const CostModel& cost,
                    const std::vector<SamplePoint>& samples, double lambda) {
  check_lambda(lambda);
  const GainFit fit = fit_alpha(dyn, cost, samples, lambda);
  if (fit.residual > fit.tolerance) {
    throw AssumptionViolated(misfit_message("alpha", fit, samples));
  }
  if (!(fit.value > 0.0)) {
    std::ostringstream s;
    s << "alpha = " << fit.value
      << " is not positive (g R^-1 g^T - h h^T / lambda is not positive "
         "on the noise range)";
    throw AssumptionViolated(s.str());
  }
  return fit;
}

GainCertificate certify(const ControlAffineDynamics& dyn, const CostModel& cost,
                        const std::vector<SamplePoint>& samples,
                        double lambda) {
  GainCertificate cert;
  cert.lambda = lambda;
  std::vector<std::string> problems;
  try {
    check_lambda(lambda);
    const GainFit xi = fit_xi(dyn, cost, samples);
    const GainFit alpha = fit_alpha(dyn, cost, samples, lambda);
    cert.xi = xi.value;
    cert.alpha = alpha.value;
    cert.residual_xi = xi.residual;
    cert.residual_alpha = alpha.residual;
    cert.tolerance = xi.tolerance;
    if (xi.residual > xi.tolerance) {
      problems.push_back(misfit_message("xi", xi, samples));
    }
    if (alpha.residual > alpha.tolerance) {
      problems.push_back(misfit_message("alpha", alpha, samples));
    }
    if (xi.value > 0.0 && xi.value < lambda) {
      cert.gamma = gamma_from_xi(xi.value, lambda);
    } else {
      std::ostringstream s;
      s << "xi = " << xi.value << " is outside (0, lambda = " << lambda << ")";
      problems.push_back(s.str());
    }
    if (!(alpha.value > 0.0)) {
      std::ostringstream s;
      s << "alpha = " << alpha.value << " is not positive";
      problems.push_back(s.str());
    }
    if (problems.empty() &&
        std::abs(cert.alpha - cert.gamma) >
            1e-9 * std::max(1.0, cert.gamma)) {
      std::ostringstream s;
      s << std::setprecision(17) << "alpha = " << cert.alpha
        << " differs from gamma = " << cert.gamma;
      problems.push_back(s.str());
    }
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  cert.valid = problems.empty();
  for (std::size_t i = 0; i < problems.size(); ++i) {
    cert.diagnostic += (i ? "; " : "") + problems[i];
  }
  return cert;
}

void write_certificate(std::ostream& out, const GainCertificate& cert) {
  const auto old = out.precision(17);
  out << "lambda=" << cert.lambda << '\n'
      << "xi=" << cert.xi << '\n'
      << "gamma=" << cert.gamma << '\n'
      << "alpha=" << cert.alpha << '\n'
      << "residual_xi=" << cert.residual_xi << '\n'
      << "residual_alpha=" << cert.residual_alpha << '\n'
      << "tolerance=" << cert.tolerance << '\n'
      << "alpha_minus_gamma=" << cert.alpha - cert.gamma << '\n'
      << "valid=" << (cert.valid ? "true" : "false") << '\n';
  if (!cert.diagnostic.empty()) out << "diagnostic=" << cert.diagnostic << '\n';
  out.precision(old);
}

ValueEstimate estimate_game_value(const TrajectoryEnsemble& ensemble,
                                  double alpha) {
  if (ensemble.measure != SamplingMeasure::kUncontrolled) {
    throw InvalidArgument(std::string("game value: expected a ") +
                          to_string(SamplingMeasure::kUncontrolled) +
                          " ensemble, got " + to_string(ensemble.measure));
  }
  if (ensemble.count < 2) {
    throw InvalidArgument("game value: need at least 2 rollouts");
  }
  if (!(alpha > 0.0)) {
    throw InvalidArgument("game value: temperature must be positive");
  }
  const auto w = exponential_weights(ensemble.path_costs, alpha, -1.0);
  ValueEstimate out;
  out.value = -alpha * w.log_mean;
  out.effective_sample_size = w.effective_sample_size;
  out.degenerate = w.effective_sample_size < 2.0;
  return out;
}

ValueEstimate estimate_risk_sensitive_value(const TrajectoryEnsemble& ensemble,
                                            double gamma) {
  return estimate_game_value(ensemble, gamma);
}

SaddlePointEstimate estimate_saddle_point(
    const TrajectoryEnsemble& ensemble, const GainCertificate& certificate,
    const ControlAffineDynamics& dyn, const CostModel& cost, const Vec& x,
    double t, const BiasEstimatorOptions& options) {
  if (!certificate.valid) {
    throw AssumptionViolated("saddle point needs a valid gain certificate: " +
                             certificate.diagnostic);
  }
  const ValueEstimate value = estimate_game_value(ensemble, certificate.alpha);
  const auto w = exponential_weights(ensemble.path_costs, certificate.alpha,
                                     -1.0);
  const Vec noise_mean =
      internal::weighted_increment(ensemble, w.normalized, options);

  const GainMatrices gm = gain_matrices(dyn, cost, t, x);
  const Mat g = dyn.control_gain(t, x);
  const Mat h = dyn.noise_gain(t, x);
  const Mat r = cost.control_weight(t, x);
  const Mat bracket = gm.control - gm.noise / certificate.lambda;
  const PseudoInverse pinv = pseudo_inverse(bracket, 1e-10);
  const Vec shared = pinv.matrix * (h * noise_mean);

  SaddlePointEstimate out;
  out.u_star = r.llt().solve(g.transpose() * shared);
  out.theta_star = -(1.0 / certificate.lambda) * (h.transpose() * shared);
  out.value = value.value;
  out.effective_sample_size = value.effective_sample_size;
  out.degenerate = value.degenerate;
  out.bracket_rank = pinv.rank;
  if (!out.u_star.allFinite() || !out.theta_star.allFinite()) {
    throw NumericalFailure("saddle point estimate is not finite");
  }
  return out;
}

const char* to_string(GameMode mode) {
  switch (mode) {
    case GameMode::kBothPlay:
      return "both_play";
    case GameMode::kControllerOnly:
      return "controller_only";
    case GameMode::kAttackerOnly:
      return "attacker_only";
  }
  return "unknown";
}

GameRecord run_closed_loop_game(const ControlAffineDynamics& dyn,
                                const CostModel& cost, const TimeGrid& grid,
                                const Vec& x0,
                                const GainCertificate& certificate,
                                const GameConfig& config, const SeedSpec& seed,
                                GameMode mode,
                                const FeedbackPolicy* fallback_control) {
  if (!certificate.valid) {
    throw AssumptionViolated("closed-loop game needs a valid certificate: " +
                             certificate.diagnostic);
  }
  if (config.rollouts_per_decision < 2) {
    throw InvalidArgument("closed-loop game: need at least 2 rollouts");
  }
  if (config.replan_every < 1) {
    throw InvalidArgument("closed-loop game: replan_every must be >= 1");
  }
  const bool controller_plays = mode != GameMode::kAttackerOnly;
  const bool attacker_plays = mode != GameMode::kControllerOnly;

  GameRecord record;
  record.mode = mode;
  Vec held_u = Vec::Zero(dyn.control_dim());
  Vec held_theta = Vec::Zero(dyn.noise_dim());
  const FeedbackPolicy none_u = FeedbackPolicy::zero(dyn.control_dim());
  const FeedbackPolicy none_theta = FeedbackPolicy::zero(dyn.noise_dim());

  auto decide = [&](int k, double t, const ConstVecRef& x) {
    const TimeGrid remaining = grid.tail(k);
    BiasEstimatorOptions options = config.estimator;
    options.window_steps = std::min(options.window_steps, remaining.steps);
    const Vec state = x;
    try {
      const auto ensemble = rollout_batch(
          dyn, cost, remaining, state, none_u, none_theta,
          config.rollouts_per_decision,
          SeedSpec{derive_seed(seed.master_seed, 1, k)},
          RolloutRecording::summary(options.window_steps));
      const auto est = estimate_saddle_point(ensemble, certificate, dyn, cost,
                                             state, t, options);
      held_u = est.u_star;
      held_theta = est.theta_star;
      record.decision_ess.push_back(est.effective_sample_size);
      if (est.degenerate) ++record.degenerate_decisions;
    } catch (const IntegrationDiverged& e) {
      throw IntegrationDiverged(
          "game decision ensemble failed: " + std::string(e.what()),
          std::nullopt, k);
    }
  };

  auto control = [&](int k, double t, const ConstVecRef& x, VecRef out) {
    if (k % config.replan_every == 0) decide(k, t, x);
    if (controller_plays) {
      out = held_u;
    } else if (fallback_control != nullptr) {
      (*fallback_control)(t, x, out);
    } else {
      out.setZero();
    }
  };
  auto attacker = [&](int, double, const ConstVecRef&, VecRef out) {
    if (attacker_plays) {
      out = held_theta;
    } else {
      out.setZero();
    }
  };

  record.path = simulate_path(dyn, cost, grid, x0, control, attacker,
                              SeedSpec{derive_seed(seed.master_seed, 0)});
  return record;
}

void write_game_csv(std::ostream& out, const GameRecord& record,
                    const CostModel& cost,
                    const std::vector<bool>& unsafe_at_step) {
  const PathRecord& path = record.path;
  const int steps = path.grid.steps;
  const int n = static_cast<int>(path.states.cols());
  const int l = static_cast<int>(path.controls.cols());
  const int m = static_cast<int>(path.biases.cols());
  if (static_cast<int>(unsafe_at_step.size()) != steps + 1) {
    throw InvalidArgument("write_game_csv: unsafe flags must cover the grid");
  }
  out << "step,t";
  for (int j = 0; j < n; ++j) out << ",x" << j;
  for (int j = 0; j < l; ++j) out << ",u" << j;
  for (int j = 0; j < m; ++j) out << ",theta" << j;
  out << ",cumulative_cost,crashed\n";
  const auto old = out.precision(17);
  Mat scratch(l, l);
  double cumulative = 0.0;
  bool crashed = false;
  for (int k = 0; k <= steps; ++k) {
    crashed = crashed || unsafe_at_step[k];
    out << k << ',' << path.grid.time(k);
    for (int j = 0; j < n; ++j) out << ',' << path.states(k, j);
    for (int j = 0; j < l; ++j) {
      out << ',' << (k < steps ? path.controls(k, j) : 0.0);
    }
    for (int j = 0; j < m; ++j) {
      out << ',' << (k < steps ? path.biases(k, j) : 0.0);
    }
    out << ',' << cumulative << ',' << (crashed ? 1 : 0) << '\n';
    if (k < steps) {
      const Vec x = path.states.row(k).transpose();
      const Vec u = path.controls.row(k).transpose();
      cumulative += path.grid.dt *
                    cost.running_cost(path.grid.time(k), x, u, scratch);
    }
  }
  out.precision(old);
}

}  // namespace stealthpath
