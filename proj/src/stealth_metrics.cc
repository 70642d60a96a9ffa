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

#include "stealthpath/stealth_metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>

#include "stealthpath/error.h"
#include "stealthpath/parallel.h"

namespace stealthpath {
namespace {

constexpr double kGammaEpsilon = 1e-14;
constexpr int kGammaMaxIterations = 100000;

// exp(-x + a log x - lgamma(a)), the common prefactor of both expansions.
double gamma_prefactor(double x, double a) {
  return std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double lower_by_series(double x, double a) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kGammaMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEpsilon) {
      return sum * gamma_prefactor(x, a);
    }
  }
  throw NumericalFailure("regularized_gamma: series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q.
double upper_by_fraction(double x, double a) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEpsilon;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEpsilon) {
      return h * gamma_prefactor(x, a);
    }
  }
  throw NumericalFailure("regularized_gamma: continued fraction did not "
                         "converge");
}

double clamp_unit(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double pinsker_bound(double kl) {
  if (!(kl >= 0.0)) throw InvalidArgument("pinsker_bound: kl must be >= 0");
  return 1.0 - std::sqrt(kl / 2.0);
}

double bh_bound(double kl) {
  if (!(kl >= 0.0)) throw InvalidArgument("bh_bound: kl must be >= 0");
  return 0.5 * std::exp(-kl);
}

IncompleteGamma regularized_gamma(double x, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw InvalidArgument("regularized_gamma: a must be positive and finite");
  }
  if (!(x >= 0.0)) throw InvalidArgument("regularized_gamma: x must be >= 0");
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  IncompleteGamma out;
  if (x < a + 1.0) {
    out.lower = clamp_unit(lower_by_series(x, a));
    out.upper = 1.0 - out.lower;
  } else {
    out.upper = clamp_unit(upper_by_fraction(x, a));
    out.lower = 1.0 - out.upper;
  }
  return out;
}

DetectorSpec DetectorSpec::unit_horizon(int samples, double sigma) {
  DetectorSpec spec{samples, sigma, 1.0 / samples};
  spec.validate();
  return spec;
}

void DetectorSpec::validate() const {
  if (samples < 1) throw InvalidArgument("detector: samples must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("detector: sigma must be positive");
  }
  if (sigma == 1.0) {
    throw InvalidArgument("detector: sigma = 1 makes the hypotheses equal");
  }
  if (!(step > 0.0) || std::abs(samples * step - 1.0) > 1e-12) {
    throw InvalidArgument("detector: samples * step must equal 1");
  }
}

double np_threshold(const DetectorSpec& spec, double tau) {
  spec.validate();
  if (!(tau > 0.0)) throw InvalidArgument("detector: tau must be positive");
  const double s2 = spec.sigma * spec.sigma;
  return 2.0 * s2 / (s2 - 1.0) *
         (spec.samples * std::log(spec.sigma) + std::log(tau));
}

// With c the threshold, H0 statistic ~ chi2_K and H1 statistic ~ s2 chi2_K.
// P(chi2_K <= c) = P(c / 2, K / 2).
double np_alpha(const DetectorSpec& spec, double tau) {
  const double c = np_threshold(spec, tau);
  const double a = 0.5 * spec.samples;
  if (spec.sigma > 1.0) {
    if (c < 0.0) return 1.0;
    return regularized_gamma(0.5 * c, a).upper;
  }
  if (c < 0.0) return 0.0;
  return regularized_gamma(0.5 * c, a).lower;
}

double np_beta(const DetectorSpec& spec, double tau) {
  const double c = np_threshold(spec, tau);
  const double a = 0.5 * spec.samples;
  const double scaled = 0.5 * c / (spec.sigma * spec.sigma);
  if (spec.sigma > 1.0) {
    if (c < 0.0) return 0.0;
    return regularized_gamma(scaled, a).lower;
  }
  if (c < 0.0) return 1.0;
  return regularized_gamma(scaled, a).upper;
}

std::vector<DetectionPoint> tradeoff_curve(const DetectorSpec& spec,
                                           std::span<const double> taus) {
  std::vector<DetectionPoint> curve;
  curve.reserve(taus.size());
  for (double tau : taus) {
    curve.push_back({tau, np_alpha(spec, tau), np_beta(spec, tau)});
  }
  return curve;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) {
    throw InvalidArgument("log_spaced: need 0 < lo <= hi and n >= 1");
  }
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : std::exp(a + (b - a) * i / (n - 1));
  }
  return out;
}

double beta_at_alpha(const std::vector<DetectionPoint>& curve, double alpha) {
  if (curve.empty()) throw InvalidArgument("beta_at_alpha: empty curve");
  std::vector<DetectionPoint> pts = curve;
  std::sort(pts.begin(), pts.end(),
            [](const DetectionPoint& p, const DetectionPoint& q) {
              return p.alpha < q.alpha || (p.alpha == q.alpha && p.beta > q.beta);
            });
  if (alpha <= pts.front().alpha) return pts.front().beta;
  if (alpha >= pts.back().alpha) return pts.back().beta;
  const auto hi = std::upper_bound(
      pts.begin(), pts.end(), alpha,
      [](double a, const DetectionPoint& p) { return a < p.alpha; });
  const auto lo = hi - 1;
  if (hi->alpha == lo->alpha) return std::min(lo->beta, hi->beta);
  const double w = (alpha - lo->alpha) / (hi->alpha - lo->alpha);
  return lo->beta + w * (hi->beta - lo->beta);
}

bool dominates(const std::vector<DetectionPoint>& candidate,
               const std::vector<DetectionPoint>& reference, double slack) {
  for (const DetectionPoint& p : candidate) {
    if (p.beta > beta_at_alpha(reference, p.alpha) + slack) return false;
  }
  return true;
}

bool declares_attack(const DetectorSpec& spec, double tau, double statistic) {
  const double c = np_threshold(spec, tau);
  return spec.sigma > 1.0 ? statistic >= c : statistic <= c;
}

double np_statistic(const DetectorSpec& spec, std::span<const double> path) {
  if (static_cast<int>(path.size()) != spec.samples) {
    throw InvalidArgument("np_statistic: path length " +
                          std::to_string(path.size()) + " != samples " +
                          std::to_string(spec.samples));
  }
  double sum = 0.0;
  for (double y : path) sum += y * y / spec.step;
  return sum;
}

EmpiricalRates empirical_np_test(const DetectorSpec& spec,
                                 std::span<const double> taus,
                                 std::int64_t trials, const SeedSpec& seed) {
  spec.validate();
  if (trials < 1) throw InvalidArgument("empirical_np_test: trials < 1");
  std::vector<double> thresholds;
  for (double tau : taus) thresholds.push_back(np_threshold(spec, tau));

  const CounterRng rng(seed.master_seed);
  const std::size_t m = taus.size();
  // Per tau: H0 trials declared attack, H1 trials declared nominal.
  std::vector<std::int64_t> false_alarms(m, 0), misses(m, 0);
  std::mutex merge;
  parallel_chunks(static_cast<std::size_t>(trials),
                  [&](std::size_t begin, std::size_t end) {
    std::vector<std::int64_t> fa(m, 0), miss(m, 0);
    std::vector<double> path(spec.samples);
    const double root_step = std::sqrt(spec.step);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::uint32_t hyp = 0; hyp < 2; ++hyp) {
        rng.normals(i, hyp, path);
        const double scale = root_step * (hyp == 0 ? 1.0 : spec.sigma);
        for (double& y : path) y *= scale;
        const double stat = np_statistic(spec, path);
        for (std::size_t j = 0; j < m; ++j) {
          const bool attack = spec.sigma > 1.0 ? stat >= thresholds[j]
                                               : stat <= thresholds[j];
          if (hyp == 0 && attack) ++fa[j];
          if (hyp == 1 && !attack) ++miss[j];
        }
      }
    }
    std::lock_guard lock(merge);
    for (std::size_t j = 0; j < m; ++j) {
      false_alarms[j] += fa[j];
      misses[j] += miss[j];
    }
  });

  EmpiricalRates out;
  out.trials = trials;
  for (std::size_t j = 0; j < m; ++j) {
    out.points.push_back({taus[j],
                          static_cast<double>(false_alarms[j]) / trials,
                          static_cast<double>(misses[j]) / trials});
  }
  return out;
}

double binomial_half_width(double p, std::int64_t trials, double z) {
  if (trials < 1) throw InvalidArgument("binomial_half_width: trials < 1");
  const double q = std::clamp(p, 0.0, 1.0);
  // Floor the variance so that p near 0 or 1 still gets a usable width.
  const double var = std::max(q * (1.0 - q), 1.0 / trials);
  return z * std::sqrt(var / trials);
}

StealthReport kl_bound_report(double kl) {
  StealthReport r;
  r.kl = kl;
  r.pinsker = pinsker_bound(kl);
  r.bretagnolle_huber = bh_bound(kl);
  r.error_floor = std::max({r.pinsker, r.bretagnolle_huber, 0.0});
  return r;
}

StealthReport kl_bound_report(const AttackRecord& record) {
  return kl_bound_report(record.kl_cost);
}

void write_stealth_report(std::ostream& out, const StealthReport& report) {
  out.precision(17);
  out << "kl_divergence=" << report.kl << '\n'
      << "pinsker_bound=" << report.pinsker << '\n'
      << "bretagnolle_huber_bound=" << report.bretagnolle_huber << '\n'
      << "detection_error_floor=" << report.error_floor << '\n';
}

void write_curve_csv(std::ostream& out,
                     const std::vector<DetectionPoint>& curve) {
  out.precision(17);
  out << "tau,alpha,beta\n";
  for (const DetectionPoint& p : curve) {
    out << p.tau << ',' << p.alpha << ',' << p.beta << '\n';
  }
}

}  // namespace stealthpath
