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

#include "stealthpath/numeric.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stealthpath/error.h"

namespace stealthpath {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

ExponentialWeights exponential_weights(std::span<const double> costs,
                                       double temperature, double sign) {
  if (costs.empty()) {
    throw InvalidArgument("exponential_weights: empty cost sample");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidArgument("exponential_weights: temperature must be positive");
  }
  const std::size_t n = costs.size();
  std::vector<double> exponent(n);
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(costs[i])) {
      throw NumericalFailure("exponential_weights: non-finite path cost at index " +
                             std::to_string(i));
    }
    exponent[i] = sign * costs[i] / temperature;
    shift = std::max(shift, exponent[i]);
  }

  ExponentialWeights out;
  out.normalized.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.normalized[i] = std::exp(exponent[i] - shift);
  }
  const double total = pairwise_sum(out.normalized);
  for (double& w : out.normalized) w /= total;
  out.log_mean = shift + std::log(total) - std::log(static_cast<double>(n));

  std::vector<double> squares(n);
  std::transform(out.normalized.begin(), out.normalized.end(), squares.begin(),
                 [](double w) { return w * w; });
  out.effective_sample_size = 1.0 / pairwise_sum(squares);
  return out;
}

PseudoInverse pseudo_inverse(const Mat& a, double relative_tolerance) {
  PseudoInverse out;
  out.matrix = Mat::Zero(a.cols(), a.rows());
  if (a.size() == 0) return out;
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return out;
  const double cutoff = relative_tolerance * s(0);
  Vec inv = Vec::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      inv(i) = 1.0 / s(i);
      ++out.rank;
    }
  }
  out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

}  // namespace stealthpath
