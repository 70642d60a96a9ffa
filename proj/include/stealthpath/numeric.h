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

#ifndef STEALTHPATH_NUMERIC_H_
#define STEALTHPATH_NUMERIC_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stealthpath {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Pairwise (tree) summation. The split points depend only on the length, so
// the result is independent of how the inputs were produced.
double pairwise_sum(std::span<const double> values);

// Importance weights proportional to exp(sign * cost_i / temperature).
//
// The exponent is shifted by its maximum before exponentiation (max-shifted
// log-sum-exp), so `log_mean` is finite whenever the costs are.
struct ExponentialWeights {
  std::vector<double> normalized;  // sums to 1
  // log((1/N) * sum_i exp(sign * cost_i / temperature))
  double log_mean = 0.0;
  // 1 / sum_i normalized_i^2, in [1, N]
  double effective_sample_size = 0.0;
};

ExponentialWeights exponential_weights(std::span<const double> costs,
                                       double temperature, double sign);

// Moore-Penrose pseudo-inverse via SVD. Singular values below
// relative_tolerance * (largest singular value) are treated as zero.
struct PseudoInverse {
  Mat matrix;
  int rank = 0;
};

PseudoInverse pseudo_inverse(const Mat& a, double relative_tolerance = 1e-10);

// Largest singular value.
double spectral_norm(const Mat& a);

}  // namespace stealthpath

#endif  // STEALTHPATH_NUMERIC_H_
