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

#include "weighted_increment.h"

#include <string>
#include <vector>

#include "stealthpath/error.h"

namespace stealthpath::internal {

Vec weighted_increment(const TrajectoryEnsemble& ensemble,
                       std::span<const double> normalized_weights,
                       const BiasEstimatorOptions& options) {
  const int window = options.window_steps;
  if (window < 1) {
    throw InvalidArgument("bias estimator window must be >= 1 step");
  }
  if (window > ensemble.recorded_steps) {
    throw InvalidArgument("bias estimator window of " +
                          std::to_string(window) +
                          " steps exceeds the recorded increments (" +
                          std::to_string(ensemble.recorded_steps) + ")");
  }
  const int m = ensemble.noise_dim;
  const double uniform = 1.0 / ensemble.count;
  const double offset = options.zero_mean_control_variate ? uniform : 0.0;
  std::vector<double> terms(ensemble.count);
  Vec out(m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < ensemble.count; ++i) {
      double dw = 0.0;
      for (int k = 0; k < window; ++k) dw += ensemble.noise_increment(i, k)(j);
      terms[i] = (normalized_weights[i] - offset) * dw;
    }
    out(j) = pairwise_sum(terms) / (window * ensemble.grid.dt);
  }
  return out;
}

}  // namespace stealthpath::internal
