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

#ifndef STEALTHPATH_SRC_WEIGHTED_INCREMENT_H_
#define STEALTHPATH_SRC_WEIGHTED_INCREMENT_H_

#include <span>

#include "stealthpath/kl_attack.h"
#include "stealthpath/sde_engine.h"

namespace stealthpath::internal {

// sum_i w_i dW_i / (window dt), where dW_i sums the first `window` noise
// increments of path i. Reduced pairwise in index order per component.
Vec weighted_increment(const TrajectoryEnsemble& ensemble,
                       std::span<const double> normalized_weights,
                       const BiasEstimatorOptions& options);

}  // namespace stealthpath::internal

#endif  // STEALTHPATH_SRC_WEIGHTED_INCREMENT_H_
