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

#ifndef STEALTHPATH_RANDOM_H_
#define STEALTHPATH_RANDOM_H_

#include <array>
#include <cstdint>
#include <span>

namespace stealthpath {

// Master seed of a batch. Trajectory i, step k always draws from counter
// (master_seed, i, k), so draws never depend on execution order.
struct SeedSpec {
  std::uint64_t master_seed = 0;
};

// Mixes a parent seed with tags (run index, decision index, purpose, ...)
// into an independent child seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag_a,
                          std::uint64_t tag_b = 0);

// Philox4x32-10 counter-based generator.
class CounterRng {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit CounterRng(std::uint64_t key);

  Block operator()(Block counter) const;

  // Standard normal draws for (stream, step), filled via Box-Muller.
  void normals(std::uint64_t stream, std::uint32_t step,
               std::span<double> out) const;

  // Uniform draws in the open interval (0, 1).
  void uniforms(std::uint64_t stream, std::uint32_t step,
                std::span<double> out) const;

 private:
  std::array<std::uint32_t, 2> key_;
};

}  // namespace stealthpath

#endif  // STEALTHPATH_RANDOM_H_
