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

#include "stealthpath/random.h"

#include <cmath>
#include <numbers>

namespace stealthpath {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// (0, 1) from 53 random bits; never returns 0.
double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag_a,
                          std::uint64_t tag_b) {
  std::uint64_t z = splitmix64(parent);
  z = splitmix64(z ^ splitmix64(tag_a + 0x632BE59BD9B4E019ull));
  z = splitmix64(z ^ splitmix64(tag_b + 0x85157AF5ull));
  return z;
}

CounterRng::CounterRng(std::uint64_t key)
    : key_{static_cast<std::uint32_t>(key),
           static_cast<std::uint32_t>(key >> 32)} {}

CounterRng::Block CounterRng::operator()(Block c) const {
  std::uint32_t k0 = key_[0];
  std::uint32_t k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return c;
}

void CounterRng::normals(std::uint64_t stream, std::uint32_t step,
                         std::span<double> out) const {
  const auto stream_lo = static_cast<std::uint32_t>(stream);
  const auto stream_hi = static_cast<std::uint32_t>(stream >> 32);
  std::uint32_t block = 0;
  for (std::size_t j = 0; j < out.size(); j += 2, ++block) {
    const Block r = (*this)({step, block, stream_lo, stream_hi});
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[j] = radius * std::cos(angle);
    if (j + 1 < out.size()) out[j + 1] = radius * std::sin(angle);
  }
}

void CounterRng::uniforms(std::uint64_t stream, std::uint32_t step,
                          std::span<double> out) const {
  const auto stream_lo = static_cast<std::uint32_t>(stream);
  const auto stream_hi = static_cast<std::uint32_t>(stream >> 32);
  // Block indices are offset so uniforms never share bits with normals.
  std::uint32_t block = 0x80000000u;
  for (std::size_t j = 0; j < out.size(); j += 2, ++block) {
    const Block r = (*this)({step, block, stream_lo, stream_hi});
    out[j] = to_open_unit(r[0], r[1]);
    if (j + 1 < out.size()) out[j + 1] = to_open_unit(r[2], r[3]);
  }
}

}  // namespace stealthpath
