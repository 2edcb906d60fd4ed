// Copyright 2026 The memrl Authors. All rights reserved.
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

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace memrl {

using Seed = std::uint64_t;

/// SplitMix64 output finalizer (Stafford "Mix13"). A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the index-th episode under a master seed:
/// mix64(mix64(master) ^ index). Injective in index for a fixed master, and in
/// master for a fixed index. Mixing the master first keeps nearby masters
/// (1, 2, 3, ...) from producing permutations of the same seed set.
constexpr Seed derive_seed(Seed master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ index);
}

// Stream tags for auxiliary generators owned by environments, so that reset
// draws never alias the per-step stream of the same episode.
inline constexpr std::uint64_t kResetStream = 0x5eed'0000'0000'0001ULL;

/// Per-episode random stream. Distributions are implemented here rather than
/// through <random> distributions so that draws are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace memrl
