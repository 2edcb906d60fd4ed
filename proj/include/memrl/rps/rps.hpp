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

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "memrl/engine/rng.hpp"

namespace memrl::rps {

enum class RpsAction : int { Rock = 0, Paper = 1, Scissors = 2 };

inline constexpr int kNumActions = 3;
inline constexpr std::array<RpsAction, 3> kAllActions = {
    RpsAction::Rock, RpsAction::Paper, RpsAction::Scissors};

constexpr int index(RpsAction a) { return static_cast<int>(a); }

inline std::string_view to_string(RpsAction a) {
  switch (a) {
    case RpsAction::Rock: return "rock";
    case RpsAction::Paper: return "paper";
    case RpsAction::Scissors: return "scissors";
  }
  return "invalid";
}

using Vec3 = std::array<double, 3>;

/// A mixed RPS policy [theta_r, theta_p, theta_s] on the 2-simplex.
class ActionDistribution3 {
 public:
  static constexpr double kTolerance = 1e-12;

  /// Uniform distribution.
  ActionDistribution3() : theta_{1.0 / 3, 1.0 / 3, 1.0 / 3} {}

  /// Components may undershoot 0 or miss the unit sum by kTolerance; the
  /// stored value is clamped and renormalized.
  ActionDistribution3(double rock, double paper, double scissors)
      : theta_{rock, paper, scissors} {
    double sum = 0.0;
    for (double& t : theta_) {
      if (!std::isfinite(t) || t < -kTolerance || t > 1.0 + kTolerance) {
        throw std::invalid_argument("ActionDistribution3: component out of [0,1]");
      }
      t = std::clamp(t, 0.0, 1.0);
      sum += t;
    }
    if (std::abs(sum - 1.0) > kTolerance) {
      throw std::invalid_argument("ActionDistribution3: components sum to " +
                                  std::to_string(sum));
    }
    for (double& t : theta_) t /= sum;
  }

  explicit ActionDistribution3(const Vec3& v)
      : ActionDistribution3(v[0], v[1], v[2]) {}

  static ActionDistribution3 pure(RpsAction a) {
    Vec3 v{0.0, 0.0, 0.0};
    v[index(a)] = 1.0;
    return ActionDistribution3(v);
  }

  double rock() const { return theta_[0]; }
  double paper() const { return theta_[1]; }
  double scissors() const { return theta_[2]; }
  double operator[](int i) const { return theta_[i]; }
  double operator[](RpsAction a) const { return theta_[index(a)]; }
  const Vec3& values() const { return theta_; }

  RpsAction sample(Rng& rng) const {
    const double u = rng.uniform();
    if (u < theta_[0]) return RpsAction::Rock;
    if (u < theta_[0] + theta_[1]) return RpsAction::Paper;
    return RpsAction::Scissors;
  }

  friend bool operator==(const ActionDistribution3&,
                         const ActionDistribution3&) = default;

 private:
  Vec3 theta_;
};

/// +1 if a beats b, -1 if b beats a, 0 on a draw.
constexpr int payoff(RpsAction a, RpsAction b) {
  switch ((index(a) - index(b) + 3) % 3) {
    case 1: return 1;
    case 2: return -1;
    default: return 0;
  }
}

/// Expected per-round reward of pi against pi_prime.
inline double expected_reward(const ActionDistribution3& pi,
                              const ActionDistribution3& pi_prime) {
  return pi.rock() * pi_prime.scissors() + pi.paper() * pi_prime.rock() +
         pi.scissors() * pi_prime.paper() - pi.rock() * pi_prime.paper() -
         pi.paper() * pi_prime.scissors() - pi.scissors() * pi_prime.rock();
}

struct PolicyGradients {
  Vec3 pi;        // d expected_reward(pi, pi') / d pi
  Vec3 pi_prime;  // d (-expected_reward(pi, pi')) / d pi'
};

inline PolicyGradients policy_gradients(const ActionDistribution3& pi,
                                        const ActionDistribution3& pi_prime) {
  return {
      {pi_prime.scissors() - pi_prime.paper(), pi_prime.rock() - pi_prime.scissors(),
       pi_prime.paper() - pi_prime.rock()},
      {pi.scissors() - pi.paper(), pi.rock() - pi.scissors(), pi.paper() - pi.rock()},
  };
}

/// Lowest index wins ties.
inline int argmax(const Vec3& v) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

/// Discounted opponent-action counts of the counter policy.
struct CountMemory {
  Vec3 h{0.0, 0.0, 0.0};
  double gamma = 1.0;

  explicit CountMemory(double discount = 1.0) : gamma(discount) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
      throw std::invalid_argument("CountMemory: gamma must be in (0, 1]");
    }
  }
};

/// The action that beats the argmax of the counts.
inline RpsAction counter_action(const Vec3& h) {
  static constexpr std::array<RpsAction, 3> kCounter = {
      RpsAction::Paper, RpsAction::Scissors, RpsAction::Rock};
  return kCounter[argmax(h)];
}

/// One recurrent update: h' = gamma * h + onehot(observed), then counter the
/// most frequent opponent action.
inline std::pair<RpsAction, CountMemory> counter_step(const CountMemory& mem,
                                                      RpsAction observed) {
  CountMemory next = mem;
  for (int i = 0; i < 3; ++i) next.h[i] = mem.gamma * mem.h[i];
  next.h[index(observed)] += 1.0;
  return {counter_action(next.h), next};
}

struct BestResponse {
  RpsAction action;
  double value;
};

inline BestResponse best_response(const ActionDistribution3& pi_prime) {
  Vec3 values{};
  for (RpsAction a : kAllActions) {
    values[index(a)] = expected_reward(ActionDistribution3::pure(a), pi_prime);
  }
  const int best = argmax(values);
  return {static_cast<RpsAction>(best), values[best]};
}

/// Uniform sample from the 2-simplex via the spacings of two sorted uniforms.
inline ActionDistribution3 sample_simplex_uniform(Rng& rng) {
  double u = rng.uniform();
  double v = rng.uniform();
  if (u > v) std::swap(u, v);
  return ActionDistribution3(u, v - u, 1.0 - v);
}

}  // namespace memrl::rps
