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

// Simultaneous exact policy-gradient ascent of two RPS policies against each
// other. The payoff is bilinear with a skew-symmetric matrix whose columns sum
// to zero, so the joint gradient field is orthogonal to the displacement from
// the uniform pair and every unprojected step grows the squared radius by
// exactly eta^2 (|g|^2 + |g'|^2).

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "memrl/rps/rps.hpp"

namespace memrl::colearn {

using rps::ActionDistribution3;
using rps::Vec3;

/// Euclidean projection onto the probability simplex (sort-and-threshold).
inline Vec3 project_to_simplex(const Vec3& v) {
  Vec3 u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (int i = 0; i < 3; ++i) {
    cumulative += u[i];
    const double t = (cumulative - 1.0) / (i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

/// Squared distance of (pi, pi') from (uniform, uniform).
inline double radius_squared(const ActionDistribution3& pi,
                             const ActionDistribution3& pi_prime) {
  double r2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = pi[i] - 1.0 / 3;
    const double b = pi_prime[i] - 1.0 / 3;
    r2 += a * a + b * b;
  }
  return r2;
}

inline double radius(const ActionDistribution3& pi,
                     const ActionDistribution3& pi_prime) {
  return std::sqrt(radius_squared(pi, pi_prime));
}

struct StepOutcome {
  ActionDistribution3 pi;
  ActionDistribution3 pi_prime;
  bool projected = false;
  // Squared gradient norms at the pre-step point (for the growth law).
  double grad_norm2 = 0.0;
  double grad_prime_norm2 = 0.0;
};

inline StepOutcome colearn_step(const ActionDistribution3& pi,
                                const ActionDistribution3& pi_prime, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("colearn_step: eta must be > 0");
  const auto g = rps::policy_gradients(pi, pi_prime);
  Vec3 a{}, b{};
  StepOutcome out;
  bool outside = false;
  for (int i = 0; i < 3; ++i) {
    a[i] = pi[i] + eta * g.pi[i];
    b[i] = pi_prime[i] + eta * g.pi_prime[i];
    out.grad_norm2 += g.pi[i] * g.pi[i];
    out.grad_prime_norm2 += g.pi_prime[i] * g.pi_prime[i];
    outside = outside || a[i] < 0.0 || b[i] < 0.0;
  }
  if (outside) {
    a = project_to_simplex(a);
    b = project_to_simplex(b);
    out.projected = true;
  }
  out.pi = ActionDistribution3(a);
  out.pi_prime = ActionDistribution3(b);
  return out;
}

struct TracePoint {
  int t = 0;
  ActionDistribution3 pi;
  ActionDistribution3 pi_prime;
  double radius = 0.0;
  bool projected = false;  // whether the step that produced this point projected
};

using DynamicsTrace = std::vector<TracePoint>;

/// n_steps + 1 points, the first being the initial pair. n_steps == 0 yields
/// just the initial point.
inline DynamicsTrace run_dynamics(const ActionDistribution3& pi0,
                                  const ActionDistribution3& pi_prime0, double eta,
                                  int n_steps) {
  if (n_steps < 0) throw std::invalid_argument("run_dynamics: n_steps < 0");
  DynamicsTrace trace;
  trace.reserve(static_cast<std::size_t>(n_steps) + 1);
  trace.push_back({0, pi0, pi_prime0, radius(pi0, pi_prime0), false});
  for (int t = 1; t <= n_steps; ++t) {
    const auto& prev = trace.back();
    const auto step = colearn_step(prev.pi, prev.pi_prime, eta);
    trace.push_back({t, step.pi, step.pi_prime, radius(step.pi, step.pi_prime),
                     step.projected});
  }
  return trace;
}

}  // namespace memrl::colearn
