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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "memrl/engine/episode.hpp"

namespace memrl {

struct EpisodeStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 when n == 1
  std::int64_t n = 0;
  double ci95 = 0.0;  // 1.96 * std / sqrt(n)
};

/// Two-pass summary over the returns in index order, so the result depends
/// only on the multiset of values as laid out by episode index.
inline EpisodeStats summarize(std::span<const double> returns) {
  if (returns.empty()) throw std::invalid_argument("summarize: no returns");
  EpisodeStats s;
  s.n = static_cast<std::int64_t>(returns.size());
  double sum = 0.0;
  for (double r : returns) sum += r;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double r : returns) ss += (r - s.mean) * (r - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  s.ci95 = 1.96 * s.std / std::sqrt(static_cast<double>(s.n));
  return s;
}

struct EvalOptions {
  int workers = 0;  // 0: hardware concurrency
  int agent = 0;    // whose return is aggregated
  int max_steps = std::numeric_limits<int>::max();
};

namespace internal {

inline int resolve_workers(int requested, std::int64_t n_episodes) {
  int w = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  w = std::max(w, 1);
  return static_cast<int>(std::min<std::int64_t>(w, n_episodes));
}

}  // namespace internal

/// Returns of `n_episodes` independent episodes; episode i is seeded with
/// derive_seed(master_seed, i) and gets fresh instances from both factories.
/// Output is indexed by episode and independent of the worker count.
template <class EnvFactory, class PolicyFactory>
std::vector<double> evaluate_returns(const EnvFactory& env_factory,
                                     const PolicyFactory& policy_factory,
                                     std::int64_t n_episodes, Seed master_seed,
                                     const EvalOptions& options = {}) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes < 1");
  std::vector<double> returns(static_cast<std::size_t>(n_episodes));
  std::vector<std::exception_ptr> faults(returns.size());
  std::atomic<std::int64_t> next{0};

  auto worker = [&] {
    for (std::int64_t i = next.fetch_add(1); i < n_episodes;
         i = next.fetch_add(1)) {
      try {
        const auto env = env_factory();
        const auto policies = policy_factory();
        const auto episode =
            run_episode(env, policies, derive_seed(master_seed, i),
                        options.max_steps, /*record_trajectory=*/false);
        returns[i] = episode.returns.at(options.agent);
      } catch (const EpisodeFault& f) {
        faults[i] = std::make_exception_ptr(
            EpisodeFault("episode " + std::to_string(i) + ": " + f.what(),
                         f.agent(), f.step(), i));
      } catch (...) {
        faults[i] = std::current_exception();
      }
    }
  };

  const int n_workers = internal::resolve_workers(options.workers, n_episodes);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  // Lowest failing index wins, regardless of schedule.
  for (const auto& f : faults) {
    if (f) std::rethrow_exception(f);
  }
  return returns;
}

template <class EnvFactory, class PolicyFactory>
EpisodeStats evaluate(const EnvFactory& env_factory,
                      const PolicyFactory& policy_factory,
                      std::int64_t n_episodes, Seed master_seed,
                      const EvalOptions& options = {}) {
  const auto returns = evaluate_returns(env_factory, policy_factory, n_episodes,
                                        master_seed, options);
  return summarize(returns);
}

}  // namespace memrl
