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
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "memrl/engine/policy.hpp"
#include "memrl/engine/rng.hpp"

namespace memrl {

template <class State>
struct StepResult {
  State next;
  std::vector<double> rewards;  // one per agent
  bool done = false;
};

// Simultaneous-move environment model. `step` must be a pure function of
// (state, joint action, draws from rng); all episode randomness flows through
// the seed passed to `reset` and the per-episode Rng.
template <class E>
concept Environment =
    requires(const E& env, const typename E::State& state,
             std::span<const typename E::Action> joint, Rng& rng, Seed seed,
             int agent, typename E::Action action) {
      typename E::State;
      typename E::Action;
      typename E::Observation;
      { env.reset(seed) } -> std::same_as<typename E::State>;
      { env.step(state, joint, rng) } -> std::same_as<StepResult<typename E::State>>;
      { env.agent_count() } -> std::convertible_to<int>;
      { env.observation(state, agent) } -> std::same_as<typename E::Observation>;
      { env.is_legal(agent, action) } -> std::convertible_to<bool>;
      { env.step_limit() } -> std::convertible_to<int>;
    };

template <Environment E>
using PolicyFor_t = PolicyHandle<typename E::Observation, typename E::Action>;

/// Raised when a policy emits an action outside the environment's action set,
/// or when an episode cannot be executed as configured.
class EpisodeFault : public std::runtime_error {
 public:
  EpisodeFault(const std::string& what, int agent, int step,
               std::int64_t episode = -1)
      : std::runtime_error(what), agent_(agent), step_(step), episode_(episode) {}

  int agent() const { return agent_; }
  int step() const { return step_; }
  std::int64_t episode() const { return episode_; }

 private:
  int agent_;
  int step_;
  std::int64_t episode_;
};

template <class State, class Action>
struct Transition {
  State state;
  std::vector<Action> joint_action;
  std::vector<double> rewards;
};

template <class State, class Action>
struct Episode {
  std::vector<double> returns;
  std::vector<Transition<State, Action>> trajectory;
  int steps = 0;
};

/// Runs one episode with undiscounted returns. The episode stops when the
/// environment reports done, or after min(max_steps, env.step_limit()) steps.
template <Environment E>
Episode<typename E::State, typename E::Action> run_episode(
    const E& env, std::span<const PolicyFor_t<E>> policies, Seed seed,
    int max_steps, bool record_trajectory = true) {
  using Action = typename E::Action;
  const int n_agents = env.agent_count();
  if (static_cast<int>(policies.size()) != n_agents) {
    throw EpisodeFault("run_episode: expected " + std::to_string(n_agents) +
                           " policies, got " + std::to_string(policies.size()),
                       -1, 0);
  }
  if (max_steps < 1) throw EpisodeFault("run_episode: max_steps < 1", -1, 0);
  const int limit = std::min(max_steps, env.step_limit());

  Rng rng(seed);
  auto state = env.reset(seed);
  std::vector<std::any> memory;
  memory.reserve(n_agents);
  for (const auto& p : policies) memory.push_back(p.init_memory());

  Episode<typename E::State, Action> episode;
  episode.returns.assign(n_agents, 0.0);
  std::vector<Action> joint(n_agents);
  for (int t = 0; t < limit; ++t) {
    for (int i = 0; i < n_agents; ++i) {
      auto [action, next] = policies[i].act(env.observation(state, i), memory[i], rng);
      if (!env.is_legal(i, action)) {
        throw EpisodeFault("illegal action " +
                               std::to_string(static_cast<long long>(action)) +
                               " from agent " + std::to_string(i) +
                               " at step " + std::to_string(t),
                           i, t);
      }
      joint[i] = action;
      memory[i] = std::move(next);
    }
    auto result = env.step(state, std::span<const Action>(joint), rng);
    for (int i = 0; i < n_agents; ++i) episode.returns[i] += result.rewards[i];
    if (record_trajectory) {
      episode.trajectory.push_back({std::move(state), joint, result.rewards});
    }
    state = std::move(result.next);
    ++episode.steps;
    if (result.done) break;
  }
  return episode;
}

template <Environment E>
Episode<typename E::State, typename E::Action> run_episode(
    const E& env, const std::vector<PolicyFor_t<E>>& policies, Seed seed,
    int max_steps, bool record_trajectory = true) {
  return run_episode(env, std::span<const PolicyFor_t<E>>(policies), seed,
                     max_steps, record_trajectory);
}

}  // namespace memrl
