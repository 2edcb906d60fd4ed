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

#include <any>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "memrl/engine/episode.hpp"
#include "memrl/engine/policy.hpp"
#include "memrl/engine/rng.hpp"
#include "memrl/rps/rps.hpp"

namespace memrl::rps {

struct RpsObservation {
  std::optional<RpsAction> opponent_last;  // empty on the first round
  int round = 0;
  // Filled only by environments configured to reveal a stationary
  // opponent's parameters (the known-parameter oracle reads it).
  std::optional<ActionDistribution3> opponent_params;
};

using RpsPolicy = PolicyHandle<RpsObservation, RpsAction>;

inline bool is_rps_action(RpsAction a) {
  return index(a) >= 0 && index(a) < kNumActions;
}

// ---------------------------------------------------------------------------
// Two-agent repeated game; both agents controlled.

class RpsGame {
 public:
  using Action = RpsAction;
  using Observation = RpsObservation;
  struct State {
    int round = 0;
    std::optional<RpsAction> last[2];
  };

  explicit RpsGame(int rounds) : rounds_(rounds) {
    if (rounds < 1) throw std::invalid_argument("RpsGame: rounds < 1");
  }

  State reset(Seed) const { return {}; }
  int agent_count() const { return 2; }
  int step_limit() const { return rounds_; }
  bool is_legal(int, RpsAction a) const { return is_rps_action(a); }

  Observation observation(const State& s, int agent) const {
    return {s.last[1 - agent], s.round, std::nullopt};
  }

  StepResult<State> step(const State& s, std::span<const RpsAction> joint,
                         Rng&) const {
    State next = s;
    next.round = s.round + 1;
    next.last[0] = joint[0];
    next.last[1] = joint[1];
    const double r = payoff(joint[0], joint[1]);
    return {next, {r, -r}, next.round >= rounds_};
  }

 private:
  int rounds_;
};

// ---------------------------------------------------------------------------
// Single controlled agent against an embedded opponent.

/// Opponent resampled uniformly from the simplex at every reset, then held
/// fixed for the episode.
struct UniformResampledOpponent {};

using RpsOpponent =
    std::variant<ActionDistribution3, UniformResampledOpponent, RpsPolicy>;

class RepeatedRpsEnv {
 public:
  using Action = RpsAction;
  using Observation = RpsObservation;
  struct State {
    int round = 0;
    std::optional<RpsAction> agent_last;
    std::optional<RpsAction> opponent_last;
    std::optional<ActionDistribution3> opponent_params;  // stationary opponents
    std::any opponent_memory;                            // policy opponents
  };

  RepeatedRpsEnv(int rounds, RpsOpponent opponent, bool reveal_opponent = false)
      : rounds_(rounds), opponent_(std::move(opponent)), reveal_(reveal_opponent) {
    if (rounds < 1) throw std::invalid_argument("RepeatedRpsEnv: rounds < 1");
  }

  State reset(Seed seed) const {
    State s;
    if (const auto* fixed = std::get_if<ActionDistribution3>(&opponent_)) {
      s.opponent_params = *fixed;
    } else if (std::holds_alternative<UniformResampledOpponent>(opponent_)) {
      Rng reset_rng(derive_seed(seed, kResetStream));
      s.opponent_params = sample_simplex_uniform(reset_rng);
    } else {
      s.opponent_memory = std::get<RpsPolicy>(opponent_).init_memory();
    }
    return s;
  }

  int agent_count() const { return 1; }
  int step_limit() const { return rounds_; }
  bool is_legal(int, RpsAction a) const { return is_rps_action(a); }

  Observation observation(const State& s, int) const {
    Observation obs{s.opponent_last, s.round, std::nullopt};
    if (reveal_) {
      if (!s.opponent_params) {
        throw std::logic_error("RepeatedRpsEnv: opponent parameters unavailable");
      }
      obs.opponent_params = s.opponent_params;
    }
    return obs;
  }

  StepResult<State> step(const State& s, std::span<const RpsAction> joint,
                         Rng& rng) const {
    State next = s;
    RpsAction opp;
    if (s.opponent_params) {
      opp = s.opponent_params->sample(rng);
    } else {
      const auto& policy = std::get<RpsPolicy>(opponent_);
      auto [a, mem] = policy.act({s.agent_last, s.round, std::nullopt},
                                 s.opponent_memory, rng);
      if (!is_rps_action(a)) {
        throw EpisodeFault("illegal opponent action", 1, s.round);
      }
      opp = a;
      next.opponent_memory = std::move(mem);
    }
    next.round = s.round + 1;
    next.agent_last = joint[0];
    next.opponent_last = opp;
    const bool done = next.round >= rounds_;
    return {std::move(next), {static_cast<double>(payoff(joint[0], opp))}, done};
  }

 private:
  int rounds_;
  RpsOpponent opponent_;
  bool reveal_;
};

inline RepeatedRpsEnv repeated_rps_env(int rounds, RpsOpponent opponent,
                                       bool reveal_opponent = false) {
  return RepeatedRpsEnv(rounds, std::move(opponent), reveal_opponent);
}

// ---------------------------------------------------------------------------
// Policies.

/// Memoryless mixed strategy.
struct StationaryPolicy {
  using Memory = std::monostate;
  ActionDistribution3 dist;
  Memory init_memory() const { return {}; }
  std::pair<RpsAction, Memory> act(const RpsObservation&, const Memory&,
                                   Rng& rng) const {
    return {dist.sample(rng), {}};
  }
};

/// Hand-crafted recurrent counter policy: discounted counts of opponent
/// actions, countering the most frequent one. On the first round the counts
/// are all zero and the tie resolves to index 0, so it plays Paper.
struct CounterPolicy {
  using Memory = CountMemory;
  double gamma = 1.0;
  Memory init_memory() const { return CountMemory(gamma); }
  std::pair<RpsAction, Memory> act(const RpsObservation& obs, const Memory& mem,
                                   Rng&) const {
    if (!obs.opponent_last) return {counter_action(mem.h), mem};
    return counter_step(mem, *obs.opponent_last);
  }
};

/// Plays the best response to the revealed opponent parameters.
struct KnownParamsOracle {
  using Memory = std::monostate;
  Memory init_memory() const { return {}; }
  std::pair<RpsAction, Memory> act(const RpsObservation& obs, const Memory&,
                                   Rng&) const {
    if (!obs.opponent_params) {
      throw std::logic_error("KnownParamsOracle: opponent parameters not revealed");
    }
    return {best_response(*obs.opponent_params).action, {}};
  }
};

inline RpsPolicy make_stationary(const ActionDistribution3& dist) {
  return RpsPolicy(StationaryPolicy{dist}, "stationary");
}
inline RpsPolicy make_counter(double gamma = 1.0) {
  return RpsPolicy(CounterPolicy{gamma}, "counter");
}
inline RpsPolicy make_oracle() { return RpsPolicy(KnownParamsOracle{}, "oracle"); }

}  // namespace memrl::rps
