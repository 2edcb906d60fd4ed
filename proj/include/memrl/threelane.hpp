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

// Three-lane target pursuit without an explicit channel.
//
// Agent i lives in lane i (0 = top, 1 = center, 2 = bottom) at a cell in
// 0..L and never changes lane. A target sits at cell L of one lane; only the
// center agent observes which. Everyone observes all positions and all
// previous actions. The team shares one reward: -time_cost per step,
// -fuel_cost per Left/Right action (also when clamped at a road end), and
// +target_reward when the agent of the target lane reaches cell L, which ends
// the episode. Episodes are capped at 4 L steps.

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memrl/engine/episode.hpp"
#include "memrl/engine/policy.hpp"
#include "memrl/engine/rng.hpp"

namespace memrl::threelane {

enum class LaneAction : int { Left = 0, Right = 1, Stay = 2 };

inline constexpr int kTop = 0;
inline constexpr int kCenter = 1;
inline constexpr int kBottom = 2;
inline constexpr int kNumAgents = 3;

inline std::string_view lane_name(int lane) {
  switch (lane) {
    case kTop: return "top";
    case kCenter: return "center";
    case kBottom: return "bottom";
  }
  return "?";
}

inline bool is_move(LaneAction a) { return a != LaneAction::Stay; }

struct CostConfig {
  double fuel_cost = 1.0;
  double time_cost = 0.1;
  double target_reward = 10.0;
};

struct ThreeLaneConfig {
  int length = 8;
  CostConfig costs;
  std::optional<int> fixed_target;  // otherwise uniform per episode

  int step_cap() const { return 4 * length; }
};

struct LaneObservation {
  int self = 0;
  std::array<int, kNumAgents> positions{};
  std::array<std::optional<LaneAction>, kNumAgents> last_actions{};
  std::optional<int> target_lane;  // center agent only
  int length = 0;
};

struct LaneWorldState {
  std::array<int, kNumAgents> positions{};
  std::array<std::optional<LaneAction>, kNumAgents> last_actions{};
  int target_lane = 0;
  int step = 0;
};

class ThreeLaneEnv {
 public:
  using Action = LaneAction;
  using Observation = LaneObservation;
  using State = LaneWorldState;

  explicit ThreeLaneEnv(ThreeLaneConfig config) : config_(std::move(config)) {
    if (config_.length < 3) throw std::invalid_argument("ThreeLaneEnv: L < 3");
    const auto& c = config_.costs;
    if (c.fuel_cost < 0 || c.time_cost < 0 || c.target_reward < 0) {
      throw std::invalid_argument("ThreeLaneEnv: costs must be >= 0");
    }
    if (config_.fixed_target &&
        (*config_.fixed_target < 0 || *config_.fixed_target >= kNumAgents)) {
      throw std::invalid_argument("ThreeLaneEnv: target lane out of range");
    }
  }

  State reset(Seed seed) const {
    State s;
    if (config_.fixed_target) {
      s.target_lane = *config_.fixed_target;
    } else {
      Rng reset_rng(derive_seed(seed, kResetStream));
      s.target_lane = static_cast<int>(reset_rng.below(kNumAgents));
    }
    return s;
  }

  int agent_count() const { return kNumAgents; }
  int step_limit() const { return config_.step_cap(); }
  bool is_legal(int, LaneAction a) const {
    const int i = static_cast<int>(a);
    return i >= 0 && i <= 2;
  }

  Observation observation(const State& s, int agent) const {
    Observation obs{agent, s.positions, s.last_actions, std::nullopt, config_.length};
    if (agent == kCenter) obs.target_lane = s.target_lane;
    return obs;
  }

  StepResult<State> step(const State& s, std::span<const LaneAction> joint,
                         Rng&) const {
    State next = s;
    next.step = s.step + 1;
    double reward = -config_.costs.time_cost;
    for (int i = 0; i < kNumAgents; ++i) {
      int& p = next.positions[i];
      switch (joint[i]) {
        case LaneAction::Left: p = std::max(p - 1, 0); break;
        case LaneAction::Right: p = std::min(p + 1, config_.length); break;
        case LaneAction::Stay: break;
      }
      if (is_move(joint[i])) reward -= config_.costs.fuel_cost;
      next.last_actions[i] = joint[i];
    }
    const bool reached = next.positions[s.target_lane] == config_.length;
    if (reached) reward += config_.costs.target_reward;
    const bool done = reached || next.step >= config_.step_cap();
    return {std::move(next), std::vector<double>(kNumAgents, reward), done};
  }

  const ThreeLaneConfig& config() const { return config_; }

 private:
  ThreeLaneConfig config_;
};

inline ThreeLaneEnv threelane_env(int length, CostConfig costs,
                                  std::optional<int> fixed_target = std::nullopt) {
  return ThreeLaneEnv({length, costs, fixed_target});
}

using LanePolicy = PolicyHandle<LaneObservation, LaneAction>;

// ---------------------------------------------------------------------------
// Scripted policies.

inline LanePolicy naive_policy() {
  return make_memoryless<LaneObservation, LaneAction>(
      [](const LaneObservation&, Rng&) { return LaneAction::Right; }, "naive");
}

/// Two-step code sent by the center agent's own moves.
inline std::array<LaneAction, 2> signal_for(int target_lane) {
  switch (target_lane) {
    case kTop: return {LaneAction::Right, LaneAction::Left};
    case kCenter: return {LaneAction::Right, LaneAction::Right};
    case kBottom: return {LaneAction::Right, LaneAction::Stay};
  }
  throw std::invalid_argument("signal_for: lane out of range");
}

inline std::optional<int> decode_signal(LaneAction first, LaneAction second) {
  for (int lane : {kTop, kCenter, kBottom}) {
    const auto code = signal_for(lane);
    if (code[0] == first && code[1] == second) return lane;
  }
  return std::nullopt;
}

/// Center agent: emits the two-step code, then drives to the end if the
/// target is its own lane and waits otherwise. Memory: steps taken.
struct SignalerPolicy {
  using Memory = int;
  Memory init_memory() const { return 0; }
  std::pair<LaneAction, Memory> act(const LaneObservation& obs, const Memory& t,
                                    Rng&) const {
    if (!obs.target_lane) {
      throw std::logic_error("SignalerPolicy: target lane not observed");
    }
    const int target = *obs.target_lane;
    if (t < 2) return {signal_for(target)[t], t + 1};
    const bool go = target == kCenter && obs.positions[kCenter] < obs.length;
    return {go ? LaneAction::Right : LaneAction::Stay, t + 1};
  }
};

/// Outer-lane agent: records the center agent's first two actions, waits
/// while doing so, then drives to the end only if the decoded lane is its own.
struct ListenerPolicy {
  struct Memory {
    std::array<LaneAction, 2> seen{};
    int n_seen = 0;
  };
  int lane = kTop;

  Memory init_memory() const { return {}; }
  std::pair<LaneAction, Memory> act(const LaneObservation& obs, const Memory& mem,
                                    Rng&) const {
    Memory next = mem;
    if (next.n_seen < 2 && obs.last_actions[kCenter]) {
      next.seen[next.n_seen++] = *obs.last_actions[kCenter];
    }
    if (next.n_seen < 2) return {LaneAction::Stay, next};
    const auto decoded = decode_signal(next.seen[0], next.seen[1]);
    const bool go = decoded == lane && obs.positions[lane] < obs.length;
    return {go ? LaneAction::Right : LaneAction::Stay, next};
  }
};

inline LanePolicy signaler_policy() { return LanePolicy(SignalerPolicy{}, "signaler"); }

inline LanePolicy listener_policy(int lane) {
  if (lane != kTop && lane != kBottom) {
    throw std::invalid_argument("listener_policy: lane must be 0 or 2");
  }
  return LanePolicy(ListenerPolicy{lane}, "listener");
}

inline std::vector<LanePolicy> naive_team() {
  return {naive_policy(), naive_policy(), naive_policy()};
}

inline std::vector<LanePolicy> comm_team() {
  return {listener_policy(kTop), signaler_policy(), listener_policy(kBottom)};
}

// ---------------------------------------------------------------------------
// Exact comparison by enumeration over target lanes.

struct ComparisonRow {
  int target_lane = 0;
  std::string policy;
  int steps = 0;
  int fuel_moves = 0;
  double ret = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;  // per (target lane, policy)
  double naive_expected = 0.0;
  double comm_expected = 0.0;
};

inline ComparisonRow run_fixed_target(int length, const CostConfig& costs,
                                      int target, const std::vector<LanePolicy>& team,
                                      std::string name) {
  const auto env = threelane_env(length, costs, target);
  const auto episode = run_episode(env, team, /*seed=*/0, env.step_limit());
  ComparisonRow row{target, std::move(name), episode.steps, 0, episode.returns[0]};
  for (const auto& tr : episode.trajectory) {
    for (LaneAction a : tr.joint_action) row.fuel_moves += is_move(a) ? 1 : 0;
  }
  return row;
}

inline Comparison compare_policies(int length, const CostConfig& costs) {
  Comparison out;
  for (int target : {kTop, kCenter, kBottom}) {
    out.rows.push_back(run_fixed_target(length, costs, target, naive_team(), "naive"));
    out.naive_expected += out.rows.back().ret / 3.0;
    out.rows.push_back(
        run_fixed_target(length, costs, target, comm_team(), "behavior-comm"));
    out.comm_expected += out.rows.back().ret / 3.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Memoryless listeners: a table (own position, center agent's last action)
// -> action per outer lane, searched exhaustively against the scripted
// signaler.

/// Observation index of the center agent's last action: 0 = none yet,
/// 1 + LaneAction otherwise.
inline int center_obs_index(const std::optional<LaneAction>& a) {
  return a ? 1 + static_cast<int>(*a) : 0;
}

inline constexpr int kCenterObsCount = 4;

struct ListenerTable {
  int length = 0;
  // entries[pos * kCenterObsCount + obs]; empty means never consulted.
  std::vector<std::optional<LaneAction>> entries;

  explicit ListenerTable(int l = 0)
      : length(l), entries(static_cast<std::size_t>(l + 1) * kCenterObsCount) {}

  std::optional<LaneAction>& at(int pos, int obs) {
    return entries[static_cast<std::size_t>(pos) * kCenterObsCount + obs];
  }
  const std::optional<LaneAction>& at(int pos, int obs) const {
    return entries[static_cast<std::size_t>(pos) * kCenterObsCount + obs];
  }
};

/// Memoryless policy reading a listener table; unset entries play Stay.
inline LanePolicy table_listener(ListenerTable table) {
  return make_memoryless<LaneObservation, LaneAction>(
      [table = std::move(table)](const LaneObservation& obs, Rng&) {
        const auto& e =
            table.at(obs.positions[obs.self], center_obs_index(obs.last_actions[kCenter]));
        return e.value_or(LaneAction::Stay);
      },
      "memoryless-listener");
}

struct MemorylessSearchResult {
  double value = -std::numeric_limits<double>::infinity();
  ListenerTable top;
  ListenerTable bottom;
  std::int64_t nodes = 0;
};

namespace internal {

class ListenerSearch {
 public:
  ListenerSearch(int length, const CostConfig& costs)
      : length_(length), cap_(4 * length), costs_(costs) {
    // Signaler behavior is fixed per target lane; precompute it.
    for (int s = 0; s < kNumAgents; ++s) {
      signal_[s].resize(cap_);
      for (int t = 0; t < cap_; ++t) {
        if (t < 2) {
          signal_[s][t] = signal_for(s)[t];
        } else {
          signal_[s][t] = s == kCenter && t < length_ ? LaneAction::Right
                                                        : LaneAction::Stay;
        }
      }
      // Remaining signaler fuel from step t on.
      signal_fuel_after_[s].assign(cap_ + 1, 0);
      for (int t = cap_ - 1; t >= 0; --t) {
        signal_fuel_after_[s][t] =
            signal_fuel_after_[s][t + 1] + (is_move(signal_[s][t]) ? 1 : 0);
      }
    }
  }

  MemorylessSearchResult run() {
    Node root{ListenerTable(length_), ListenerTable(length_), {}};
    for (int s = 0; s < kNumAgents; ++s) root.sims[s].scenario = s;
    search(std::move(root));
    best_.nodes = nodes_;
    return best_;
  }

 private:
  struct Sim {
    int scenario = 0;
    int t = 0;  // steps executed
    std::array<int, kNumAgents> pos{};
    double ret = 0.0;
    bool done = false;
  };
  struct Node {
    ListenerTable top;
    ListenerTable bottom;
    std::array<Sim, kNumAgents> sims;
  };
  struct Need {
    int listener = 0;  // kTop or kBottom
    int pos = 0;
    int obs = 0;
  };

  ListenerTable& table(Node& n, int lane) { return lane == kTop ? n.top : n.bottom; }

  int center_obs(int scenario, int t) const {
    return t == 0 ? 0 : 1 + static_cast<int>(signal_[scenario][t - 1]);
  }

  static int moved(int p, LaneAction a, int length) {
    if (a == LaneAction::Left) return std::max(p - 1, 0);
    if (a == LaneAction::Right) return std::min(p + 1, length);
    return p;
  }

  // Advances one scenario as far as the partial tables allow.
  std::optional<Need> advance(Node& n, Sim& sim) {
    while (!sim.done) {
      const int o = center_obs(sim.scenario, sim.t);
      std::array<LaneAction, kNumAgents> a{};
      a[kCenter] = signal_[sim.scenario][sim.t];
      for (int lane : {kTop, kBottom}) {
        const auto& e = table(n, lane).at(sim.pos[lane], o);
        if (!e) return Need{lane, sim.pos[lane], o};
        a[lane] = *e;
      }
      sim.ret -= costs_.time_cost;
      for (int i = 0; i < kNumAgents; ++i) {
        sim.pos[i] = moved(sim.pos[i], a[i], length_);
        if (is_move(a[i])) sim.ret -= costs_.fuel_cost;
      }
      ++sim.t;
      if (sim.pos[sim.scenario] == length_) {
        sim.ret += costs_.target_reward;
        sim.done = true;
      } else if (sim.t >= cap_) {
        sim.done = true;
      }
    }
    return std::nullopt;
  }

  // Upper bound on a scenario's final return.
  double optimistic(const Sim& sim) const {
    if (sim.done) return sim.ret;
    const int s = sim.scenario;
    const double tc = costs_.time_cost, fc = costs_.fuel_cost;
    const double timeout =
        sim.ret - (cap_ - sim.t) * tc - fc * signal_fuel_after_[s][sim.t];
    const int need = length_ - sim.pos[s];
    const int arrival = sim.t + need;
    if (arrival > cap_) return timeout;
    double arrive = sim.ret - need * tc + costs_.target_reward -
                    fc * (signal_fuel_after_[s][sim.t] - signal_fuel_after_[s][arrival]);
    if (s != kCenter) arrive -= need * fc;
    return std::max(arrive, timeout);
  }

  void search(Node n) {
    ++nodes_;
    std::optional<Need> need;
    for (auto& sim : n.sims) {
      auto nd = advance(n, sim);
      if (nd && !need) need = nd;
    }
    double bound = 0.0;
    for (const auto& sim : n.sims) bound += optimistic(sim);
    bound /= kNumAgents;
    if (bound <= best_.value) return;
    if (!need) {
      best_.value = bound;  // all scenarios finished: exact value
      best_.top = n.top;
      best_.bottom = n.bottom;
      return;
    }
    for (LaneAction a : {LaneAction::Stay, LaneAction::Right, LaneAction::Left}) {
      // Clamped moves are Stay plus fuel: strictly dominated.
      if (a == LaneAction::Left && need->pos == 0) continue;
      if (a == LaneAction::Right && need->pos == length_) continue;
      Node child = n;
      table(child, need->listener).at(need->pos, need->obs) = a;
      search(std::move(child));
    }
  }

  int length_;
  int cap_;
  CostConfig costs_;
  std::array<std::vector<LaneAction>, kNumAgents> signal_;
  std::array<std::vector<int>, kNumAgents> signal_fuel_after_;
  MemorylessSearchResult best_;
  std::int64_t nodes_ = 0;
};

}  // namespace internal

/// Best expected team return over all memoryless listener tables for both
/// outer lanes, with the center agent running the scripted signaler.
inline MemorylessSearchResult best_memoryless_listeners(int length,
                                                        const CostConfig& costs) {
  if (length < 3) throw std::invalid_argument("best_memoryless_listeners: L < 3");
  return internal::ListenerSearch(length, costs).run();
}

inline std::vector<LanePolicy> memoryless_listener_team(const MemorylessSearchResult& r) {
  return {table_listener(r.top), signaler_policy(), table_listener(r.bottom)};
}

}  // namespace memrl::threelane
