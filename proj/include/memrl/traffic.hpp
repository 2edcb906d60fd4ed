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

// Two-lane road with one scripted leading vehicle of a hidden behavior type.
//
// Grid: 2 lanes x 30 cells. The ego starts at (lane 0, cell 0) and the
// opponent at (lane 0, cell 10). Both move simultaneously. A move that puts
// both vehicles on the same (lane, cell), or swaps their positions, is a
// crash: both revert and the ego pays 30 on top of the per-step cost of 1.
// The opponent leaves the road when it moves forward from the last cell.
// The episode ends when the ego reaches the last cell or after 500 steps.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "memrl/engine/episode.hpp"
#include "memrl/engine/evaluate.hpp"
#include "memrl/engine/policy.hpp"
#include "memrl/engine/rng.hpp"

namespace memrl::traffic {

inline constexpr int kRoadLength = 30;
inline constexpr int kGoalCell = kRoadLength - 1;
inline constexpr int kInitialGap = 10;
inline constexpr int kStepLimit = 500;
inline constexpr double kTimePenalty = 1.0;
inline constexpr double kCrashPenalty = 30.0;
inline constexpr int kAdaptiveWarmup = 3;

enum class TrafficAction : int { Forward = 0, LaneChange = 1, Stay = 2 };

enum class BehaviorType : int { PF = 0, PS = 1, AF = 2, AS = 3 };

inline constexpr std::array<BehaviorType, 4> kAllBehaviors = {
    BehaviorType::PF, BehaviorType::PS, BehaviorType::AF, BehaviorType::AS};

/// Marker for a behavior drawn uniformly from the four types per episode.
struct Mix {};
using OpponentSpec = std::variant<BehaviorType, Mix>;

inline std::string_view to_string(BehaviorType b) {
  switch (b) {
    case BehaviorType::PF: return "PF";
    case BehaviorType::PS: return "PS";
    case BehaviorType::AF: return "AF";
    case BehaviorType::AS: return "AS";
  }
  return "?";
}

struct ActionProbs {
  double forward;
  double lane_change;
  double stay;
};

/// Per-type action proportions (forward, lane-change, stay).
constexpr ActionProbs probs(BehaviorType b) {
  switch (b) {
    case BehaviorType::PF: return {0.9, 0.1, 0.0};
    case BehaviorType::PS: return {0.2, 0.1, 0.7};
    case BehaviorType::AF: return {0.3, 0.7, 0.0};
    case BehaviorType::AS: return {0.2, 0.7, 0.1};
  }
  return {0.0, 0.0, 0.0};
}

inline TrafficAction behavior_action(BehaviorType b, Rng& rng) {
  const auto p = probs(b);
  const double u = rng.uniform();
  if (u < p.forward) return TrafficAction::Forward;
  if (u < p.forward + p.lane_change) return TrafficAction::LaneChange;
  return TrafficAction::Stay;
}

struct Position {
  int lane = 0;
  int cell = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

inline Position apply(Position p, TrafficAction a) {
  switch (a) {
    case TrafficAction::Forward: ++p.cell; break;
    case TrafficAction::LaneChange: p.lane = 1 - p.lane; break;
    case TrafficAction::Stay: break;
  }
  return p;
}

/// What the ego sees: the full configuration plus the opponent's realized
/// previous action. The behavior type is not part of it.
struct TrafficView {
  Position ego;
  std::optional<Position> opp;  // empty once the opponent has exited
  int step = 0;
  int crashes = 0;
  std::optional<TrafficAction> opp_last;
};

struct TrafficState {
  TrafficView view;
  BehaviorType behavior = BehaviorType::PF;
};

// ---------------------------------------------------------------------------
// Ego decision rules.

inline int gap_ahead_same_lane(const TrafficView& v) {
  if (!v.opp || v.opp->lane != v.ego.lane) return -1;
  return v.opp->cell - v.ego.cell;
}

/// Pass the opponent when it blocks the next cell; otherwise drive on.
inline TrafficAction greedy_action(const TrafficView& v) {
  return gap_ahead_same_lane(v) == 1 ? TrafficAction::LaneChange
                                     : TrafficAction::Forward;
}

/// Hold back while the opponent is 1 or 2 cells ahead in the ego's lane, or
/// exactly 1 ahead in the other lane (where a lane change would cut into the
/// ego's next cell). Never changes lane.
inline TrafficAction conservative_action(const TrafficView& v) {
  if (!v.opp) return TrafficAction::Forward;
  const int gap = v.opp->cell - v.ego.cell;
  const bool same_lane = v.opp->lane == v.ego.lane;
  const bool hold = same_lane ? (gap == 1 || gap == 2) : gap == 1;
  return hold ? TrafficAction::Stay : TrafficAction::Forward;
}

struct OpponentBelief {
  std::int64_t n_forward = 0;
  std::int64_t n_lane_change = 0;
  std::int64_t n_stay = 0;

  std::int64_t total() const { return n_forward + n_lane_change + n_stay; }
  friend bool operator==(const OpponentBelief&, const OpponentBelief&) = default;
};

inline OpponentBelief update_belief(OpponentBelief b, TrafficAction observed) {
  switch (observed) {
    case TrafficAction::Forward: ++b.n_forward; break;
    case TrafficAction::LaneChange: ++b.n_lane_change; break;
    case TrafficAction::Stay: ++b.n_stay; break;
  }
  return b;
}

/// Multinomial log-likelihood of the counts under a behavior type; -inf when
/// an observed action has probability zero.
inline double log_likelihood(const OpponentBelief& b, BehaviorType type) {
  const auto p = probs(type);
  double ll = 0.0;
  const std::pair<std::int64_t, double> terms[] = {
      {b.n_forward, p.forward}, {b.n_lane_change, p.lane_change}, {b.n_stay, p.stay}};
  for (const auto& [count, prob] : terms) {
    if (count == 0) continue;
    if (prob == 0.0) return -std::numeric_limits<double>::infinity();
    ll += static_cast<double>(count) * std::log(prob);
  }
  return ll;
}

/// Maximum-likelihood type; ties go to the earlier of PF, PS, AF, AS.
/// Likelihoods equal in exact arithmetic (PS and AS on (3, 2, 2), say) can
/// differ in the last bits of their logs, hence the relative slack.
inline BehaviorType mle_classify(const OpponentBelief& b) {
  BehaviorType best = kAllBehaviors[0];
  double best_ll = log_likelihood(b, best);
  for (std::size_t i = 1; i < kAllBehaviors.size(); ++i) {
    const double ll = log_likelihood(b, kAllBehaviors[i]);
    const double slack = 1e-12 * std::max(1.0, std::abs(best_ll));
    if (ll > best_ll + (std::isfinite(best_ll) ? slack : 0.0)) {
      best_ll = ll;
      best = kAllBehaviors[i];
    }
  }
  return best;
}

inline bool is_passive(BehaviorType b) {
  return b == BehaviorType::PF || b == BehaviorType::PS;
}

/// Conservative until kAdaptiveWarmup observations; then greedy against a
/// passive classification and conservative against an aggressive one.
inline TrafficAction adaptive_action(const TrafficView& v, const OpponentBelief& b) {
  if (b.total() < kAdaptiveWarmup) return conservative_action(v);
  return is_passive(mle_classify(b)) ? greedy_action(v) : conservative_action(v);
}

// ---------------------------------------------------------------------------
// Environment.

class TrafficEnv {
 public:
  using Action = TrafficAction;
  using Observation = TrafficView;
  using State = TrafficState;

  explicit TrafficEnv(OpponentSpec opponent, bool opponent_present = true)
      : opponent_(opponent), opponent_present_(opponent_present) {}

  State reset(Seed seed) const {
    State s;
    s.view.ego = {0, 0};
    if (opponent_present_) s.view.opp = Position{0, kInitialGap};
    if (const auto* fixed = std::get_if<BehaviorType>(&opponent_)) {
      s.behavior = *fixed;
    } else {
      Rng reset_rng(derive_seed(seed, kResetStream));
      s.behavior = kAllBehaviors[reset_rng.below(kAllBehaviors.size())];
    }
    return s;
  }

  int agent_count() const { return 1; }
  int step_limit() const { return kStepLimit; }
  bool is_legal(int, TrafficAction a) const {
    const int i = static_cast<int>(a);
    return i >= 0 && i <= 2;
  }
  Observation observation(const State& s, int) const { return s.view; }

  StepResult<State> step(const State& s, std::span<const TrafficAction> joint,
                         Rng& rng) const {
    State next = s;
    auto& v = next.view;
    v.step = s.view.step + 1;
    double reward = -kTimePenalty;

    const Position ego_to = apply(s.view.ego, joint[0]);
    std::optional<Position> opp_to;
    v.opp_last.reset();
    if (s.view.opp) {
      const TrafficAction opp_action = behavior_action(s.behavior, rng);
      v.opp_last = opp_action;
      const Position moved = apply(*s.view.opp, opp_action);
      if (moved.cell <= kGoalCell) opp_to = moved;  // else: exits the road
    }

    const bool crash =
        opp_to && (ego_to == *opp_to ||
                   (ego_to == *s.view.opp && *opp_to == s.view.ego));
    if (crash) {
      ++v.crashes;
      reward -= kCrashPenalty;
      v.ego = s.view.ego;
      v.opp = s.view.opp;
    } else {
      v.ego = ego_to;
      v.opp = opp_to;
    }
    const bool done = v.ego.cell >= kGoalCell || v.step >= kStepLimit;
    return {std::move(next), {reward}, done};
  }

  const OpponentSpec& opponent() const { return opponent_; }

 private:
  OpponentSpec opponent_;
  bool opponent_present_;
};

inline TrafficEnv traffic_env(OpponentSpec opponent) { return TrafficEnv(opponent); }

// ---------------------------------------------------------------------------
// Ego policies.

using TrafficPolicy = PolicyHandle<TrafficView, TrafficAction>;

enum class EgoPolicy : int { Greedy = 0, Conservative = 1, Adaptive = 2 };
inline constexpr std::array<EgoPolicy, 3> kAllEgoPolicies = {
    EgoPolicy::Greedy, EgoPolicy::Conservative, EgoPolicy::Adaptive};

inline std::string_view to_string(EgoPolicy p) {
  switch (p) {
    case EgoPolicy::Greedy: return "greedy";
    case EgoPolicy::Conservative: return "conservative";
    case EgoPolicy::Adaptive: return "adaptive";
  }
  return "?";
}

struct AdaptivePolicy {
  using Memory = OpponentBelief;
  Memory init_memory() const { return {}; }
  std::pair<TrafficAction, Memory> act(const TrafficView& v, const Memory& b,
                                       Rng&) const {
    const Memory next = v.opp_last ? update_belief(b, *v.opp_last) : b;
    return {adaptive_action(v, next), next};
  }
};

inline TrafficPolicy make_ego_policy(EgoPolicy p) {
  switch (p) {
    case EgoPolicy::Greedy:
      return make_memoryless<TrafficView, TrafficAction>(
          [](const TrafficView& v, Rng&) { return greedy_action(v); }, "greedy");
    case EgoPolicy::Conservative:
      return make_memoryless<TrafficView, TrafficAction>(
          [](const TrafficView& v, Rng&) { return conservative_action(v); },
          "conservative");
    case EgoPolicy::Adaptive:
      return TrafficPolicy(AdaptivePolicy{}, "adaptive");
  }
  throw std::invalid_argument("make_ego_policy: unknown policy");
}

// ---------------------------------------------------------------------------
// Reward matrix: rows greedy/conservative/adaptive, columns PF/PS/AF/AS/Mix.

inline constexpr int kMatrixColumns = 5;

inline OpponentSpec column_opponent(int column) {
  if (column < 4) return kAllBehaviors[column];
  return Mix{};
}

inline std::string_view column_name(int column) {
  return column < 4 ? to_string(kAllBehaviors[column]) : std::string_view("Mix");
}

using RewardMatrix = std::array<std::array<EpisodeStats, kMatrixColumns>, 3>;

inline EpisodeStats evaluate_cell(EgoPolicy policy, OpponentSpec opponent,
                                  std::int64_t n_episodes, Seed master_seed,
                                  int workers = 0) {
  const auto handle = make_ego_policy(policy);
  return evaluate([&] { return TrafficEnv(opponent); },
                  [&] { return std::vector<TrafficPolicy>{handle}; }, n_episodes,
                  master_seed, {.workers = workers});
}

/// All cells share the master seed, so each column sees the same sequence of
/// episode seeds (and, for Mix, the same behavior draws) for every policy.
inline RewardMatrix run_reward_matrix(std::int64_t n_episodes, Seed master_seed,
                                      int workers = 0) {
  RewardMatrix m;
  for (std::size_t r = 0; r < kAllEgoPolicies.size(); ++r) {
    for (int c = 0; c < kMatrixColumns; ++c) {
      m[r][c] = evaluate_cell(kAllEgoPolicies[r], column_opponent(c), n_episodes,
                              master_seed, workers);
    }
  }
  return m;
}

}  // namespace memrl::traffic
