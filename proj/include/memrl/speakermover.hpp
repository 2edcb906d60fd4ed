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

// One-dimensional speaker/mover game.
//
// The mover starts at 0 on cells 0..14 and must stop on the hidden target in
// 11..14. A scripted speaker sends one token per step: the two-token message
// of the target, then Null. Each step the mover picks a move of 0..5 cells;
// with probability noise_eps the displacement is perturbed by +-1 (clamped to
// the road). Reaching any of 11..14 ends the episode, paying 10 only on the
// right target. Every step costs 1; episodes are capped at 20 steps.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "memrl/engine/episode.hpp"
#include "memrl/engine/policy.hpp"
#include "memrl/engine/rng.hpp"

namespace memrl::speakermover {

enum class Token : int { A = 0, B = 1, Null = 2 };

inline constexpr int kFirstTarget = 11;
inline constexpr int kNumTargets = 4;
inline constexpr int kLastCell = 14;
inline constexpr int kPolicyCells = 11;  // positions 0..10 are non-terminal
inline constexpr int kMaxMove = 5;
inline constexpr int kStepCap = 20;
inline constexpr double kTargetReward = 10.0;
inline constexpr double kStepCost = 1.0;

inline std::string_view to_string(Token t) {
  switch (t) {
    case Token::A: return "A";
    case Token::B: return "B";
    case Token::Null: return "null";
  }
  return "?";
}

inline Token parse_token(std::string_view s) {
  if (s == "A") return Token::A;
  if (s == "B") return Token::B;
  if (s == "null") return Token::Null;
  throw std::invalid_argument("unknown token '" + std::string(s) + "'");
}

inline bool is_target(int pos) { return pos >= kFirstTarget && pos <= kLastCell; }

/// Two-token message per target, indexed by target - 11.
using Protocol = std::array<std::array<Token, 2>, kNumTargets>;

inline constexpr Protocol kStandardProtocol = {{{Token::A, Token::A},
                                                {Token::A, Token::B},
                                                {Token::B, Token::A},
                                                {Token::B, Token::B}}};

/// Same messages assigned to targets in reverse order.
inline constexpr Protocol kPermutedProtocol = {{{Token::B, Token::B},
                                                {Token::B, Token::A},
                                                {Token::A, Token::B},
                                                {Token::A, Token::A}}};

inline void check_target(int target) {
  if (!is_target(target)) {
    throw std::out_of_range("target " + std::to_string(target) + " not in 11..14");
  }
}

/// Token emitted at 0-based step `step` for `target`.
inline Token token_at(const Protocol& protocol, int target, int step) {
  check_target(target);
  return step < 2 ? protocol[target - kFirstTarget][step] : Token::Null;
}

/// The first three tokens of the speaker's sequence; Null thereafter.
inline std::array<Token, 3> speaker_protocol(int target,
                                             const Protocol& protocol = kStandardProtocol) {
  return {token_at(protocol, target, 0), token_at(protocol, target, 1), Token::Null};
}

inline bool is_injective(const Protocol& protocol) {
  for (int i = 0; i < kNumTargets; ++i) {
    for (int j = i + 1; j < kNumTargets; ++j) {
      if (protocol[i] == protocol[j]) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Memoryless mover tables.

class MoverPolicyTable {
 public:
  std::optional<int> get(int pos, Token t) const {
    check_cell(pos);
    return entries_[pos][static_cast<int>(t)];
  }

  void set(int pos, Token t, int move) {
    check_cell(pos);
    if (move < 0 || move > kMaxMove) {
      throw std::invalid_argument("move " + std::to_string(move) + " not in 0..5");
    }
    entries_[pos][static_cast<int>(t)] = move;
  }

  void clear(int pos, Token t) {
    check_cell(pos);
    entries_[pos][static_cast<int>(t)].reset();
  }

  /// Copy with every unset entry filled with `move`.
  MoverPolicyTable completed(int move) const {
    MoverPolicyTable out = *this;
    for (int p = 0; p < kPolicyCells; ++p) {
      for (Token t : {Token::A, Token::B, Token::Null}) {
        if (!out.get(p, t)) out.set(p, t, move);
      }
    }
    return out;
  }

  int size() const {
    int n = 0;
    for (const auto& row : entries_) {
      for (const auto& e : row) n += e ? 1 : 0;
    }
    return n;
  }

  /// One line per set entry: `position token move`.
  void write(std::ostream& os) const {
    for (int p = 0; p < kPolicyCells; ++p) {
      for (Token t : {Token::A, Token::B, Token::Null}) {
        if (auto m = get(p, t)) os << p << ' ' << to_string(t) << ' ' << *m << '\n';
      }
    }
  }

  static MoverPolicyTable read(std::istream& is) {
    MoverPolicyTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ls(line);
      int pos = 0, move = 0;
      std::string token;
      std::string extra;
      if (!(ls >> pos >> token >> move) || (ls >> extra)) {
        throw std::invalid_argument("policy line " + std::to_string(line_no) +
                                    ": expected `position token move`");
      }
      table.set(pos, parse_token(token), move);
    }
    return table;
  }

  friend bool operator==(const MoverPolicyTable&, const MoverPolicyTable&) = default;

 private:
  static void check_cell(int pos) {
    if (pos < 0 || pos >= kPolicyCells) {
      throw std::out_of_range("policy position " + std::to_string(pos) +
                              " not in 0..10");
    }
  }

  std::array<std::array<std::optional<int>, 3>, kPolicyCells> entries_{};
};

/// The bookkeeping policy: A/B from 0 go to 4/5, then to 7/8 from 4 and 9/10
/// from 5, then a constant 4 to the targets. Unlisted entries move 4.
inline MoverPolicyTable bookkeeping_table() {
  MoverPolicyTable t;
  t.set(0, Token::A, 4);
  t.set(0, Token::B, 5);
  t.set(4, Token::A, 3);
  t.set(4, Token::B, 4);
  t.set(5, Token::A, 4);
  t.set(5, Token::B, 5);
  for (int p = 7; p <= 10; ++p) t.set(p, Token::Null, 4);
  return t.completed(4);
}

inline MoverPolicyTable constant_table(int move) {
  return MoverPolicyTable{}.completed(move);
}

// ---------------------------------------------------------------------------
// Transition model shared by the environment and the exact evaluators.

struct Outcome {
  int pos;
  double prob;
};

/// Resulting positions of `move` from `pos` and their probabilities.
inline std::vector<Outcome> transitions(int pos, int move, double noise_eps) {
  auto land = [pos](int d) { return std::clamp(pos + d, 0, kLastCell); };
  if (noise_eps == 0.0) return {{land(move), 1.0}};
  std::vector<Outcome> out;
  auto add = [&out](int p, double pr) {
    for (auto& o : out) {
      if (o.pos == p) {
        o.prob += pr;
        return;
      }
    }
    out.push_back({p, pr});
  };
  add(land(move), 1.0 - noise_eps);
  add(land(move - 1), noise_eps / 2);
  add(land(move + 1), noise_eps / 2);
  return out;
}

inline void check_noise(double noise_eps) {
  if (!(noise_eps >= 0.0 && noise_eps < 1.0)) {
    throw std::invalid_argument("noise_eps must be in [0, 1)");
  }
}

// ---------------------------------------------------------------------------
// Environment (single controlled agent: the mover).

struct MoverObservation {
  int pos = 0;
  Token token = Token::Null;
};

struct SpeakerMoverState {
  int mover_pos = 0;
  int target = kFirstTarget;
  int step = 0;
};

class SpeakerMoverEnv {
 public:
  using Action = int;
  using Observation = MoverObservation;
  using State = SpeakerMoverState;

  SpeakerMoverEnv(double noise_eps, Protocol protocol = kStandardProtocol,
                  std::optional<int> fixed_target = std::nullopt)
      : noise_(noise_eps), protocol_(protocol), fixed_target_(fixed_target) {
    check_noise(noise_eps);
    if (fixed_target) check_target(*fixed_target);
  }

  State reset(Seed seed) const {
    State s;
    if (fixed_target_) {
      s.target = *fixed_target_;
    } else {
      Rng reset_rng(derive_seed(seed, kResetStream));
      s.target = kFirstTarget + static_cast<int>(reset_rng.below(kNumTargets));
    }
    return s;
  }

  int agent_count() const { return 1; }
  int step_limit() const { return kStepCap; }
  bool is_legal(int, int move) const { return move >= 0 && move <= kMaxMove; }

  Observation observation(const State& s, int) const {
    return {s.mover_pos, token_at(protocol_, s.target, s.step)};
  }

  StepResult<State> step(const State& s, std::span<const int> joint, Rng& rng) const {
    const int move = joint[0];
    if (!is_legal(0, move)) throw EpisodeFault("mover move out of 0..5", 0, s.step);
    int d = move;
    if (noise_ > 0.0 && rng.bernoulli(noise_)) d += rng.bernoulli(0.5) ? 1 : -1;
    State next = s;
    next.mover_pos = std::clamp(s.mover_pos + d, 0, kLastCell);
    next.step = s.step + 1;
    double reward = -kStepCost;
    bool done = next.step >= kStepCap;
    if (is_target(next.mover_pos)) {
      done = true;
      if (next.mover_pos == s.target) reward += kTargetReward;
    }
    return {next, {reward}, done};
  }

 private:
  double noise_;
  Protocol protocol_;
  std::optional<int> fixed_target_;
};

inline SpeakerMoverEnv speakermover_env(double noise_eps,
                                        const Protocol& protocol = kStandardProtocol) {
  return SpeakerMoverEnv(noise_eps, protocol);
}

using MoverPolicy = PolicyHandle<MoverObservation, int>;

inline MoverPolicy table_policy(MoverPolicyTable table) {
  return make_memoryless<MoverObservation, int>(
      [table = std::move(table)](const MoverObservation& obs, Rng&) {
        const auto m = table.get(obs.pos, obs.token);
        if (!m) {
          throw std::out_of_range("mover table has no entry for position " +
                                  std::to_string(obs.pos) + ", token " +
                                  std::string(to_string(obs.token)));
        }
        return *m;
      },
      "mover-table");
}

// ---------------------------------------------------------------------------
// Exact evaluation of a memoryless table.

/// Expected return, uniform over the four targets, by dynamic programming over
/// (target, step, position). Only reachable entries are consulted; a missing
/// reachable entry throws std::out_of_range.
inline double evaluate_table(const MoverPolicyTable& table, double noise_eps,
                             const Protocol& protocol = kStandardProtocol) {
  check_noise(noise_eps);
  double total = 0.0;
  for (int target = kFirstTarget; target <= kLastCell; ++target) {
    std::map<std::pair<int, int>, double> memo;  // (step, pos) -> value
    auto value = [&](auto&& self, int step, int pos) -> double {
      if (step >= kStepCap) return 0.0;
      if (auto it = memo.find({step, pos}); it != memo.end()) return it->second;
      const Token tok = token_at(protocol, target, step);
      const auto move = table.get(pos, tok);
      if (!move) {
        throw std::out_of_range("evaluate_table: missing entry (" + std::to_string(pos) +
                                ", " + std::string(to_string(tok)) + ")");
      }
      double v = -kStepCost;
      for (const auto& o : transitions(pos, *move, noise_eps)) {
        if (is_target(o.pos)) {
          v += o.prob * (o.pos == target ? kTargetReward : 0.0);
        } else {
          v += o.prob * self(self, step + 1, o.pos);
        }
      }
      memo[{step, pos}] = v;
      return v;
    };
    total += value(value, 0, 0);
  }
  return total / kNumTargets;
}

// ---------------------------------------------------------------------------
// Optimal history-dependent mover (reference).

/// Value of the best mover that conditions on its position, the step and the
/// full token history, by exact dynamic programming. `step_cap` defaults to
/// the environment's cap.
inline double memoryful_reference_value(double noise_eps,
                                        const Protocol& protocol = kStandardProtocol,
                                        int step_cap = kStepCap) {
  check_noise(noise_eps);
  // Belief state: bitmask of targets consistent with the tokens so far.
  auto consistent = [&](unsigned mask, int step, Token tok) {
    unsigned out = 0;
    for (int i = 0; i < kNumTargets; ++i) {
      if ((mask >> i & 1u) && token_at(protocol, kFirstTarget + i, step) == tok) {
        out |= 1u << i;
      }
    }
    return out;
  };
  std::map<std::tuple<int, int, unsigned>, double> memo;
  // W(step, pos, mask): expected return from deciding at `step`, with the
  // step's token already folded into `mask`.
  auto value = [&](auto&& self, int step, int pos, unsigned mask) -> double {
    if (step >= step_cap) return 0.0;
    const auto key = std::make_tuple(step, pos, mask);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const int n = std::popcount(mask);
    double best = -std::numeric_limits<double>::infinity();
    for (int move = 0; move <= kMaxMove; ++move) {
      double q = -kStepCost;
      for (const auto& o : transitions(pos, move, noise_eps)) {
        for (int i = 0; i < kNumTargets; ++i) {
          if (!(mask >> i & 1u)) continue;
          const int target = kFirstTarget + i;
          double v;
          if (is_target(o.pos)) {
            v = o.pos == target ? kTargetReward : 0.0;
          } else {
            const Token next_tok = token_at(protocol, target, step + 1);
            v = self(self, step + 1, o.pos, consistent(mask, step + 1, next_tok));
          }
          q += o.prob * v / n;
        }
      }
      best = std::max(best, q);
    }
    memo[key] = best;
    return best;
  };
  double total = 0.0;
  for (int i = 0; i < kNumTargets; ++i) {
    const Token first = token_at(protocol, kFirstTarget + i, 0);
    total += value(value, 0, 0, consistent(0xFu, 0, first));
  }
  return total / kNumTargets;
}

// ---------------------------------------------------------------------------
// Exact search for an optimal memoryless table at zero noise.

struct SearchResult {
  MoverPolicyTable policy;  // only the entries some target's run consults
  double value = -std::numeric_limits<double>::infinity();
  std::int64_t nodes = 0;
};

namespace internal {

class TableSearch {
 public:
  explicit TableSearch(const Protocol& protocol) : protocol_(protocol) {}

  SearchResult run() {
    Node root;
    search(root, 0);
    result_.nodes = nodes_;
    return result_;
  }

 private:
  struct Lane {
    int pos = 0;
    double ret = 0.0;
    bool done = false;
  };
  struct Node {
    MoverPolicyTable table;
    std::array<Lane, kNumTargets> lanes{};
  };

  // Largest achievable final return of one target's run.
  static double optimistic(const Lane& lane, int target, int step) {
    if (lane.done) return lane.ret;
    const double timeout = lane.ret - (kStepCap - step) * kStepCost;
    const int need = (target - lane.pos + kMaxMove - 1) / kMaxMove;
    if (step + need > kStepCap) return timeout;
    return std::max(timeout, lane.ret - need * kStepCost + kTargetReward);
  }

  double bound(const Node& n, int step) const {
    double b = 0.0;
    for (int i = 0; i < kNumTargets; ++i) b += optimistic(n.lanes[i], kFirstTarget + i, step);
    return b / kNumTargets;
  }

  // All targets advance in lockstep; `step` is the number of steps taken.
  void search(Node& n, int step) {
    ++nodes_;
    if (bound(n, step) <= result_.value) return;
    bool all_done = true;
    for (const auto& lane : n.lanes) all_done = all_done && lane.done;
    if (all_done || step >= kStepCap) {
      result_.value = bound(n, step);
      result_.policy = n.table;
      return;
    }
    // First target whose next decision is not yet in the table.
    for (int i = 0; i < kNumTargets; ++i) {
      const auto& lane = n.lanes[i];
      if (lane.done) continue;
      const Token tok = token_at(protocol_, kFirstTarget + i, step);
      if (!n.table.get(lane.pos, tok)) {
        for (int move = kMaxMove; move >= 0; --move) {
          Node child = n;
          child.table.set(lane.pos, tok, move);
          search(child, step);
        }
        return;
      }
    }
    Node next = n;
    for (int i = 0; i < kNumTargets; ++i) {
      auto& lane = next.lanes[i];
      if (lane.done) continue;
      const int target = kFirstTarget + i;
      const int move = *n.table.get(lane.pos, token_at(protocol_, target, step));
      lane.pos = std::clamp(lane.pos + move, 0, kLastCell);
      lane.ret -= kStepCost;
      if (is_target(lane.pos)) {
        lane.done = true;
        if (lane.pos == target) lane.ret += kTargetReward;
      } else if (step + 1 >= kStepCap) {
        lane.done = true;
      }
    }
    search(next, step + 1);
  }

  Protocol protocol_;
  SearchResult result_;
  std::int64_t nodes_ = 0;
};

}  // namespace internal

/// Depth-first branch and bound over lazily instantiated table entries, all
/// four targets simulated in lockstep with zero noise.
inline SearchResult search_optimal_table(const Protocol& protocol = kStandardProtocol) {
  return internal::TableSearch(protocol).run();
}

/// Positions after two steps of a table's run for each target (zero noise).
inline std::array<int, kNumTargets> positions_after(const MoverPolicyTable& table,
                                                    int steps,
                                                    const Protocol& protocol = kStandardProtocol) {
  std::array<int, kNumTargets> out{};
  for (int i = 0; i < kNumTargets; ++i) {
    int pos = 0;
    for (int s = 0; s < steps && !is_target(pos); ++s) {
      const auto m = table.get(pos, token_at(protocol, kFirstTarget + i, s));
      if (!m) throw std::out_of_range("positions_after: missing entry");
      pos = std::clamp(pos + *m, 0, kLastCell);
    }
    out[i] = pos;
  }
  return out;
}

}  // namespace memrl::speakermover
