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


#include <gtest/gtest.h>

#include <array>
#include <cstdlib>
#include <vector>

#include "memrl/engine.hpp"
#include "memrl/traffic.hpp"

namespace memrl::traffic {
namespace {

TrafficView view(Position ego, std::optional<Position> opp) {
  TrafficView v;
  v.ego = ego;
  v.opp = opp;
  return v;
}

TEST(Behaviors, TableRowsSumToOne) {
  for (BehaviorType b : kAllBehaviors) {
    const auto p = probs(b);
    EXPECT_DOUBLE_EQ(p.forward + p.lane_change + p.stay, 1.0);
  }
}

TEST(Behaviors, SampledFrequenciesMatchTable) {
  const int n = 100000;
  for (BehaviorType b : kAllBehaviors) {
    Rng rng(17);
    std::array<int, 3> counts{};
    for (int i = 0; i < n; ++i) ++counts[static_cast<int>(behavior_action(b, rng))];
    const auto p = probs(b);
    EXPECT_NEAR(counts[0] / double(n), p.forward, 0.005) << to_string(b);
    EXPECT_NEAR(counts[1] / double(n), p.lane_change, 0.005) << to_string(b);
    EXPECT_NEAR(counts[2] / double(n), p.stay, 0.005) << to_string(b);
    if (p.stay == 0.0) {
      EXPECT_EQ(counts[2], 0) << to_string(b);
    }
  }
}

TEST(Greedy, DecisionRule) {
  EXPECT_EQ(greedy_action(view({0, 3}, Position{0, 8})), TrafficAction::Forward);
  EXPECT_EQ(greedy_action(view({0, 3}, Position{0, 4})), TrafficAction::LaneChange);
  EXPECT_EQ(greedy_action(view({0, 3}, Position{1, 4})), TrafficAction::Forward);
  EXPECT_EQ(greedy_action(view({0, 3}, std::nullopt)), TrafficAction::Forward);
}

TEST(Conservative, DecisionRule) {
  EXPECT_EQ(conservative_action(view({0, 3}, Position{0, 5})), TrafficAction::Stay);
  EXPECT_EQ(conservative_action(view({0, 3}, Position{0, 4})), TrafficAction::Stay);
  EXPECT_EQ(conservative_action(view({0, 3}, Position{1, 5})), TrafficAction::Forward);
  EXPECT_EQ(conservative_action(view({0, 3}, Position{1, 4})), TrafficAction::Stay);
  EXPECT_EQ(conservative_action(view({0, 3}, Position{0, 6})), TrafficAction::Forward);
  EXPECT_EQ(conservative_action(view({0, 3}, std::nullopt)), TrafficAction::Forward);
}

TEST(Belief, MaximumLikelihoodClassification) {
  EXPECT_EQ(mle_classify({9, 1, 0}), BehaviorType::PF);
  EXPECT_EQ(mle_classify({0, 0, 1}), BehaviorType::PS);
  EXPECT_EQ(mle_classify({0, 0, 0}), BehaviorType::PF);
  EXPECT_EQ(mle_classify({1, 5, 0}), BehaviorType::AF);
  EXPECT_EQ(mle_classify({1, 5, 1}), BehaviorType::AS);
  EXPECT_EQ(log_likelihood({0, 0, 1}, BehaviorType::PF),
            -std::numeric_limits<double>::infinity());
}

TEST(Belief, ClassificationAgreesWithExhaustiveLikelihoodOracle) {
  // Oracle: probability mass product over explicit per-observation factors.
  for (int f = 0; f <= 6; ++f) {
    for (int l = 0; l <= 6; ++l) {
      for (int s = 0; s <= 6; ++s) {
        double best = -1.0;
        BehaviorType arg = BehaviorType::PF;
        for (BehaviorType b : kAllBehaviors) {
          const auto p = probs(b);
          double like = 1.0;
          for (int i = 0; i < f; ++i) like *= p.forward;
          for (int i = 0; i < l; ++i) like *= p.lane_change;
          for (int i = 0; i < s; ++i) like *= p.stay;
          if (like > best * (1 + 1e-12)) {
            best = like;
            arg = b;
          }
        }
        ASSERT_EQ(mle_classify({f, l, s}), arg) << f << ',' << l << ',' << s;
      }
    }
  }
}

TEST(Belief, IncrementsOneCountPerObservation) {
  OpponentBelief b;
  b = update_belief(b, TrafficAction::Stay);
  b = update_belief(b, TrafficAction::Forward);
  b = update_belief(b, TrafficAction::Stay);
  EXPECT_EQ(b, (OpponentBelief{1, 0, 2}));
}

TEST(Adaptive, BranchesOnClassification) {
  const OpponentBelief passive_slow{0, 0, 3};
  const OpponentBelief aggressive{0, 3, 0};
  EXPECT_EQ(adaptive_action(view({0, 3}, Position{0, 4}), passive_slow),
            TrafficAction::LaneChange);
  EXPECT_EQ(adaptive_action(view({0, 3}, Position{0, 5}), aggressive), TrafficAction::Stay);
  // Warm-up: conservative even when the counts look passive.
  EXPECT_EQ(adaptive_action(view({0, 3}, Position{0, 4}), OpponentBelief{0, 0, 2}),
            TrafficAction::Stay);
}

TEST(Env, InitialConfiguration) {
  const TrafficEnv env(BehaviorType::AS);
  const auto s = env.reset(3);
  EXPECT_EQ(s.view.ego, (Position{0, 0}));
  EXPECT_EQ(s.view.opp, (Position{0, 10}));
  EXPECT_EQ(s.view.step, 0);
  EXPECT_EQ(s.behavior, BehaviorType::AS);
}

TEST(Env, MixDrawsEachTypeAboutEquallyOften) {
  const TrafficEnv env(Mix{});
  std::array<int, 4> counts{};
  for (std::uint64_t i = 0; i < 8000; ++i) {
    ++counts[static_cast<int>(env.reset(derive_seed(1, i)).behavior)];
  }
  for (int c : counts) EXPECT_NEAR(c / 8000.0, 0.25, 0.02);
}

TEST(Env, EmptyRoadTakesTwentyNineSteps) {
  const TrafficEnv env(BehaviorType::PF, /*opponent_present=*/false);
  const std::vector<TrafficPolicy> p = {make_ego_policy(EgoPolicy::Greedy)};
  const auto ep = run_episode(env, p, 0, 500);
  EXPECT_EQ(ep.steps, 29);
  EXPECT_EQ(ep.returns[0], -29.0);
}

// Steps from `s` until the opponent realizes `wanted`; returns that result.
StepResult<TrafficState> step_until(const TrafficEnv& env, const TrafficState& s,
                                    TrafficAction ego, TrafficAction wanted) {
  for (Seed seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const std::array<TrafficAction, 1> joint = {ego};
    auto r = env.step(s, joint, rng);
    if (r.next.view.opp_last == wanted) return r;
  }
  throw std::runtime_error("opponent action never realized");
}

TEST(Env, CutInIsACrashAndBothRevert) {
  const TrafficEnv env(BehaviorType::AF);
  auto s = env.reset(0);
  s.view.ego = {0, 4};
  s.view.opp = Position{1, 5};
  const auto r = step_until(env, s, TrafficAction::Forward, TrafficAction::LaneChange);
  EXPECT_EQ(r.rewards[0], -31.0);
  EXPECT_EQ(r.next.view.ego, (Position{0, 4}));
  EXPECT_EQ(r.next.view.opp, (Position{1, 5}));
  EXPECT_EQ(r.next.view.crashes, 1);
  EXPECT_FALSE(r.done);
  const auto ok = step_until(env, s, TrafficAction::Forward, TrafficAction::Forward);
  EXPECT_EQ(ok.rewards[0], -1.0);
  EXPECT_EQ(ok.next.view.ego, (Position{0, 5}));
}

TEST(Env, SideBySideSwapIsACrash) {
  const TrafficEnv env(BehaviorType::AS);
  auto s = env.reset(0);
  s.view.ego = {0, 7};
  s.view.opp = Position{1, 7};
  const auto r = step_until(env, s, TrafficAction::LaneChange, TrafficAction::LaneChange);
  EXPECT_EQ(r.rewards[0], -31.0);
  EXPECT_EQ(r.next.view.ego, (Position{0, 7}));
}

TEST(Env, OpponentExitsFromLastCell) {
  const TrafficEnv env(BehaviorType::PF);
  auto s = env.reset(0);
  s.view.ego = {0, 20};
  s.view.opp = Position{0, kGoalCell};
  const auto r = step_until(env, s, TrafficAction::Forward, TrafficAction::Forward);
  EXPECT_FALSE(r.next.view.opp.has_value());
}

TEST(Env, ReplayInvariants) {
  // Independent replay: returns decompose into steps and crashes, vehicles
  // move one unit at a time, and an exited opponent never comes back.
  for (auto spec : {OpponentSpec{BehaviorType::AF}, OpponentSpec{BehaviorType::PS},
                    OpponentSpec{Mix{}}}) {
    const TrafficEnv env(spec);
    for (EgoPolicy ego : kAllEgoPolicies) {
      const auto policy = make_ego_policy(ego);
      for (std::uint64_t e = 0; e < 60; ++e) {
        const Seed seed = derive_seed(21, e);
        Rng rng(seed);
        auto s = env.reset(seed);
        auto mem = policy.init_memory();
        double ret = 0.0;
        int steps = 0;
        bool exited = false;
        for (bool done = false; !done;) {
          auto [a, next_mem] = policy.act(env.observation(s, 0), mem, rng);
          mem = std::move(next_mem);
          const std::array<TrafficAction, 1> joint = {a};
          auto r = env.step(s, joint, rng);
          const auto& n = r.next.view;
          const auto moved = [](Position from, Position to) {
            return std::abs(to.cell - from.cell) + std::abs(to.lane - from.lane);
          };
          ASSERT_LE(moved(s.view.ego, n.ego), 1);
          ASSERT_LE(n.ego.cell, kGoalCell);
          if (n.opp) {
            ASSERT_FALSE(exited);
            ASSERT_LE(moved(*s.view.opp, *n.opp), 1);
            ASSERT_FALSE(*n.opp == n.ego);
          } else {
            exited = true;
          }
          if (exited) {
            ASSERT_EQ(n.crashes, s.view.crashes);
          }
          ret += r.rewards[0];
          ++steps;
          done = r.done;
          s = std::move(r.next);
        }
        ASSERT_EQ(ret, -steps - kCrashPenalty * s.view.crashes);
        ASSERT_LE(steps, kStepLimit);
      }
    }
  }
}

TEST(Matrix, PassiveFastColumnIsMinus29ForEveryPolicy) {
  for (EgoPolicy p : kAllEgoPolicies) {
    EXPECT_NEAR(evaluate_cell(p, BehaviorType::PF, 1000, 8).mean, -29.0, 0.5)
        << to_string(p);
  }
}

TEST(Matrix, GreedyAgainstAggressiveFastIsTheWorstCell) {
  const auto m = run_reward_matrix(300, 5);
  double worst = 0.0;
  for (const auto& row : m) {
    for (const auto& cell : row) worst = std::min(worst, cell.mean);
  }
  EXPECT_EQ(worst, m[0][2].mean);
  EXPECT_LT(m[0][2].mean, -300.0);
}

}  // namespace
}  // namespace memrl::traffic
