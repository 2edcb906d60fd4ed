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


// Acceptance suite: one PASS/FAIL line per criterion, with the tolerances
// and run sizes pinned below. Usage: acceptance <memrl-binary> <work-dir>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memrl/colearn.hpp"
#include "memrl/engine.hpp"
#include "memrl/rps/rps.hpp"
#include "memrl/rps/rps_env.hpp"
#include "memrl/speakermover.hpp"
#include "memrl/threelane.hpp"
#include "memrl/traffic.hpp"

namespace {

using namespace memrl;
namespace fs = std::filesystem;

// Pinned tolerances and sizes.
constexpr double kExactTol = 1e-12;
constexpr double kGradTol = 1e-6;
constexpr double kFdStep = 1e-5;
constexpr int kAnalyticPairs = 1000;
constexpr int kGradPairs = 100;
constexpr int kRpsHorizon = 100;
constexpr std::int64_t kRpsEpisodes = 10000;
constexpr double kCounterOracleGap = 0.05;
constexpr int kColearnSteps = 5000;
constexpr double kColearnEta = 0.01;
constexpr std::int64_t kTrafficPfEpisodes = 1000;
constexpr std::int64_t kTrafficEpisodes = 2000;
constexpr double kPfAnchor = -29.0;
constexpr double kPfTol = 0.5;
constexpr double kGreedyAfCeiling = -300.0;
constexpr double kPsMatchTol = 2.0;
constexpr Seed kSeed = 7;

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string num(double v, int precision = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

double brute_force_value(const rps::Vec3& x, const rps::Vec3& y) {
  static constexpr int kWin[3][3] = {{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}};
  double v = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) v += x[a] * y[b] * kWin[a][b];
  }
  return v;
}

void ac1(Check& c) {
  Rng rng(kSeed);
  double worst_value = 0.0, worst_grad = 0.0, worst_uniform = 0.0;
  for (int i = 0; i < kAnalyticPairs; ++i) {
    const auto x = rps::sample_simplex_uniform(rng);
    const auto y = rps::sample_simplex_uniform(rng);
    worst_value = std::max(worst_value, std::abs(rps::expected_reward(x, y) -
                                                 brute_force_value(x.values(), y.values())));
    worst_uniform = std::max(worst_uniform,
                             std::abs(rps::expected_reward(rps::ActionDistribution3{}, y)));
    if (i >= kGradPairs) continue;
    const auto g = rps::policy_gradients(x, y);
    for (const rps::Vec3 d : {rps::Vec3{1, -1, 0}, rps::Vec3{0, 1, -1}, rps::Vec3{1, 0, -1}}) {
      rps::Vec3 xp = x.values(), xm = x.values(), yp = y.values(), ym = y.values();
      double gx = 0.0, gy = 0.0;
      for (int k = 0; k < 3; ++k) {
        xp[k] += kFdStep * d[k];
        xm[k] -= kFdStep * d[k];
        yp[k] += kFdStep * d[k];
        ym[k] -= kFdStep * d[k];
        gx += g.pi[k] * d[k];
        gy += g.pi_prime[k] * d[k];
      }
      const double fx =
          (brute_force_value(xp, y.values()) - brute_force_value(xm, y.values())) / (2 * kFdStep);
      const double fy =
          (brute_force_value(x.values(), ym) - brute_force_value(x.values(), yp)) / (2 * kFdStep);
      worst_grad = std::max({worst_grad, std::abs(gx - fx), std::abs(gy - fy)});
    }
  }
  c.expect(worst_value <= kExactTol, "expected_reward vs 9-outcome sum");
  c.expect(worst_grad <= kGradTol, "gradients vs finite differences");
  c.expect(worst_uniform <= kExactTol, "uniform policy value 0");
  c.note("max |value err| " + sci(worst_value) + ", max |grad err| " +
         sci(worst_grad) + ", max |uniform value| " + sci(worst_uniform));
}

EpisodeStats per_round(const rps::RpsPolicy& policy, int workers = 0) {
  auto returns = evaluate_returns(
      [] { return rps::repeated_rps_env(kRpsHorizon, rps::UniformResampledOpponent{}, true); },
      [&] { return std::vector<rps::RpsPolicy>{policy}; }, kRpsEpisodes, kSeed,
      {.workers = workers});
  for (double& r : returns) r /= kRpsHorizon;
  return summarize(returns);
}

void ac2(Check& c) {
  for (rps::RpsAction opp : rps::kAllActions) {
    const auto env = rps::repeated_rps_env(kRpsHorizon, rps::ActionDistribution3::pure(opp));
    const std::vector<rps::RpsPolicy> p = {rps::make_counter()};
    const auto ep = run_episode(env, p, kSeed, kRpsHorizon);
    bool all_wins = true;
    for (std::size_t t = 1; t < ep.trajectory.size(); ++t) {
      all_wins = all_wins && ep.trajectory[t].rewards[0] == 1.0;
    }
    c.expect(all_wins, std::string("counter wins every round after the first vs pure ") +
                           std::string(rps::to_string(opp)));
  }
  const auto counter = per_round(rps::make_counter());
  const auto oracle = per_round(rps::make_oracle());
  const double gap = oracle.mean - counter.mean;
  c.expect(std::abs(gap) <= kCounterOracleGap,
           "counter within " + num(kCounterOracleGap, 2) + " of oracle (gap " + num(gap) + ")");
  c.expect(counter.mean - counter.ci95 > 0.0, "counter mean > 0 with ci95 excluding 0");
  c.note("counter " + num(counter.mean) + " +- " + num(counter.ci95) + ", oracle " +
         num(oracle.mean) + " +- " + num(oracle.ci95));
  const std::vector<rps::ActionDistribution3> fixed = {
      rps::ActionDistribution3{}, rps::ActionDistribution3::pure(rps::RpsAction::Rock),
      rps::ActionDistribution3(0.5, 0.3, 0.2)};
  for (const auto& dist : fixed) {
    const auto s = per_round(rps::make_stationary(dist));
    c.expect(std::abs(s.mean) <= s.ci95, "memoryless [" + num(dist[0], 2) + "," +
                                             num(dist[1], 2) + "," + num(dist[2], 2) +
                                             "] within ci95 of 0 (mean " + num(s.mean) + ")");
  }
}

void ac3(Check& c) {
  const rps::ActionDistribution3 uniform;
  const auto fixed = colearn::colearn_step(uniform, uniform, kColearnEta);
  c.expect(fixed.pi == uniform && fixed.pi_prime == uniform, "uniform pair is a fixed point");
  const auto trace = colearn::run_dynamics(rps::ActionDistribution3(0.4, 0.3, 0.3), uniform,
                                           kColearnEta, kColearnSteps);
  double worst = 0.0;
  int unprojected = 0;
  for (std::size_t t = 1; t < trace.size(); ++t) {
    if (trace[t].projected) continue;
    ++unprojected;
    const auto g = rps::policy_gradients(trace[t - 1].pi, trace[t - 1].pi_prime);
    double g2 = 0.0;
    for (int k = 0; k < 3; ++k) g2 += g.pi[k] * g.pi[k] + g.pi_prime[k] * g.pi_prime[k];
    const double growth = colearn::radius_squared(trace[t].pi, trace[t].pi_prime) -
                          colearn::radius_squared(trace[t - 1].pi, trace[t - 1].pi_prime);
    worst = std::max(worst, std::abs(growth - kColearnEta * kColearnEta * g2));
  }
  c.expect(worst <= kExactTol, "radius growth law on unprojected steps");
  c.expect(trace[kColearnSteps].radius > trace[100].radius, "radius(5000) > radius(100)");
  c.note(std::to_string(unprojected) + " unprojected steps, max law error " +
         sci(worst) + ", radius(100) " + num(trace[100].radius, 6) +
         ", radius(5000) " + num(trace[kColearnSteps].radius, 6));
}

void ac4(Check& c) {
  using namespace traffic;
  for (EgoPolicy p : kAllEgoPolicies) {
    const auto s = evaluate_cell(p, BehaviorType::PF, kTrafficPfEpisodes, kSeed);
    c.expect(std::abs(s.mean - kPfAnchor) <= kPfTol,
             std::string(to_string(p)) + "/PF = " + num(s.mean, 3));
  }
  const auto m = run_reward_matrix(kTrafficEpisodes, kSeed);
  const auto& g = m[0][4];
  const auto& k = m[1][4];
  const auto& a = m[2][4];
  c.expect(a.mean - a.ci95 > k.mean + k.ci95, "adaptive > conservative on Mix, ci95 separated");
  c.expect(k.mean - k.ci95 > g.mean + g.ci95, "conservative > greedy on Mix, ci95 separated");
  double worst = 0.0;
  for (const auto& row : m) {
    for (const auto& cell : row) worst = std::min(worst, cell.mean);
  }
  c.expect(worst == m[0][2].mean && m[0][2].mean < kGreedyAfCeiling,
           "greedy/AF is the minimum and below -300");
  c.expect(std::abs(m[2][1].mean - m[0][1].mean) <= kPsMatchTol, "adaptive/PS within 2 of greedy/PS");
  c.note("Mix greedy " + num(g.mean, 2) + " +- " + num(g.ci95, 2) + ", conservative " +
         num(k.mean, 2) + " +- " + num(k.ci95, 2) + ", adaptive " + num(a.mean, 2) + " +- " +
         num(a.ci95, 2) + "; greedy/AF " + num(m[0][2].mean, 1) + "; PS greedy " +
         num(m[0][1].mean, 2) + " adaptive " + num(m[2][1].mean, 2));
}

void ac5(Check& c) {
  using namespace threelane;
  const std::vector<CostConfig> fuel_heavy = {CostConfig{}, CostConfig{0.5, 0.2, 10.0},
                                              CostConfig{2.0, 1.0, 5.0}};
  for (const auto& costs : fuel_heavy) {
    for (int length = 3; length <= 12; ++length) {
      const auto cmp = compare_policies(length, costs);
      c.expect(cmp.comm_expected > cmp.naive_expected,
               "comm > naive at L=" + std::to_string(length) + " fuel " + num(costs.fuel_cost, 2) +
                   " time " + num(costs.time_cost, 2));
    }
  }
  const int default_length = ThreeLaneConfig{}.length;
  const auto cmp = compare_policies(default_length, CostConfig{});
  const auto best = best_memoryless_listeners(default_length, CostConfig{});
  const double advantage = cmp.comm_expected - best.value;
  c.expect(advantage > 0.0, "memoryful listener advantage > 0 at defaults");
  c.note("L=8: naive " + num(cmp.naive_expected) + ", comm " + num(cmp.comm_expected) +
         ", best memoryless " + num(best.value) + ", advantage " + num(advantage));
}

void ac6(Check& c) {
  using namespace speakermover;
  for (const auto* protocol : {&kStandardProtocol, &kPermutedProtocol}) {
    const std::string tag = protocol == &kStandardProtocol ? "standard" : "permuted";
    const auto r = search_optimal_table(*protocol);
    c.expect(r.value == 7.0, tag + ": search value exactly 7 (got " + num(r.value) + ")");
    c.expect(memoryful_reference_value(0.0, *protocol) == r.value,
             tag + ": equals memoryful optimum");
    const auto p2 = positions_after(r.policy, 2, *protocol);
    c.expect(std::set<int>(p2.begin(), p2.end()).size() == 4, tag + ": step-2 positions distinct");
    if (protocol == &kStandardProtocol) {
      const double noisy = evaluate_table(r.policy.completed(4), 0.2, *protocol);
      c.expect(noisy < 7.0, "memoryless value at eps 0.2 < 7");
      c.note("search nodes " + std::to_string(r.nodes) + "; eps 0.2: memoryless " + num(noisy) +
             ", memoryful " + num(memoryful_reference_value(0.2, *protocol)));
    }
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void ac7(Check& c, const std::string& cli, const fs::path& work) {
  fs::create_directories(work);
  const std::vector<std::string> commands = {
      "rps-eval --episodes 2000 --seed 11",
      "rps-colearn --steps 2000 --every 10",
      "traffic-table --episodes 500 --seed 11",
      "threelane",
      "speakermover-search --noise 0,0.1,0.2,0.3",
  };
  int idx = 0;
  for (const auto& cmd : commands) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = work / ("run" + std::to_string(idx) + "_" + std::to_string(rep) + ".csv");
      const std::string line =
          "\"" + cli + "\" " + cmd + " --out \"" + out.string() + "\" 2>/dev/null";
      c.expect(std::system(line.c_str()) == 0, "exit 0: " + cmd);
      outputs[rep] = slurp(out);
    }
    c.expect(!outputs[0].empty() && outputs[0] == outputs[1], "byte-identical rerun: " + cmd);
    ++idx;
  }
  for (const char* cmd : {"rps-eval", "traffic-table"}) {
    std::string outputs[2];
    int rep = 0;
    for (const char* workers : {"1", "8"}) {
      const auto out = work / (std::string(cmd) + "_w" + workers + ".csv");
      const std::string line = "\"" + cli + "\" " + cmd + " --episodes 1000 --workers " +
                               workers + " --out \"" + out.string() + "\" 2>/dev/null";
      c.expect(std::system(line.c_str()) == 0, std::string("exit 0: ") + cmd);
      outputs[rep++] = slurp(out);
    }
    c.expect(outputs[0] == outputs[1], std::string("1 vs 8 workers identical: ") + cmd);
  }
  const auto env = [] { return traffic::TrafficEnv(traffic::Mix{}); };
  const auto pol = [] {
    return std::vector<traffic::TrafficPolicy>{
        traffic::make_ego_policy(traffic::EgoPolicy::Adaptive)};
  };
  const auto serial = evaluate_returns(env, pol, 2000, kSeed, {.workers = 1});
  for (int w : {2, 5, 16}) {
    c.expect(serial == evaluate_returns(env, pol, 2000, kSeed, {.workers = w}),
             "evaluate returns bit-identical with " + std::to_string(w) + " workers");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <memrl-binary> <work-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];

  struct Criterion {
    const char* id;
    const char* title;
    double budget_s;
    std::function<void(Check&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "RPS analytics", 1.0, ac1},
      {"AC2", "counter-policy exploitation", 30.0, ac2},
      {"AC3", "co-learning non-convergence", 1.0, ac3},
      {"AC4", "traffic reward matrix", 60.0, ac4},
      {"AC5", "three-lane communication", 10.0, ac5},
      {"AC6", "bookkeeping", 10.0, ac6},
      {"AC7", "determinism", 120.0, [&](Check& c) { ac7(c, cli, work); }},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    check.expect(secs < cr.budget_s, "runtime " + num(secs, 2) + " s within " +
                                         num(cr.budget_s, 0) + " s");
    std::cout << cr.id << ' ' << (check.ok ? "PASS" : "FAIL") << "  " << cr.title << " ("
              << num(secs, 2) << " s)\n";
    for (const auto& n : check.notes) std::cout << "    " << n << '\n';
    failed += check.ok ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << '\n';
  return failed == 0 ? 0 : 1;
}
