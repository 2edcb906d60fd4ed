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


// Experiment runners behind the command-line tool. Each takes a plain
// parameter struct and writes one CSV table; nothing here touches argv, files
// or the process environment, so the tables can be produced and checked
// in-process.

#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "memrl/colearn.hpp"
#include "memrl/engine.hpp"
#include "memrl/rps/rps.hpp"
#include "memrl/rps/rps_env.hpp"
#include "memrl/speakermover.hpp"
#include "memrl/threelane.hpp"
#include "memrl/traffic.hpp"

namespace memrl::experiments {

/// Fixed-point decimal with a `.` separator regardless of locale. Values
/// that round to zero print unsigned.
inline std::string fixed(double v, int precision = 6) {
  std::array<char, 64> buf{};
  auto [end, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed,
                    precision);
  if (ec != std::errc{}) throw std::runtime_error("fixed: value does not fit");
  std::string s(buf.data(), end);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

struct CommonParams {
  Seed seed = 42;
  std::int64_t episodes = 0;  // 0: the command's own default
  int workers = 0;            // 0: hardware concurrency
};

inline std::int64_t episodes_or(const CommonParams& c, std::int64_t fallback) {
  return c.episodes > 0 ? c.episodes : fallback;
}

// ---------------------------------------------------------------------------
// rps-eval

struct RpsEvalParams {
  CommonParams common;
  int horizon = 100;
  double gamma = 1.0;
  static constexpr std::int64_t kDefaultEpisodes = 10000;
};

struct RpsEvalRow {
  std::string policy;
  EpisodeStats stats;  // per-round reward
};

/// Uniform memoryless play, the counter policy and the known-parameter oracle
/// against opponents redrawn uniformly from the simplex every episode. All
/// three see the same opponent draws.
inline std::vector<RpsEvalRow> run_rps_eval(const RpsEvalParams& p) {
  if (p.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  const auto n = episodes_or(p.common, RpsEvalParams::kDefaultEpisodes);
  const std::vector<std::pair<std::string, rps::RpsPolicy>> policies = {
      {"uniform", rps::make_stationary(rps::ActionDistribution3{})},
      {"counter", rps::make_counter(p.gamma)},
      {"oracle", rps::make_oracle()},
  };
  std::vector<RpsEvalRow> rows;
  for (const auto& [name, policy] : policies) {
    auto returns = evaluate_returns(
        [&] {
          return rps::repeated_rps_env(p.horizon, rps::UniformResampledOpponent{},
                                       /*reveal_opponent=*/true);
        },
        [&] { return std::vector<rps::RpsPolicy>{policy}; }, n, p.common.seed,
        {.workers = p.common.workers});
    for (double& r : returns) r /= p.horizon;
    rows.push_back({name, summarize(returns)});
  }
  return rows;
}

inline void write_rps_eval_csv(const std::vector<RpsEvalRow>& rows, std::ostream& os) {
  os << "policy,mean,std,n,ci95\n";
  for (const auto& r : rows) {
    os << r.policy << ',' << fixed(r.stats.mean) << ',' << fixed(r.stats.std) << ','
       << r.stats.n << ',' << fixed(r.stats.ci95) << '\n';
  }
}

// ---------------------------------------------------------------------------
// rps-colearn

struct ColearnParams {
  double eta = 0.01;
  int steps = 5000;
  int every = 1;  // keep rows with t % every == 0, plus the last one
  rps::Vec3 pi0 = {0.4, 0.3, 0.3};
  rps::Vec3 pi_prime0 = {1.0 / 3, 1.0 / 3, 1.0 / 3};
};

inline colearn::DynamicsTrace run_colearn(const ColearnParams& p) {
  if (p.every < 1) throw std::invalid_argument("every must be >= 1");
  return colearn::run_dynamics(rps::ActionDistribution3(p.pi0),
                               rps::ActionDistribution3(p.pi_prime0), p.eta, p.steps);
}

inline void write_colearn_csv(const colearn::DynamicsTrace& trace, int every,
                              std::ostream& os) {
  os << "t,theta_r,theta_p,theta_s,theta_r',theta_p',theta_s',radius,projected_flag\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& pt = trace[i];
    if (pt.t % every != 0 && i + 1 != trace.size()) continue;
    os << pt.t;
    for (int k = 0; k < 3; ++k) os << ',' << fixed(pt.pi[k], 12);
    for (int k = 0; k < 3; ++k) os << ',' << fixed(pt.pi_prime[k], 12);
    os << ',' << fixed(pt.radius, 12) << ',' << (pt.projected ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// traffic-table

struct TrafficParams {
  CommonParams common;
  static constexpr std::int64_t kDefaultEpisodes = 2000;
};

inline traffic::RewardMatrix run_traffic(const TrafficParams& p) {
  return traffic::run_reward_matrix(episodes_or(p.common, TrafficParams::kDefaultEpisodes),
                                    p.common.seed, p.common.workers);
}

inline void write_traffic_csv(const traffic::RewardMatrix& m, std::ostream& os) {
  os << "policy";
  for (int c = 0; c < traffic::kMatrixColumns; ++c) os << ',' << traffic::column_name(c);
  os << '\n';
  for (std::size_t r = 0; r < m.size(); ++r) {
    os << traffic::to_string(traffic::kAllEgoPolicies[r]);
    for (const auto& cell : m[r]) os << ',' << fixed(cell.mean, 3);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// threelane

struct ThreeLaneParams {
  int length = 8;
  threelane::CostConfig costs;
};

struct ThreeLaneReport {
  threelane::Comparison comparison;
  threelane::MemorylessSearchResult memoryless;
  std::vector<threelane::ComparisonRow> memoryless_rows;
};

/// Naive, behavior-comm and best memoryless-listener teams on each target.
inline ThreeLaneReport run_threelane(const ThreeLaneParams& p) {
  ThreeLaneReport out;
  out.comparison = threelane::compare_policies(p.length, p.costs);
  out.memoryless = threelane::best_memoryless_listeners(p.length, p.costs);
  const auto team = threelane::memoryless_listener_team(out.memoryless);
  for (int target : {threelane::kTop, threelane::kCenter, threelane::kBottom}) {
    out.memoryless_rows.push_back(
        threelane::run_fixed_target(p.length, p.costs, target, team, "memoryless-listener"));
  }
  return out;
}

inline void write_threelane_csv(const ThreeLaneReport& r, std::ostream& os) {
  os << "target_lane,policy,steps,fuel_moves,return\n";
  auto row = [&os](const threelane::ComparisonRow& c) {
    os << threelane::lane_name(c.target_lane) << ',' << c.policy << ',' << c.steps << ','
       << c.fuel_moves << ',' << fixed(c.ret) << '\n';
  };
  for (const auto& c : r.comparison.rows) row(c);
  for (const auto& c : r.memoryless_rows) row(c);
}

// ---------------------------------------------------------------------------
// speakermover-search

struct SpeakerMoverParams {
  std::vector<double> noise = {0.0, 0.1, 0.2, 0.3};
  bool permuted = false;
};

struct DegradationRow {
  double epsilon = 0.0;
  double memoryless_value = 0.0;
  double memoryful_value = 0.0;
};

struct SpeakerMoverReport {
  speakermover::SearchResult search;
  std::vector<DegradationRow> rows;
};

/// Finds an optimal memoryless table at zero noise, then scores it and the
/// optimal history-dependent mover under each noise level. Table entries the
/// zero-noise runs never consult default to a move of 4.
inline SpeakerMoverReport run_speakermover(const SpeakerMoverParams& p) {
  const auto& protocol =
      p.permuted ? speakermover::kPermutedProtocol : speakermover::kStandardProtocol;
  SpeakerMoverReport out;
  out.search = speakermover::search_optimal_table(protocol);
  const auto full = out.search.policy.completed(4);
  for (double eps : p.noise) {
    out.rows.push_back({eps, speakermover::evaluate_table(full, eps, protocol),
                        speakermover::memoryful_reference_value(eps, protocol)});
  }
  return out;
}

inline void write_speakermover_csv(const SpeakerMoverReport& r, std::ostream& os) {
  os << "epsilon,memoryless_value,memoryful_value\n";
  for (const auto& row : r.rows) {
    os << fixed(row.epsilon, 3) << ',' << fixed(row.memoryless_value) << ','
       << fixed(row.memoryful_value) << '\n';
  }
}

}  // namespace memrl::experiments
