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


// Command-line front end. `run` is the whole program minus process setup, so
// tests can drive it with in-memory streams.
//
// Configuration files are flat `key = value` lines; `#` starts a comment.
// Keys are the long flag names of the chosen subcommand. Values from the file
// fill only flags that were not given on the command line, so precedence is
// defaults < file < flags. Unknown or repeated keys are errors.

#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "memrl/experiments.hpp"

namespace memrl::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<ConfigEntry> parse_flat_config(std::istream& is) {
  std::vector<ConfigEntry> entries;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line) + ": expected `key = value`");
    }
    ConfigEntry e{trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line};
    if (e.key.empty() || e.value.empty()) {
      throw ConfigError("config line " + std::to_string(line) + ": empty key or value");
    }
    if (!seen.insert(e.key).second) {
      throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" +
                        e.key + "'");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

/// Feeds config entries to the options of `sub` that the command line left
/// unset. Runs CLI11's own conversion and validators on each value.
inline void apply_config(CLI::App& sub, const std::vector<ConfigEntry>& entries) {
  for (const auto& e : entries) {
    CLI::Option* opt = e.key == "config" ? nullptr : sub.get_option_no_throw("--" + e.key);
    if (opt == nullptr) {
      throw ConfigError("config line " + std::to_string(e.line) + ": unknown key '" +
                        e.key + "' for " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(e.value);
    opt->run_callback();
  }
}

namespace internal {

struct Sink {
  std::string out_path;
  std::string config_path;
};

inline void add_common(CLI::App& sub, experiments::CommonParams& common, Sink& sink) {
  sub.add_option("--seed", common.seed, "Master seed")->capture_default_str();
  sub.add_option("--episodes", common.episodes, "Episodes per evaluation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub.add_option("--workers", common.workers, "Worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub.add_option("--out", sink.out_path, "Output file (default: stdout)");
  sub.add_option("--config", sink.config_path, "Flat key = value config file");
}

inline void emit(const std::string& data, const Sink& sink, std::ostream& out) {
  if (sink.out_path.empty()) {
    out << data;
    out.flush();
    return;
  }
  std::ofstream f(sink.out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + sink.out_path + "' for writing");
  f << data;
  if (!f.flush()) throw std::runtime_error("write to '" + sink.out_path + "' failed");
}

}  // namespace internal

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Memoryful vs memoryless multi-agent policy experiments", "memrl"};
  app.require_subcommand(1);

  internal::Sink sink;
  experiments::CommonParams common;
  std::function<void(std::ostringstream&)> job;

  // rps-eval
  experiments::RpsEvalParams rps_p;
  auto* rps_eval = app.add_subcommand("rps-eval", "Repeated RPS against resampled opponents");
  common.episodes = experiments::RpsEvalParams::kDefaultEpisodes;
  experiments::CommonParams rps_common = common;
  internal::add_common(*rps_eval, rps_common, sink);
  rps_eval->add_option("--horizon", rps_p.horizon, "Rounds per episode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rps_eval->add_option("--gamma", rps_p.gamma, "Counter policy discount")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  rps_eval->callback([&] {
    job = [&](std::ostringstream& os) {
      rps_p.common = rps_common;
      const auto rows = experiments::run_rps_eval(rps_p);
      experiments::write_rps_eval_csv(rows, os);
      for (const auto& r : rows) {
        err << "rps-eval " << r.policy << ": " << experiments::fixed(r.stats.mean, 4)
            << " +- " << experiments::fixed(r.stats.ci95, 4) << " per round\n";
      }
    };
  });

  // rps-colearn
  experiments::ColearnParams co_p;
  experiments::CommonParams co_common = common;
  auto* colearn = app.add_subcommand("rps-colearn", "Co-learning gradient dynamics trace");
  internal::add_common(*colearn, co_common, sink);
  colearn->add_option("--eta", co_p.eta, "Step size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  colearn->add_option("--steps", co_p.steps, "Gradient steps")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  colearn->add_option("--every", co_p.every, "Row stride")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  colearn->add_option("--pi", co_p.pi0, "Initial agent policy r,p,s")
      ->delimiter(',')
      ->expected(3);
  colearn->add_option("--pi-prime", co_p.pi_prime0, "Initial opponent policy r,p,s")
      ->delimiter(',')
      ->expected(3);
  colearn->callback([&] {
    job = [&](std::ostringstream& os) {
      const auto trace = experiments::run_colearn(co_p);
      experiments::write_colearn_csv(trace, co_p.every, os);
      err << "rps-colearn radius " << experiments::fixed(trace.front().radius, 6) << " -> "
          << experiments::fixed(trace.back().radius, 6) << '\n';
    };
  });

  // traffic-table
  experiments::TrafficParams tr_p;
  experiments::CommonParams tr_common = common;
  tr_common.episodes = experiments::TrafficParams::kDefaultEpisodes;
  auto* traffic_cmd = app.add_subcommand("traffic-table", "Ego policy x opponent reward matrix");
  internal::add_common(*traffic_cmd, tr_common, sink);
  traffic_cmd->callback([&] {
    job = [&](std::ostringstream& os) {
      tr_p.common = tr_common;
      const auto m = experiments::run_traffic(tr_p);
      experiments::write_traffic_csv(m, os);
      for (std::size_t r = 0; r < m.size(); ++r) {
        err << "traffic " << traffic::to_string(traffic::kAllEgoPolicies[r]) << " Mix "
            << experiments::fixed(m[r][4].mean, 2) << " +- "
            << experiments::fixed(m[r][4].ci95, 2) << '\n';
      }
    };
  });

  // threelane
  experiments::ThreeLaneParams tl_p;
  experiments::CommonParams tl_common = common;
  auto* lanes = app.add_subcommand("threelane", "Behavior-based communication comparison");
  internal::add_common(*lanes, tl_common, sink);
  lanes->add_option("--length", tl_p.length, "Lane length L")
      ->check(CLI::Range(3, 1000))
      ->capture_default_str();
  lanes->add_option("--fuel-cost", tl_p.costs.fuel_cost, "Cost per agent move")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  lanes->add_option("--time-cost", tl_p.costs.time_cost, "Cost per time step")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  lanes->add_option("--reward", tl_p.costs.target_reward, "Reward at the target")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  lanes->callback([&] {
    job = [&](std::ostringstream& os) {
      const auto r = experiments::run_threelane(tl_p);
      experiments::write_threelane_csv(r, os);
      err << "threelane expected naive " << experiments::fixed(r.comparison.naive_expected, 4)
          << ", behavior-comm " << experiments::fixed(r.comparison.comm_expected, 4)
          << ", best memoryless listener " << experiments::fixed(r.memoryless.value, 4)
          << '\n';
    };
  });

  // speakermover-search
  experiments::SpeakerMoverParams sm_p;
  experiments::CommonParams sm_common = common;
  std::string policy_out;
  auto* mover = app.add_subcommand("speakermover-search",
                                   "Optimal memoryless mover table and noise degradation");
  internal::add_common(*mover, sm_common, sink);
  mover->add_option("--noise", sm_p.noise, "Noise levels in [0, 1)")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  mover->add_flag("--permuted", sm_p.permuted, "Use the reversed message assignment");
  mover->add_option("--policy-out", policy_out, "Write the found table here");
  mover->callback([&] {
    job = [&](std::ostringstream& os) {
      const auto r = experiments::run_speakermover(sm_p);
      experiments::write_speakermover_csv(r, os);
      if (!policy_out.empty()) {
        std::ostringstream table;
        r.search.policy.write(table);
        internal::emit(table.str(), {policy_out, {}}, out);
      }
      err << "speakermover optimal memoryless value " << experiments::fixed(r.search.value, 4)
          << " (" << r.search.nodes << " nodes)\n";
    };
  });

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (!sink.config_path.empty()) {
      std::ifstream f(sink.config_path);
      if (!f) throw ConfigError("cannot read config '" + sink.config_path + "'");
      apply_config(*sub, parse_flat_config(f));
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const ConfigError& e) {
    err << "memrl: " << e.what() << '\n';
    return 2;
  }

  try {
    std::ostringstream data;
    job(data);
    internal::emit(data.str(), sink, out);
  } catch (const std::exception& e) {
    err << "memrl: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace memrl::cli
