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
#include <concepts>
#include <functional>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "memrl/engine/rng.hpp"

namespace memrl {

// A concrete policy type exposes its memory type and threads it explicitly:
//
//   struct MyPolicy {
//     using Memory = ...;
//     Memory init_memory() const;
//     std::pair<Action, Memory> act(const Obs&, const Memory&, Rng&) const;
//   };
//
// Memoryless policies use std::monostate as their memory.
template <class P, class Obs, class Action>
concept PolicyFor = requires(const P& p, const Obs& obs,
                             const typename P::Memory& mem, Rng& rng) {
  typename P::Memory;
  { p.init_memory() } -> std::same_as<typename P::Memory>;
  { p.act(obs, mem, rng) } -> std::same_as<std::pair<Action, typename P::Memory>>;
};

/// Type-erased, immutable, cheaply copyable handle to a policy. Memory values
/// are carried as std::any and owned by the caller (one per episode), so a
/// single handle may be shared by concurrently running episodes.
template <class Obs, class Action>
class PolicyHandle {
 public:
  using Memory = std::any;

  PolicyHandle() = default;

  template <class P>
    requires PolicyFor<P, Obs, Action> &&
             (!std::same_as<std::remove_cvref_t<P>, PolicyHandle>)
  PolicyHandle(P policy, std::string name = {})  // NOLINT(runtime/explicit)
      : impl_(std::make_shared<const Model<P>>(std::move(policy))),
        name_(std::move(name)) {}

  Memory init_memory() const { return impl_->init_memory(); }

  std::pair<Action, Memory> act(const Obs& obs, const Memory& mem,
                                Rng& rng) const {
    return impl_->act(obs, mem, rng);
  }

  bool memoryless() const { return impl_->memoryless(); }
  const std::string& name() const { return name_; }
  explicit operator bool() const { return static_cast<bool>(impl_); }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual Memory init_memory() const = 0;
    virtual std::pair<Action, Memory> act(const Obs&, const Memory&,
                                          Rng&) const = 0;
    virtual bool memoryless() const = 0;
  };

  template <class P>
  struct Model final : Concept {
    explicit Model(P p) : policy(std::move(p)) {}
    Memory init_memory() const override { return policy.init_memory(); }
    std::pair<Action, Memory> act(const Obs& obs, const Memory& mem,
                                  Rng& rng) const override {
      auto [action, next] =
          policy.act(obs, std::any_cast<const typename P::Memory&>(mem), rng);
      return {action, Memory(std::move(next))};
    }
    bool memoryless() const override {
      return std::is_same_v<typename P::Memory, std::monostate>;
    }
    P policy;
  };

  std::shared_ptr<const Concept> impl_;
  std::string name_;
};

/// Adapts a callable `Action(const Obs&, Rng&)` into a memoryless policy.
template <class Obs, class Action, class Fn>
struct MemorylessPolicy {
  using Memory = std::monostate;
  Fn fn;
  Memory init_memory() const { return {}; }
  std::pair<Action, Memory> act(const Obs& obs, const Memory&, Rng& rng) const {
    return {fn(obs, rng), {}};
  }
};

template <class Obs, class Action, class Fn>
PolicyHandle<Obs, Action> make_memoryless(Fn fn, std::string name = {}) {
  return PolicyHandle<Obs, Action>(
      MemorylessPolicy<Obs, Action, Fn>{std::move(fn)}, std::move(name));
}

}  // namespace memrl
