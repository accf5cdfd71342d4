// Copyright 2026 The spdht Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "spdht/accounting.hpp"
#include "spdht/types.hpp"

namespace spdht {

// Objects fetched from one holder and the holder's replica count L at the
// time of the fetch.
struct HolderProbe {
  NodeId holder;
  std::size_t objects = 0;
  std::size_t replica_count = 0;
};

// Step tallies for one request inside one cluster. Each counter is bumped at
// the point where the corresponding operation happens.
struct ClusterTally {
  NodeId ragent;
  KeyKind kind = KeyKind::kExactType;
  std::size_t catalogue_keys = 0;  // M
  std::size_t matches = 0;         // P
  std::uint64_t key_steps = 0;
  std::uint64_t id_owner_steps = 0;
  std::uint64_t fetch_steps = 0;
  std::uint64_t probe_steps = 0;
  std::vector<HolderProbe> probes;
  std::size_t fetch_messages = 0;
  std::set<NodeId> holders_contacted;

  std::uint64_t measured() const noexcept {
    return key_steps + id_owner_steps + fetch_steps + probe_steps;
  }
  // Largest replica count among contacted holders, 1 when none.
  std::size_t max_replica_count() const noexcept;
};

struct RequestTally {
  std::map<NodeId, ClusterTally> clusters;
};

class StepCounter {
 public:
  void record_lookup(std::uint64_t request, NodeId ragent, KeyKind kind,
                     std::size_t catalogue_keys, std::size_t matches, std::uint64_t key_steps);
  void add_id_owner_steps(std::uint64_t request, NodeId ragent, std::uint64_t steps);
  void add_fetch_steps(std::uint64_t request, NodeId ragent, std::uint64_t steps);
  void add_fetch_message(std::uint64_t request, NodeId ragent, NodeId holder);
  void add_probes(std::uint64_t request, NodeId ragent, NodeId holder, std::size_t objects,
                  std::size_t replica_count, std::uint64_t steps);

  const RequestTally* find(std::uint64_t request) const;
  std::size_t request_count() const noexcept { return requests_.size(); }

  // Globals: live RAgents (R), live Agents (N), live objects (B).
  void set_globals(std::size_t ragents, std::size_t agents, std::size_t objects) {
    ragents_ = ragents;
    agents_ = agents;
    objects_ = objects;
  }
  std::size_t ragents() const noexcept { return ragents_; }
  std::size_t agents() const noexcept { return agents_; }
  std::size_t objects() const noexcept { return objects_; }

 private:
  ClusterTally& tally(std::uint64_t request, NodeId ragent);

  std::map<std::uint64_t, RequestTally> requests_;
  std::size_t ragents_ = 0;
  std::size_t agents_ = 0;
  std::size_t objects_ = 0;
};

struct ClusterAccount {
  NodeId ragent;
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t l = 0;
  std::uint64_t measured = 0;
  std::uint64_t decomposed = 0;
  std::uint64_t bound = 0;

  bool bound_applies() const noexcept { return m >= 1 && p >= 1; }
};

struct SearchAccount {
  std::uint64_t measured = 0;
  std::uint64_t bound = 0;
  std::uint64_t decomposed = 0;
  std::vector<ClusterAccount> clusters;

  // Every cluster has M >= 1 and P >= 1.
  bool bound_applies() const noexcept;
};

// Per-cluster term of the closed-form search cost: M * (4P + ceil(log2 L)).
std::uint64_t search_bound_term(std::size_t m, std::size_t p, std::size_t l) noexcept;

// Measured steps, the closed-form bound summed over clusters, and the exact
// decomposition sum(key steps + 4P + sum over holders n*ceil(log2 L)).
// Throws UnknownRequest.
SearchAccount account_search(const StepCounter& counter, std::uint64_t request);

// R * M * (4P + ceil(log2 L)) for a uniform deployment.
std::uint64_t uniform_search_steps(std::size_t r, std::size_t m, std::size_t p, std::size_t l) noexcept;

// B * (4 + ceil(log2(2B / N))): the uniform cost with M = B/R, P = 1 and
// L = 2B/N substituted.
std::uint64_t ideal_search_steps(std::size_t objects, std::size_t agents) noexcept;

}  // namespace spdht
