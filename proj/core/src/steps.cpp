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

#include "spdht/steps.hpp"

#include <algorithm>

#include "spdht/error.hpp"

namespace spdht {

std::size_t ClusterTally::max_replica_count() const noexcept {
  std::size_t l = 1;
  for (const auto& probe : probes) l = std::max(l, probe.replica_count);
  return l;
}

ClusterTally& StepCounter::tally(std::uint64_t request, NodeId ragent) {
  auto& t = requests_[request].clusters[ragent];
  t.ragent = ragent;
  return t;
}

void StepCounter::record_lookup(std::uint64_t request, NodeId ragent, KeyKind kind,
                                std::size_t catalogue_keys, std::size_t matches,
                                std::uint64_t key_steps) {
  auto& t = tally(request, ragent);
  t.kind = kind;
  t.catalogue_keys = catalogue_keys;
  t.matches = matches;
  t.key_steps += key_steps;
}

void StepCounter::add_id_owner_steps(std::uint64_t request, NodeId ragent, std::uint64_t steps) {
  tally(request, ragent).id_owner_steps += steps;
}

void StepCounter::add_fetch_steps(std::uint64_t request, NodeId ragent, std::uint64_t steps) {
  tally(request, ragent).fetch_steps += steps;
}

void StepCounter::add_fetch_message(std::uint64_t request, NodeId ragent, NodeId holder) {
  auto& t = tally(request, ragent);
  ++t.fetch_messages;
  t.holders_contacted.insert(holder);
}

void StepCounter::add_probes(std::uint64_t request, NodeId ragent, NodeId holder,
                             std::size_t objects, std::size_t replica_count,
                             std::uint64_t steps) {
  auto& t = tally(request, ragent);
  t.probes.push_back({holder, objects, replica_count});
  t.probe_steps += steps;
}

const RequestTally* StepCounter::find(std::uint64_t request) const {
  auto it = requests_.find(request);
  return it == requests_.end() ? nullptr : &it->second;
}

bool SearchAccount::bound_applies() const noexcept {
  if (clusters.empty()) return false;
  return std::all_of(clusters.begin(), clusters.end(),
                     [](const ClusterAccount& c) { return c.bound_applies(); });
}

std::uint64_t search_bound_term(std::size_t m, std::size_t p, std::size_t l) noexcept {
  return static_cast<std::uint64_t>(m) * (4 * static_cast<std::uint64_t>(p) + ceil_log2(l));
}

SearchAccount account_search(const StepCounter& counter, std::uint64_t request) {
  const RequestTally* tally = counter.find(request);
  if (tally == nullptr) fail(ErrorCode::kUnknownRequest, std::to_string(request));
  SearchAccount out;
  for (const auto& [ragent, t] : tally->clusters) {
    ClusterAccount c;
    c.ragent = ragent;
    c.m = t.catalogue_keys;
    c.p = t.matches;
    c.l = t.max_replica_count();
    c.measured = t.measured();
    // Rebuilt from the structural observations, not from the tallies.
    std::uint64_t probes = 0;
    for (const auto& probe : t.probes) probes += probe.objects * ceil_log2(probe.replica_count);
    c.decomposed = key_lookup_steps(c.m, t.kind) + 4 * static_cast<std::uint64_t>(c.p) + probes;
    c.bound = search_bound_term(c.m, c.p, c.l);
    out.measured += c.measured;
    out.decomposed += c.decomposed;
    out.bound += c.bound;
    out.clusters.push_back(c);
  }
  return out;
}

std::uint64_t uniform_search_steps(std::size_t r, std::size_t m, std::size_t p,
                                   std::size_t l) noexcept {
  return static_cast<std::uint64_t>(r) * search_bound_term(m, p, l);
}

std::uint64_t ideal_search_steps(std::size_t objects, std::size_t agents) noexcept {
  const std::uint64_t b = objects;
  const std::uint64_t l = agents == 0 ? 1 : (2 * b) / agents;
  return b * (4 + ceil_log2(l));
}

}  // namespace spdht
