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
#include <map>
#include <vector>

#include "spdht/types.hpp"

namespace spdht {

struct LusEntry {
  NodeId ragent;
  LocalityDescriptor locality;
  std::size_t connected_count = 0;
  SimTime last_update = 0;

  bool operator==(const LusEntry&) const = default;
};

// Registry of live RAgents kept by one lookup-and-discovery service.
class LusRegistry {
 public:
  // Inserts or replaces the entry for `ragent`.
  void register_ragent(NodeId ragent, const LocalityDescriptor& locality,
                       std::size_t connected_count, SimTime now = 0);
  void deregister(NodeId ragent);

  // Throws AccessDenied for anything other than an Agent.
  std::vector<LusEntry> query(Role requester) const;

  bool contains(NodeId ragent) const { return entries_.contains(ragent); }
  const std::map<NodeId, LusEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  // Same entries ignoring timestamps.
  bool same_view(const LusRegistry& other) const;

  bool operator==(const LusRegistry&) const = default;

 private:
  std::map<NodeId, LusEntry> entries_;
};

LusRegistry lus_register(LusRegistry reg, NodeId ragent, const LocalityDescriptor& locality,
                         std::size_t connected_count, SimTime now = 0);
LusRegistry lus_deregister(LusRegistry reg, NodeId ragent);
std::vector<LusEntry> lus_query(const LusRegistry& reg, Role requester);

}  // namespace spdht
