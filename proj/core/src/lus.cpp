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

#include "spdht/lus.hpp"

#include "spdht/error.hpp"

namespace spdht {

void LusRegistry::register_ragent(NodeId ragent, const LocalityDescriptor& locality,
                                  std::size_t connected_count, SimTime now) {
  entries_[ragent] = LusEntry{ragent, locality, connected_count, now};
}

void LusRegistry::deregister(NodeId ragent) { entries_.erase(ragent); }

std::vector<LusEntry> LusRegistry::query(Role requester) const {
  // Clients never see the RAgent list; only Agents joining the overlay do.
  if (requester != Role::kAgent) fail(ErrorCode::kAccessDenied, std::string(to_string(requester)));
  std::vector<LusEntry> out;
  out.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) out.push_back(entry);
  return out;
}

bool LusRegistry::same_view(const LusRegistry& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [id, entry] : entries_) {
    auto it = other.entries_.find(id);
    if (it == other.entries_.end()) return false;
    if (it->second.locality != entry.locality ||
        it->second.connected_count != entry.connected_count) {
      return false;
    }
  }
  return true;
}

LusRegistry lus_register(LusRegistry reg, NodeId ragent, const LocalityDescriptor& locality,
                         std::size_t connected_count, SimTime now) {
  reg.register_ragent(ragent, locality, connected_count, now);
  return reg;
}

LusRegistry lus_deregister(LusRegistry reg, NodeId ragent) {
  reg.deregister(ragent);
  return reg;
}

std::vector<LusEntry> lus_query(const LusRegistry& reg, Role requester) {
  return reg.query(requester);
}

}  // namespace spdht
