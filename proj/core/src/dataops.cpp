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

#include "spdht/dataops.hpp"

#include <tuple>

#include "spdht/error.hpp"

namespace spdht {

const LockTable::Entry* LockTable::find(const ObjectId& id) const {
  auto it = locks_.find(id);
  return it == locks_.end() ? nullptr : &it->second;
}

bool LockTable::acquire_or_queue(const ObjectId& id, NodeId holder, const QueuedUpdate& update) {
  auto it = locks_.find(id);
  if (it != locks_.end()) {
    it->second.waiting.push_back(update);
    return false;
  }
  locks_.emplace(id, Entry{holder, update.request_id, {}});
  return true;
}

bool LockTable::try_acquire(const ObjectId& id, NodeId holder, std::uint64_t request_id) {
  return locks_.emplace(id, Entry{holder, request_id, {}}).second;
}

void LockTable::set_holder(const ObjectId& id, NodeId holder) {
  auto it = locks_.find(id);
  if (it != locks_.end()) it->second.holder = holder;
}

std::optional<QueuedUpdate> LockTable::release(const ObjectId& id) {
  auto it = locks_.find(id);
  if (it == locks_.end()) return std::nullopt;
  if (it->second.waiting.empty()) {
    locks_.erase(it);
    return std::nullopt;
  }
  QueuedUpdate next = std::move(it->second.waiting.front());
  it->second.waiting.pop_front();
  it->second.request_id = next.request_id;
  return next;
}

std::deque<QueuedUpdate> LockTable::release_all(const ObjectId& id) {
  auto it = locks_.find(id);
  if (it == locks_.end()) return {};
  auto waiting = std::move(it->second.waiting);
  locks_.erase(it);
  return waiting;
}

std::size_t HotCounter::count(const ObjectId& id) const {
  auto it = counts_.find(id);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<DistObject> merge_results(const std::vector<std::vector<DistObject>>& partials) {
  std::map<ObjectId, const DistObject*> merged;
  for (const auto& list : partials) {
    for (const auto& obj : list) {
      auto [it, inserted] = merged.emplace(obj.id, &obj);
      if (!inserted && obj.version > it->second->version) it->second = &obj;
    }
  }
  std::vector<DistObject> out;
  out.reserve(merged.size());
  for (const auto& [id, obj] : merged) out.push_back(*obj);
  return out;
}

std::pair<NodeId, NodeId> select_replica_holders(const AgentLoadTable& loads) {
  auto picked = loads.least_loaded(2);
  if (picked.size() < 2) fail(ErrorCode::kInsufficientAgents);
  return {picked[0], picked[1]};
}

std::optional<NodeId> choose_delegate(std::size_t local_size,
                                      const std::map<NodeId, std::size_t>& peer_sizes,
                                      const DelegationPolicy& policy) {
  if (peer_sizes.empty() || local_size == 0) return std::nullopt;
  bool at_bound = false;
  if (policy.bound > 0) {
    at_bound = local_size >= policy.bound;
  } else {
    std::size_t total = local_size;
    for (const auto& [peer, size] : peer_sizes) total += size;
    const double mean = static_cast<double>(total) / static_cast<double>(peer_sizes.size() + 1);
    at_bound = static_cast<double>(local_size) >= policy.factor * mean;
  }
  if (!at_bound) return std::nullopt;
  const std::pair<const NodeId, std::size_t>* best = nullptr;
  for (const auto& entry : peer_sizes) {
    if (best == nullptr || std::tie(entry.second, entry.first) < std::tie(best->second, best->first)) {
      best = &entry;
    }
  }
  if (best->second >= local_size) return std::nullopt;
  return best->first;
}

std::map<NodeId, std::vector<ObjectId>> batch_by_holder(const std::vector<LookupHit>& hits) {
  std::map<NodeId, std::vector<ObjectId>> batches;
  for (const auto& hit : hits) batches[hit.owner].push_back(hit.id);
  return batches;
}

}  // namespace spdht
