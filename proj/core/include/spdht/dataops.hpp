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
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "spdht/catalogue.hpp"
#include "spdht/types.hpp"

namespace spdht {

enum class SearchMode : std::uint8_t { kAll, kFirst };

struct SearchRequest {
  std::uint64_t request_id = 0;
  PatternKey criterion;
  SearchMode mode = SearchMode::kAll;
  NodeId origin;

  bool operator==(const SearchRequest&) const = default;
};

struct UpdateRequest {
  ObjectId object_id;
  std::string new_payload;
  NodeId initiator;

  bool operator==(const UpdateRequest&) const = default;
};

struct QueuedUpdate {
  std::uint64_t request_id = 0;
  UpdateRequest request;
  // RAgent that forwarded the request, when it came from another cluster.
  std::optional<NodeId> forwarded_by;
};

// At most one in-flight update (or migration) per object; later updates wait
// in FIFO order behind it.
class LockTable {
 public:
  struct Entry {
    NodeId holder;
    std::uint64_t request_id = 0;
    std::deque<QueuedUpdate> waiting;
  };

  bool locked(const ObjectId& id) const { return locks_.contains(id); }
  const Entry* find(const ObjectId& id) const;

  // Takes the lock when free; otherwise queues `update` and returns false.
  bool acquire_or_queue(const ObjectId& id, NodeId holder, const QueuedUpdate& update);
  // Takes the lock only when free (no queueing).
  bool try_acquire(const ObjectId& id, NodeId holder, std::uint64_t request_id);
  void set_holder(const ObjectId& id, NodeId holder);

  // Passes the lock to the next queued update and returns it. With nothing
  // queued the lock is freed.
  std::optional<QueuedUpdate> release(const ObjectId& id);
  // Drops the lock and returns everything that was queued behind it.
  std::deque<QueuedUpdate> release_all(const ObjectId& id);

  bool empty() const noexcept { return locks_.empty(); }
  std::size_t size() const noexcept { return locks_.size(); }

 private:
  std::map<ObjectId, Entry> locks_;
};

// Tally of remote first-searches per object, used to pull hot objects in.
class HotCounter {
 public:
  explicit HotCounter(std::size_t migration_threshold = 3)
      : migration_threshold_(migration_threshold) {}

  // Returns the new tally.
  std::size_t record(const ObjectId& id) { return ++counts_[id]; }
  bool reached(const ObjectId& id) const { return count(id) >= migration_threshold_; }
  std::size_t count(const ObjectId& id) const;
  void reset(const ObjectId& id) { counts_.erase(id); }
  std::size_t migration_threshold() const noexcept { return migration_threshold_; }

 private:
  std::size_t migration_threshold_;
  std::map<ObjectId, std::size_t> counts_;
};

// Union of partial results deduplicated by ObjectId, ascending. When the same
// id appears with different versions the newest one is kept.
std::vector<DistObject> merge_results(const std::vector<std::vector<DistObject>>& partials);

// The two least-loaded Agents, ties by smallest NodeId; the first is the
// owner. Throws InsufficientAgents.
std::pair<NodeId, NodeId> select_replica_holders(const AgentLoadTable& loads);

struct DelegationPolicy {
  // Absolute catalogue size at which inserts are delegated; 0 disables it.
  std::size_t bound = 0;
  // Otherwise delegate when local size >= factor * mean size across RAgents.
  double factor = 2.0;

  bool operator==(const DelegationPolicy&) const = default;
};

// Peer RAgent that should take an insert instead of the local cluster: the
// peer with the smallest catalogue (ties by id), provided the local
// catalogue is at the delegation bound and that peer is strictly smaller.
std::optional<NodeId> choose_delegate(std::size_t local_size,
                                      const std::map<NodeId, std::size_t>& peer_sizes,
                                      const DelegationPolicy& policy);

// Groups object ids by the agent they should be fetched from, so one request
// per agent is sent.
std::map<NodeId, std::vector<ObjectId>> batch_by_holder(const std::vector<LookupHit>& hits);

}  // namespace spdht
