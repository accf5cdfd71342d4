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
#include <optional>
#include <set>
#include <vector>

#include "spdht/catalogue.hpp"
#include "spdht/types.hpp"

namespace spdht {

struct Thresholds {
  std::size_t min_cluster = 5;
  std::size_t max_cluster = 10000;

  bool valid() const noexcept { return min_cluster > 0 && min_cluster < max_cluster; }
  bool operator==(const Thresholds&) const = default;
};

struct HeartbeatConfig {
  SimTime period = from_millis(100);
  SimTime failure_timeout = from_millis(250);

  bool valid() const noexcept { return period > 0 && failure_timeout >= 2 * period; }
  bool operator==(const HeartbeatConfig&) const = default;
};

// One RAgent's view of its cluster. The RAgent is not a member; members are
// the Agents connected to it.
struct ClusterState {
  NodeId ragent;
  std::optional<NodeId> secondary_backup;
  std::set<NodeId> members;
  AgentLoadTable loads;
  MetaCatalogue catalogue;
  std::set<NodeId> peer_ragents;

  bool operator==(const ClusterState&) const = default;
};

// Instruction to copy one replica from `source` to `target`.
struct ReplicaMove {
  ObjectId object;
  NodeId source;
  NodeId target;
  bool drop_source = false;

  bool operator==(const ReplicaMove&) const = default;
};

struct JoinCandidate {
  NodeId ragent;
  LocalityDescriptor locality;
  std::size_t connected_count = 0;
};

// Closest candidates first, then the fewest connected Agents, then the
// smallest id. Throws NoCandidates.
NodeId join_select_ragent(const std::vector<JoinCandidate>& candidates,
                          const LocalityDescriptor& joiner);

// Smallest NodeId wins. Throws EmptyElectorate.
NodeId elect_agent(const std::set<NodeId>& eligible);

struct AdmitOutcome {
  ClusterState cluster;
  bool split_scheduled = false;
  // Copies that bring under-replicated objects back to two holders.
  std::vector<ReplicaMove> replenish;
};

// Throws AlreadyMember.
AdmitOutcome admit_agent(ClusterState cluster, NodeId joiner, const Thresholds& thresholds);

struct SplitOutcome {
  ClusterState keep;
  ClusterState moved;
  NodeId new_ragent;
  std::vector<ReplicaMove> keep_moves;
  std::vector<ReplicaMove> moved_moves;
};

// Throws BelowThreshold when the cluster is not oversized.
SplitOutcome split_cluster(const ClusterState& cluster, const Thresholds& thresholds);

struct PeerSummary {
  NodeId ragent;
  std::size_t members = 0;
};

// Live cluster with the fewest members, ties by smallest RAgent id.
// Throws NoMergeTarget.
NodeId select_merge_target(const std::vector<PeerSummary>& peers);

// Absorbs `small` into `target`; small's RAgent becomes a plain member with no
// replicas. Throws ConflictingObject on overlapping catalogues.
ClusterState merge_clusters(const ClusterState& small, const ClusterState& target);

// Nodes whose last heartbeat is older than the timeout.
std::vector<NodeId> detect_failures(const std::set<NodeId>& watched, SimTime now,
                                    const std::map<NodeId, SimTime>& last_seen,
                                    const HeartbeatConfig& config);

struct AgentFailureOutcome {
  ClusterState cluster;
  std::vector<ReplicaMove> repairs;
  std::vector<ObjectId> lost;
  // Objects whose owner changed, with the new owner.
  std::vector<std::pair<ObjectId, NodeId>> new_owners;
  bool secondary_replaced = false;
};

// Removes the failed Agents together, so objects whose holders all failed
// are reported lost. Throws NotAMember if a failed node is not a member.
AgentFailureOutcome handle_agent_failure(ClusterState cluster, const std::set<NodeId>& failed);
AgentFailureOutcome handle_agent_failure(ClusterState cluster, NodeId failed);

struct PromotionOutcome {
  ClusterState cluster;
  std::vector<ReplicaMove> rehome;
};

// Promotes the secondary of `backup` after its RAgent failed. Throws
// NoSurvivingSecondary if there is no secondary or it is in `failed`.
PromotionOutcome handle_ragent_failure(const ClusterState& backup,
                                       const std::set<NodeId>& failed = {});

// Replaces holders outside `members` with the least-loaded members, copying
// from the outsider. Loads are recomputed from the catalogue first.
std::vector<ReplicaMove> rehome_outsiders(ClusterState& cluster);

// Adds least-loaded members to objects with fewer than two holders, copying
// from the owner.
std::vector<ReplicaMove> replenish_holders(ClusterState& cluster);

// Load table recomputed from holder lists, restricted to members.
AgentLoadTable loads_from_catalogue(const MetaCatalogue& catalogue,
                                    const std::set<NodeId>& members);

}  // namespace spdht
