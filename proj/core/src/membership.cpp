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

#include "spdht/membership.hpp"

#include <algorithm>
#include <tuple>

#include "spdht/error.hpp"

namespace spdht {

NodeId join_select_ragent(const std::vector<JoinCandidate>& candidates,
                          const LocalityDescriptor& joiner) {
  if (candidates.empty()) fail(ErrorCode::kNoCandidates);
  const JoinCandidate* best = nullptr;
  int best_rank = -1;
  for (const auto& c : candidates) {
    const int rank = proximity_rank(c.locality, joiner);
    const bool better =
        best == nullptr || rank > best_rank ||
        (rank == best_rank && std::tie(c.connected_count, c.ragent) <
                                  std::tie(best->connected_count, best->ragent));
    if (better) {
      best = &c;
      best_rank = rank;
    }
  }
  return best->ragent;
}

NodeId elect_agent(const std::set<NodeId>& eligible) {
  if (eligible.empty()) fail(ErrorCode::kEmptyElectorate);
  return *eligible.begin();
}

AdmitOutcome admit_agent(ClusterState cluster, NodeId joiner, const Thresholds& thresholds) {
  if (cluster.members.contains(joiner)) fail(ErrorCode::kAlreadyMember);
  cluster.members.insert(joiner);
  cluster.loads.add_agent(joiner, 0);
  if (!cluster.secondary_backup) cluster.secondary_backup = joiner;

  AdmitOutcome out;
  std::vector<std::pair<ObjectId, HolderList>> updates;
  for (const auto& [id, rec] : cluster.catalogue.records()) {
    if (rec.holders.size() >= 2) continue;
    HolderList holders = rec.holders;
    out.replenish.push_back({id, holders.owner(), joiner, false});
    holders.append(joiner);
    cluster.loads.increment(joiner);
    updates.emplace_back(id, std::move(holders));
  }
  for (auto& [id, holders] : updates) cluster.catalogue.replace_holders(id, std::move(holders));
  out.split_scheduled = cluster.members.size() > thresholds.max_cluster;
  out.cluster = std::move(cluster);
  return out;
}

AgentLoadTable loads_from_catalogue(const MetaCatalogue& catalogue,
                                    const std::set<NodeId>& members) {
  AgentLoadTable loads;
  for (NodeId m : members) loads.add_agent(m, 0);
  for (const auto& [id, rec] : catalogue.records()) {
    for (NodeId h : rec.holders) {
      if (members.contains(h)) loads.increment(h);
    }
  }
  return loads;
}

std::vector<ReplicaMove> rehome_outsiders(ClusterState& cluster) {
  cluster.loads = loads_from_catalogue(cluster.catalogue, cluster.members);
  std::vector<ReplicaMove> moves;
  std::vector<std::pair<ObjectId, HolderList>> updates;
  for (const auto& [id, rec] : cluster.catalogue.records()) {
    std::vector<NodeId> outsiders;
    std::vector<NodeId> kept;
    for (NodeId h : rec.holders) {
      (cluster.members.contains(h) ? kept : outsiders).push_back(h);
    }
    if (outsiders.empty()) continue;
    HolderList holders(kept);
    for (NodeId outsider : outsiders) {
      const std::set<NodeId> exclude(holders.begin(), holders.end());
      auto target = cluster.loads.least_loaded(1, exclude);
      if (target.empty()) {
        if (holders.empty()) {
          // Nowhere to put the data; keep the outsider listed.
          holders.append(outsider);
        } else {
          moves.push_back({id, outsider, NodeId{}, true});
        }
        continue;
      }
      holders.append(target.front());
      cluster.loads.increment(target.front());
      moves.push_back({id, outsider, target.front(), true});
    }
    updates.emplace_back(id, std::move(holders));
  }
  for (auto& [id, holders] : updates) cluster.catalogue.replace_holders(id, std::move(holders));
  return moves;
}

SplitOutcome split_cluster(const ClusterState& cluster, const Thresholds& thresholds) {
  if (cluster.members.size() <= thresholds.max_cluster) fail(ErrorCode::kBelowThreshold);

  std::set<NodeId> eligible = cluster.members;
  if (cluster.secondary_backup) eligible.erase(*cluster.secondary_backup);
  const NodeId new_ragent = elect_agent(eligible);

  std::vector<NodeId> remaining;
  for (NodeId m : cluster.members) {
    if (m != new_ragent) remaining.push_back(m);
  }
  const std::size_t keep_n = remaining.size() - remaining.size() / 2;
  std::set<NodeId> keep_set(remaining.begin(), remaining.begin() + static_cast<std::ptrdiff_t>(keep_n));
  std::set<NodeId> move_set(remaining.begin() + static_cast<std::ptrdiff_t>(keep_n), remaining.end());

  std::set<NodeId> move_owners = move_set;
  move_owners.insert(new_ragent);
  auto [keep_cat, move_cat] = cluster.catalogue.split(keep_set, move_owners);

  SplitOutcome out;
  out.new_ragent = new_ragent;

  out.keep.ragent = cluster.ragent;
  out.keep.members = keep_set;
  out.keep.catalogue = std::move(keep_cat);
  if (cluster.secondary_backup && keep_set.contains(*cluster.secondary_backup)) {
    out.keep.secondary_backup = cluster.secondary_backup;
  } else if (!keep_set.empty()) {
    out.keep.secondary_backup = elect_agent(keep_set);
  }
  out.keep.peer_ragents = cluster.peer_ragents;
  out.keep.peer_ragents.insert(new_ragent);

  out.moved.ragent = new_ragent;
  out.moved.members = move_set;
  out.moved.catalogue = std::move(move_cat);
  if (!move_set.empty()) out.moved.secondary_backup = elect_agent(move_set);
  out.moved.peer_ragents = cluster.peer_ragents;
  out.moved.peer_ragents.insert(cluster.ragent);

  out.keep_moves = rehome_outsiders(out.keep);
  out.moved_moves = rehome_outsiders(out.moved);
  return out;
}

NodeId select_merge_target(const std::vector<PeerSummary>& peers) {
  if (peers.empty()) fail(ErrorCode::kNoMergeTarget);
  const PeerSummary* best = &peers.front();
  for (const auto& p : peers) {
    if (std::tie(p.members, p.ragent) < std::tie(best->members, best->ragent)) best = &p;
  }
  return best->ragent;
}

std::vector<ReplicaMove> replenish_holders(ClusterState& cluster) {
  std::vector<ReplicaMove> moves;
  std::vector<std::pair<ObjectId, HolderList>> updates;
  for (const auto& [id, rec] : cluster.catalogue.records()) {
    if (rec.holders.size() >= 2 || rec.holders.empty()) continue;
    HolderList holders = rec.holders;
    while (holders.size() < 2) {
      const std::set<NodeId> exclude(holders.begin(), holders.end());
      auto target = cluster.loads.least_loaded(1, exclude);
      if (target.empty()) break;
      moves.push_back({id, holders.owner(), target.front(), false});
      cluster.loads.increment(target.front());
      holders.append(target.front());
    }
    if (holders.size() != rec.holders.size()) updates.emplace_back(id, std::move(holders));
  }
  for (auto& [id, holders] : updates) cluster.catalogue.replace_holders(id, std::move(holders));
  return moves;
}

ClusterState merge_clusters(const ClusterState& small, const ClusterState& target) {
  ClusterState out;
  out.ragent = target.ragent;
  out.catalogue = MetaCatalogue::merge(target.catalogue, small.catalogue);
  out.members = target.members;
  out.members.insert(small.members.begin(), small.members.end());
  out.members.insert(small.ragent);
  out.loads = target.loads;
  for (const auto& [agent, count] : small.loads.counts()) out.loads.add_agent(agent, count);
  out.loads.add_agent(small.ragent, 0);
  out.secondary_backup = target.secondary_backup;
  if (!out.secondary_backup) out.secondary_backup = elect_agent(out.members);
  out.peer_ragents = target.peer_ragents;
  out.peer_ragents.insert(small.peer_ragents.begin(), small.peer_ragents.end());
  out.peer_ragents.erase(small.ragent);
  out.peer_ragents.erase(target.ragent);
  return out;
}

std::vector<NodeId> detect_failures(const std::set<NodeId>& watched, SimTime now,
                                    const std::map<NodeId, SimTime>& last_seen,
                                    const HeartbeatConfig& config) {
  std::vector<NodeId> failed;
  for (NodeId n : watched) {
    auto it = last_seen.find(n);
    if (it == last_seen.end()) continue;
    if (now - it->second > config.failure_timeout) failed.push_back(n);
  }
  return failed;
}

AgentFailureOutcome handle_agent_failure(ClusterState cluster, const std::set<NodeId>& failed) {
  for (NodeId f : failed) {
    if (!cluster.members.contains(f)) fail(ErrorCode::kNotAMember);
  }
  AgentFailureOutcome out;

  std::map<ObjectId, NodeId> old_owner;
  std::set<ObjectId> affected;
  for (NodeId f : failed) {
    cluster.members.erase(f);
    cluster.loads.remove_agent(f);
    for (const auto& [id, rec] : cluster.catalogue.records()) {
      if (rec.holders.contains(f) && !old_owner.contains(id)) old_owner.emplace(id, rec.holders.owner());
    }
    for (const Orphan& orphan : cluster.catalogue.remove_agent(f)) affected.insert(orphan.id);
  }

  for (const ObjectId& id : affected) {
    if (!cluster.catalogue.contains(id)) {
      out.lost.push_back(id);
      continue;
    }
    HolderList holders = cluster.catalogue.holders_of(id);
    if (holders.owner() != old_owner.at(id)) out.new_owners.emplace_back(id, holders.owner());
    bool changed = false;
    while (holders.size() < 2) {
      const std::set<NodeId> exclude(holders.begin(), holders.end());
      auto target = cluster.loads.least_loaded(1, exclude);
      if (target.empty()) break;
      out.repairs.push_back({id, holders.owner(), target.front(), false});
      cluster.loads.increment(target.front());
      holders.append(target.front());
      changed = true;
    }
    if (changed) cluster.catalogue.replace_holders(id, std::move(holders));
  }

  if (cluster.secondary_backup && failed.contains(*cluster.secondary_backup)) {
    out.secondary_replaced = true;
    if (cluster.members.empty()) {
      cluster.secondary_backup.reset();
    } else {
      cluster.secondary_backup = elect_agent(cluster.members);
    }
  }
  out.cluster = std::move(cluster);
  return out;
}

AgentFailureOutcome handle_agent_failure(ClusterState cluster, NodeId failed) {
  return handle_agent_failure(std::move(cluster), std::set<NodeId>{failed});
}

PromotionOutcome handle_ragent_failure(const ClusterState& backup, const std::set<NodeId>& failed) {
  if (!backup.secondary_backup || failed.contains(*backup.secondary_backup)) {
    fail(ErrorCode::kNoSurvivingSecondary);
  }
  const NodeId promoted = *backup.secondary_backup;
  PromotionOutcome out;
  out.cluster = backup;
  out.cluster.ragent = promoted;
  out.cluster.members.erase(promoted);
  out.cluster.peer_ragents.erase(promoted);
  out.cluster.peer_ragents.erase(backup.ragent);
  if (out.cluster.members.empty()) {
    out.cluster.secondary_backup.reset();
  } else {
    out.cluster.secondary_backup = elect_agent(out.cluster.members);
  }
  out.rehome = rehome_outsiders(out.cluster);
  return out;
}

}  // namespace spdht
