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

#include "spdht/invariants.hpp"

#include <map>
#include <sstream>

#include "spdht/nodes.hpp"

namespace spdht {

namespace {

class Report {
 public:
  explicit Report(const Simulator& sim) : sim_(sim) {}

  std::string name(NodeId n) const { return sim_.name_of(n); }

  void add(std::string invariant, const std::string& detail) {
    out.push_back({std::move(invariant), detail});
  }

  std::vector<Violation> out;

 private:
  const Simulator& sim_;
};

void check_clusters(const Simulator& sim, Report& r) {
  const auto ragents = sim.live_ragents();
  const auto agents = sim.live_agents();
  const Thresholds& t = sim.config().thresholds;
  const std::set<NodeId> ragent_set(ragents.begin(), ragents.end());
  const std::size_t total = agents.size() + ragents.size();

  std::map<NodeId, NodeId> home;  // agent -> cluster listing it
  for (NodeId ra : ragents) {
    const ClusterState& c = *sim.peer(ra)->cluster();
    if (c.members.size() > t.max_cluster) {
      r.add("cluster_size", r.name(ra) + " has " + std::to_string(c.members.size()) + " members");
    }
    if (c.members.size() < t.min_cluster && ragents.size() > 1 && total >= 2 * t.min_cluster) {
      r.add("cluster_size", r.name(ra) + " has " + std::to_string(c.members.size()) + " members");
    }
    std::set<NodeId> others = ragent_set;
    others.erase(ra);
    if (c.peer_ragents != others) r.add("complete_graph", r.name(ra) + " peer set differs");
    for (NodeId m : c.members) {
      if (!home.emplace(m, ra).second) {
        r.add("single_membership", r.name(m) + " listed by two clusters");
      }
      const PeerNode* p = sim.alive(m) ? sim.peer(m) : nullptr;
      if (p == nullptr || p->mode() != PeerNode::Mode::kAgent) {
        r.add("member_live", r.name(ra) + " lists non-agent " + r.name(m));
      } else if (p->ragent() != ra) {
        r.add("member_view", r.name(m) + " follows " + r.name(p->ragent()) + " not " + r.name(ra));
      }
    }
    if (!c.members.empty()) {
      if (!c.secondary_backup || !c.members.contains(*c.secondary_backup)) {
        r.add("secondary_member", r.name(ra) + " secondary is not a member");
      } else {
        const ClusterState* b = sim.peer(*c.secondary_backup)->backup();
        if (b == nullptr || !(b->catalogue == c.catalogue) || b->members != c.members) {
          r.add("secondary_fresh", r.name(ra) + " backup copy differs");
        }
      }
    }
    std::string why;
    if (!c.catalogue.check_invariants(&why)) r.add("catalogue", r.name(ra) + ": " + why);
  }
  for (NodeId a : agents) {
    if (!home.contains(a)) r.add("member_view", r.name(a) + " belongs to no cluster");
  }
}

void check_lus(const Simulator& sim, Report& r) {
  const auto ragents = sim.live_ragents();
  const std::set<NodeId> live(ragents.begin(), ragents.end());
  const LusNode* first = nullptr;
  for (NodeId l : sim.lus_nodes()) {
    const LusNode* lus = sim.lus(l);
    std::set<NodeId> listed;
    for (const auto& [ra, e] : lus->registry().entries()) listed.insert(ra);
    if (listed != live) r.add("lus_registry", r.name(l) + " does not list exactly the live RAgents");
    if (first != nullptr && !first->registry().same_view(lus->registry())) {
      r.add("lus_replicas", r.name(l) + " differs from " + first->name());
    }
    if (first == nullptr) first = lus;
  }
}

void check_objects(const Simulator& sim, const std::set<ObjectId>& expected_losses, Report& r) {
  // Ground truth: who stores what.
  std::map<ObjectId, std::map<NodeId, const DistObject*>> stored;
  for (NodeId n : sim.node_ids()) {
    if (!sim.alive(n)) continue;
    const PeerNode* p = sim.peer(n);
    if (p == nullptr) continue;
    if (p->mode() == PeerNode::Mode::kRAgent && !p->store().empty()) {
      r.add("ragent_replicas", r.name(n) + " stores replicas");
    }
    for (const auto& [oid, obj] : p->store()) stored[oid][n] = &obj;
  }

  std::map<ObjectId, NodeId> catalogued;
  for (NodeId ra : sim.live_ragents()) {
    const ClusterState& c = *sim.peer(ra)->cluster();
    std::map<NodeId, std::size_t> truth;
    for (NodeId m : c.members) truth[m] = 0;
    for (const auto& [oid, rec] : c.catalogue.records()) {
      if (!catalogued.emplace(oid, ra).second) {
        r.add("single_catalogue", oid.short_hex() + " catalogued twice");
      }
      const std::size_t want = std::min<std::size_t>(2, c.members.size());
      if (rec.holders.size() != want) {
        r.add("holder_count", oid.short_hex() + " has " + std::to_string(rec.holders.size()) +
                                  " holders in " + r.name(ra));
      }
      for (NodeId h : rec.holders) {
        if (!c.members.contains(h)) {
          r.add("holder_member", oid.short_hex() + " held by non-member " + r.name(h));
          continue;
        }
        ++truth[h];
        auto s = stored[oid].find(h);
        if (s == stored[oid].end()) {
          r.add("holder_store", r.name(h) + " listed for " + oid.short_hex() + " but has no copy");
        } else if (s->second->version != rec.meta.version) {
          r.add("holder_version", r.name(h) + " has v" + std::to_string(s->second->version) +
                                      " of " + oid.short_hex() + ", catalogue v" +
                                      std::to_string(rec.meta.version));
        }
      }
    }
    if (c.loads.counts() != truth) r.add("load_table", r.name(ra) + " load table is stale");
  }

  for (const auto& [oid, holders] : stored) {
    auto cat = catalogued.find(oid);
    const ClusterState* c = cat == catalogued.end() ? nullptr : sim.peer(cat->second)->cluster();
    const DistObject* first = nullptr;
    for (const auto& [n, obj] : holders) {
      if (c == nullptr || !c->catalogue.holders_of(oid).contains(n)) {
        r.add("stray_replica", r.name(n) + " keeps an uncatalogued copy of " + oid.short_hex());
      }
      if (first != nullptr && !(*first == *obj)) {
        r.add("replica_equality", oid.short_hex() + " replicas differ");
      }
      first = obj;
    }
  }

  for (const ObjectId& lost : sim.reported_losses()) {
    if (!expected_losses.contains(lost)) r.add("object_lost", lost.short_hex());
  }
}

}  // namespace

std::vector<Violation> check_runtime(const Simulator& sim) {
  std::vector<Violation> out;
  for (const auto& v : sim.audit().violations) out.push_back({"audit", v});
  if (sim.audit().emissions_from_crashed != 0) {
    out.push_back({"crashed_emission", std::to_string(sim.audit().emissions_from_crashed)});
  }
  return out;
}

std::vector<Violation> check_quiescent(const Simulator& sim,
                                       const std::set<ObjectId>& expected_losses) {
  Report r(sim);
  r.out = check_runtime(sim);
  check_clusters(sim, r);
  check_lus(sim, r);
  check_objects(sim, expected_losses, r);
  for (std::uint64_t op : sim.pending_ops()) r.add("incomplete_op", std::to_string(op));
  return std::move(r.out);
}

}  // namespace spdht
