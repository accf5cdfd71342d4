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

#include "spdht/catalogue.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "spdht/accounting.hpp"
#include "spdht/error.hpp"

namespace spdht {

NodeId HolderList::owner() const {
  if (agents_.empty()) fail(ErrorCode::kInvalidArgument, "empty holder list has no owner");
  return agents_.front();
}

bool HolderList::contains(NodeId agent) const {
  return std::find(agents_.begin(), agents_.end(), agent) != agents_.end();
}

bool HolderList::has_duplicates() const {
  std::set<NodeId> seen;
  for (NodeId a : agents_) {
    if (!seen.insert(a).second) return true;
  }
  return false;
}

bool HolderList::remove(NodeId agent) {
  auto it = std::find(agents_.begin(), agents_.end(), agent);
  if (it == agents_.end()) return false;
  agents_.erase(it);
  return true;
}

void HolderList::promote(NodeId agent) {
  auto it = std::find(agents_.begin(), agents_.end(), agent);
  if (it == agents_.end()) fail(ErrorCode::kNotAHolder);
  std::rotate(agents_.begin(), it, it + 1);
}

void AgentLoadTable::add_agent(NodeId agent, std::size_t count) { counts_[agent] = count; }

void AgentLoadTable::remove_agent(NodeId agent) { counts_.erase(agent); }

void AgentLoadTable::increment(NodeId agent) { ++counts_[agent]; }

void AgentLoadTable::decrement(NodeId agent) {
  auto it = counts_.find(agent);
  if (it != counts_.end() && it->second > 0) --it->second;
}

std::size_t AgentLoadTable::count(NodeId agent) const {
  auto it = counts_.find(agent);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<NodeId> AgentLoadTable::least_loaded(std::size_t k,
                                                 const std::set<NodeId>& exclude) const {
  std::vector<std::pair<std::size_t, NodeId>> ranked;
  ranked.reserve(counts_.size());
  for (const auto& [agent, count] : counts_) {
    if (!exclude.contains(agent)) ranked.emplace_back(count, agent);
  }
  const std::size_t n = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n),
                    ranked.end());
  std::vector<NodeId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ranked[i].second);
  return out;
}

std::vector<PatternKey> ObjectMeta::keys() const {
  std::vector<PatternKey> out;
  out.reserve(index_keys.size() + 1);
  out.push_back(PatternKey::exact(type_tag));
  for (const auto& k : index_keys) out.push_back(PatternKey::pattern(k));
  return out;
}

void MetaCatalogue::index(const ObjectId& id, const ObjectMeta& meta) {
  for (auto& key : meta.keys()) entries_[std::move(key)].insert(id);
}

void MetaCatalogue::unindex(const ObjectId& id, const ObjectMeta& meta) {
  for (const auto& key : meta.keys()) {
    auto it = entries_.find(key);
    if (it == entries_.end()) continue;
    it->second.erase(id);
    if (it->second.empty()) entries_.erase(it);
  }
}

void MetaCatalogue::rebuild_owner_index() {
  owner_index_.clear();
  for (const auto& [id, rec] : records_) owner_index_.emplace(id, rec.holders.owner());
}

MetaCatalogue::Record& MetaCatalogue::mutable_record(const ObjectId& id) {
  auto it = records_.find(id);
  if (it == records_.end()) fail(ErrorCode::kUnknownObject, id.short_hex());
  return it->second;
}

void MetaCatalogue::insert(const ObjectMeta& meta, HolderList holders) {
  if (holders.empty()) fail(ErrorCode::kInvalidArgument, "empty holder list");
  if (holders.has_duplicates()) fail(ErrorCode::kInvalidArgument, "duplicate holder");
  if (records_.contains(meta.id)) fail(ErrorCode::kDuplicateObject, meta.id.short_hex());
  index(meta.id, meta);
  owner_index_[meta.id] = holders.owner();
  records_.emplace(meta.id, Record{meta, std::move(holders)});
}

std::vector<LookupHit> MetaCatalogue::lookup(const PatternKey& criterion,
                                             LookupCost* cost) const {
  std::vector<LookupHit> hits;
  std::size_t steps = 0;
  const std::set<ObjectId>* ids = nullptr;
  if (criterion.kind == KeyKind::kPattern) {
    // Pattern criteria compare against every key in the catalogue.
    for (const auto& [key, members] : entries_) {
      ++steps;
      if (key == criterion) ids = &members;
    }
  } else {
    steps = key_lookup_steps(entries_.size(), KeyKind::kExactType);
    auto it = entries_.find(criterion);
    if (it != entries_.end()) ids = &it->second;
  }
  if (ids != nullptr) {
    hits.reserve(ids->size());
    for (const ObjectId& id : *ids) hits.push_back({id, owner_index_.at(id)});
  }
  if (cost != nullptr) {
    cost->keys_in_catalogue = entries_.size();
    cost->key_steps = steps;
  }
  return hits;
}

void MetaCatalogue::set_owner(const ObjectId& id, NodeId new_owner) {
  Record& rec = mutable_record(id);
  if (!rec.holders.contains(new_owner)) fail(ErrorCode::kNotAHolder, id.short_hex());
  rec.holders.promote(new_owner);
  owner_index_[id] = new_owner;
}

std::vector<Orphan> MetaCatalogue::remove_agent(NodeId failed) {
  std::vector<Orphan> orphans;
  std::vector<ObjectId> lost;
  for (auto& [id, rec] : records_) {
    if (!rec.holders.remove(failed)) continue;
    orphans.push_back({id, rec.holders});
    if (rec.holders.empty()) {
      lost.push_back(id);
    } else {
      owner_index_[id] = rec.holders.owner();
    }
  }
  for (const ObjectId& id : lost) erase(id);
  return orphans;
}

std::pair<MetaCatalogue, MetaCatalogue> MetaCatalogue::split(
    const std::set<NodeId>& keep_agents, const std::set<NodeId>& move_agents) const {
  for (NodeId a : keep_agents) {
    if (move_agents.contains(a)) fail(ErrorCode::kInvalidArgument, "agent sets overlap");
  }
  MetaCatalogue keep;
  MetaCatalogue move;
  for (const auto& [id, rec] : records_) {
    const NodeId owner = rec.holders.owner();
    if (keep_agents.contains(owner)) {
      keep.insert(rec.meta, rec.holders);
    } else if (move_agents.contains(owner)) {
      move.insert(rec.meta, rec.holders);
    } else {
      fail(ErrorCode::kInvalidArgument, "owner outside both agent sets");
    }
  }
  return {std::move(keep), std::move(move)};
}

MetaCatalogue MetaCatalogue::merge(const MetaCatalogue& a, const MetaCatalogue& b) {
  for (const auto& [id, rec] : b.records_) {
    if (a.records_.contains(id)) fail(ErrorCode::kConflictingObject, id.short_hex());
  }
  MetaCatalogue out = a;
  for (const auto& [id, rec] : b.records_) out.insert(rec.meta, rec.holders);
  return out;
}

const HolderList& MetaCatalogue::holders_of(const ObjectId& id) const {
  return record(id).holders;
}

const MetaCatalogue::Record& MetaCatalogue::record(const ObjectId& id) const {
  auto it = records_.find(id);
  if (it == records_.end()) fail(ErrorCode::kUnknownObject, id.short_hex());
  return it->second;
}

std::optional<NodeId> MetaCatalogue::owner_of(const ObjectId& id) const {
  auto it = owner_index_.find(id);
  if (it == owner_index_.end()) return std::nullopt;
  return it->second;
}

void MetaCatalogue::erase(const ObjectId& id) {
  auto it = records_.find(id);
  if (it == records_.end()) return;
  unindex(id, it->second.meta);
  owner_index_.erase(id);
  records_.erase(it);
}

void MetaCatalogue::replace_holders(const ObjectId& id, HolderList holders) {
  if (holders.empty()) fail(ErrorCode::kInvalidArgument, "empty holder list");
  if (holders.has_duplicates()) fail(ErrorCode::kInvalidArgument, "duplicate holder");
  Record& rec = mutable_record(id);
  rec.holders = std::move(holders);
  owner_index_[id] = rec.holders.owner();
}

void MetaCatalogue::set_version(const ObjectId& id, std::uint64_t version) {
  mutable_record(id).meta.version = version;
}

std::size_t MetaCatalogue::entry_count() const {
  std::size_t n = 0;
  for (const auto& [key, ids] : entries_) n += ids.size();
  return n;
}

std::string MetaCatalogue::dump() const {
  std::ostringstream out;
  for (const auto& [key, ids] : entries_) {
    for (const ObjectId& id : ids) {
      const Record& rec = records_.at(id);
      out << to_string(key.kind) << ' ' << key.key << ' ' << id.hex() << ' '
          << rec.holders.owner().value << ' ';
      bool first = true;
      for (NodeId h : rec.holders) {
        if (!first) out << ',';
        out << h.value;
        first = false;
      }
      out << '\n';
    }
  }
  return out.str();
}

bool MetaCatalogue::check_invariants(std::string* why) const {
  auto bad = [why](std::string msg) {
    if (why != nullptr) *why = std::move(msg);
    return false;
  };
  std::map<ObjectId, std::size_t> seen;
  for (const auto& [key, ids] : entries_) {
    if (ids.empty()) return bad("empty key " + key.key);
    for (const ObjectId& id : ids) {
      auto it = records_.find(id);
      if (it == records_.end()) return bad("dangling id under " + key.key);
      const auto keys = it->second.meta.keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        return bad("object " + id.short_hex() + " filed under foreign key " + key.key);
      }
      ++seen[id];
    }
  }
  for (const auto& [id, rec] : records_) {
    if (rec.holders.empty()) return bad("empty holders for " + id.short_hex());
    if (rec.holders.has_duplicates()) return bad("duplicate holders for " + id.short_hex());
    auto owner = owner_index_.find(id);
    if (owner == owner_index_.end() || owner->second != rec.holders.owner()) {
      return bad("owner index stale for " + id.short_hex());
    }
    if (seen[id] != rec.meta.keys().size()) return bad("key coverage for " + id.short_hex());
  }
  if (owner_index_.size() != records_.size()) return bad("owner index size");
  return true;
}

MetaCatalogue catalogue_insert(MetaCatalogue cat, const ObjectMeta& meta, HolderList holders) {
  cat.insert(meta, std::move(holders));
  return cat;
}

std::vector<LookupHit> catalogue_lookup(const MetaCatalogue& cat, const PatternKey& criterion,
                                        LookupCost* cost) {
  return cat.lookup(criterion, cost);
}

MetaCatalogue catalogue_set_owner(MetaCatalogue cat, const ObjectId& id, NodeId new_owner) {
  cat.set_owner(id, new_owner);
  return cat;
}

std::pair<MetaCatalogue, std::vector<Orphan>> catalogue_remove_agent(MetaCatalogue cat,
                                                                     NodeId failed) {
  auto orphans = cat.remove_agent(failed);
  return {std::move(cat), std::move(orphans)};
}

std::pair<MetaCatalogue, MetaCatalogue> catalogue_split(const MetaCatalogue& cat,
                                                        const std::set<NodeId>& keep_agents,
                                                        const std::set<NodeId>& move_agents) {
  return cat.split(keep_agents, move_agents);
}

MetaCatalogue catalogue_merge(const MetaCatalogue& a, const MetaCatalogue& b) {
  return MetaCatalogue::merge(a, b);
}

HolderList holders_of(const MetaCatalogue& cat, const ObjectId& id) {
  return cat.holders_of(id);
}

}  // namespace spdht
