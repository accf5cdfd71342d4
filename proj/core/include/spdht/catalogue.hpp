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
#include <string>
#include <utility>
#include <vector>

#include "spdht/types.hpp"

namespace spdht {

// Agents holding a replica of one object. The first entry is the owner.
class HolderList {
 public:
  HolderList() = default;
  HolderList(std::initializer_list<NodeId> agents) : agents_(agents) {}
  explicit HolderList(std::vector<NodeId> agents) : agents_(std::move(agents)) {}

  NodeId owner() const;
  const std::vector<NodeId>& agents() const noexcept { return agents_; }
  std::size_t size() const noexcept { return agents_.size(); }
  bool empty() const noexcept { return agents_.empty(); }
  bool contains(NodeId agent) const;
  bool has_duplicates() const;

  void append(NodeId agent) { agents_.push_back(agent); }
  // Removes `agent` if present; returns whether it was there.
  bool remove(NodeId agent);
  // Moves `agent` to the front. Precondition: contains(agent).
  void promote(NodeId agent);

  auto begin() const noexcept { return agents_.begin(); }
  auto end() const noexcept { return agents_.end(); }

  bool operator==(const HolderList&) const = default;

 private:
  std::vector<NodeId> agents_;
};

// Replica counts per connected Agent, used for balanced placement.
class AgentLoadTable {
 public:
  void add_agent(NodeId agent, std::size_t count = 0);
  void remove_agent(NodeId agent);
  void increment(NodeId agent);
  void decrement(NodeId agent);

  std::size_t count(NodeId agent) const;
  bool contains(NodeId agent) const { return counts_.contains(agent); }
  std::size_t size() const noexcept { return counts_.size(); }
  const std::map<NodeId, std::size_t>& counts() const noexcept { return counts_; }

  // The `k` agents with the smallest counts, skipping `exclude`; ties go to
  // the smaller NodeId. Returns fewer than `k` when not enough agents exist.
  std::vector<NodeId> least_loaded(std::size_t k, const std::set<NodeId>& exclude = {}) const;

  bool operator==(const AgentLoadTable&) const = default;

 private:
  std::map<NodeId, std::size_t> counts_;
};

struct ObjectMeta {
  ObjectId id;
  std::string type_tag;
  std::set<std::string> index_keys;
  std::uint64_t version = 0;

  static ObjectMeta of(const DistObject& obj) {
    return {obj.id, obj.type_tag, obj.index_keys, obj.version};
  }
  std::vector<PatternKey> keys() const;

  bool operator==(const ObjectMeta&) const = default;
};

struct LookupHit {
  ObjectId id;
  NodeId owner;

  bool operator==(const LookupHit&) const = default;
};

// Accounted cost of one lookup: M and the key steps charged for it.
struct LookupCost {
  std::size_t keys_in_catalogue = 0;
  std::size_t key_steps = 0;
};

struct Orphan {
  ObjectId id;
  HolderList survivors;

  bool operator==(const Orphan&) const = default;
};

// Per-RAgent index: pattern key -> object ids -> holder list (owner first).
// Holder lists are stored once per object so every key sees the same list.
class MetaCatalogue {
 public:
  struct Record {
    ObjectMeta meta;
    HolderList holders;

    bool operator==(const Record&) const = default;
  };

  // Throws DuplicateObject if the id is present, InvalidArgument if the
  // holder list is empty or repeats an agent.
  void insert(const ObjectMeta& meta, HolderList holders);

  std::vector<LookupHit> lookup(const PatternKey& criterion, LookupCost* cost = nullptr) const;

  // Throws UnknownObject / NotAHolder.
  void set_owner(const ObjectId& id, NodeId new_owner);

  // Drops `failed` from every holder list. Objects left without holders are
  // removed and reported with an empty survivor list.
  std::vector<Orphan> remove_agent(NodeId failed);

  // Each object goes to the side containing its owner. Throws InvalidArgument
  // if the sets overlap or an owner is in neither.
  std::pair<MetaCatalogue, MetaCatalogue> split(const std::set<NodeId>& keep_agents,
                                                const std::set<NodeId>& move_agents) const;

  // Throws ConflictingObject when both sides hold the same id.
  static MetaCatalogue merge(const MetaCatalogue& a, const MetaCatalogue& b);

  // Throws UnknownObject.
  const HolderList& holders_of(const ObjectId& id) const;
  const Record& record(const ObjectId& id) const;
  bool contains(const ObjectId& id) const { return records_.contains(id); }
  std::optional<NodeId> owner_of(const ObjectId& id) const;

  void erase(const ObjectId& id);
  void replace_holders(const ObjectId& id, HolderList holders);
  void set_version(const ObjectId& id, std::uint64_t version);

  // M: number of distinct pattern keys.
  std::size_t key_count() const noexcept { return entries_.size(); }
  std::size_t object_count() const noexcept { return records_.size(); }
  // Number of (key, object) pairs.
  std::size_t entry_count() const;
  bool empty() const noexcept { return records_.empty(); }

  const std::map<ObjectId, Record>& records() const noexcept { return records_; }

  // One line per (key, object): `kind key object-id owner holder,holder,...`.
  std::string dump() const;

  // Checks owner-first, non-empty, duplicate-free and key coverage rules.
  bool check_invariants(std::string* why = nullptr) const;

  bool operator==(const MetaCatalogue& other) const {
    return entries_ == other.entries_ && records_ == other.records_;
  }

 private:
  void index(const ObjectId& id, const ObjectMeta& meta);
  void unindex(const ObjectId& id, const ObjectMeta& meta);
  void rebuild_owner_index();
  Record& mutable_record(const ObjectId& id);

  std::map<PatternKey, std::set<ObjectId>> entries_;
  std::map<ObjectId, Record> records_;
  std::map<ObjectId, NodeId> owner_index_;
};

// Value-returning forms of the catalogue operations.
MetaCatalogue catalogue_insert(MetaCatalogue cat, const ObjectMeta& meta, HolderList holders);
std::vector<LookupHit> catalogue_lookup(const MetaCatalogue& cat, const PatternKey& criterion,
                                        LookupCost* cost = nullptr);
MetaCatalogue catalogue_set_owner(MetaCatalogue cat, const ObjectId& id, NodeId new_owner);
std::pair<MetaCatalogue, std::vector<Orphan>> catalogue_remove_agent(MetaCatalogue cat,
                                                                     NodeId failed);
std::pair<MetaCatalogue, MetaCatalogue> catalogue_split(const MetaCatalogue& cat,
                                                        const std::set<NodeId>& keep_agents,
                                                        const std::set<NodeId>& move_agents);
MetaCatalogue catalogue_merge(const MetaCatalogue& a, const MetaCatalogue& b);
HolderList holders_of(const MetaCatalogue& cat, const ObjectId& id);

}  // namespace spdht
