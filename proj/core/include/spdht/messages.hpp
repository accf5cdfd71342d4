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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spdht/dataops.hpp"
#include "spdht/lus.hpp"
#include "spdht/membership.hpp"
#include "spdht/types.hpp"

namespace spdht {

enum class Outcome : std::uint8_t {
  kOk,
  kEmpty,
  kDuplicateObject,
  kUnknownObject,
  kInsufficientAgents,
  kNotHeld,
  kObjectLost,
  kAccessDenied,
  kTimeout,
  kIncomplete,
};

std::string_view to_string(Outcome outcome);

// What an Agent knows about its cluster; refreshed by RAgent heartbeats.
struct ClusterConfig {
  NodeId ragent;
  std::optional<NodeId> secondary;
  std::vector<NodeId> members;

  bool operator==(const ClusterConfig&) const = default;
};

using SharedCluster = std::shared_ptr<const ClusterState>;

namespace msg {

// Lookup-and-discovery service.
struct LusQuery {};
struct LusQueryReply {
  std::vector<LusEntry> entries;
};
struct LusDenied {};
struct LusRegister {
  LusEntry entry;
};
struct LusDeregister {
  NodeId ragent;
};
struct LusReplicate {
  bool add = true;
  LusEntry entry;
};

// Membership.
struct JoinRequest {};
struct JoinAccept {
  ClusterConfig config;
};
struct JoinRedirect {};
struct Heartbeat {};
struct RAgentAlive {
  ClusterConfig config;
};
struct PeerAlive {
  std::size_t members = 0;
  std::size_t catalogue_size = 0;
};
struct Reassign {
  NodeId ragent;
};
struct RejoinDirective {};
struct RAgentSuspect {
  NodeId ragent;
};
struct BackupSync {
  SharedCluster state;
};
struct BecomeRAgent {
  SharedCluster state;
  std::vector<ReplicaMove> moves;
};
struct PeerHello {
  std::optional<NodeId> replaces;
  std::size_t members = 0;
  std::size_t catalogue_size = 0;
};
struct PeerGone {
  NodeId absorbed_by;
};
struct MergeRequest {
  SharedCluster state;
};
struct MergeAccept {};
struct MergeBusy {};

// Replica placement and repair.
struct ReplicaTransfer {
  ObjectId object;
  NodeId target;  // invalid: drop only
  bool drop = false;
  NodeId reply_to;
};
struct ReplicaStore {
  DistObject object;
  NodeId reply_to;
};
struct ReplicaStored {
  ObjectId object;
  NodeId holder;
};
struct ReplicaTransferFailed {
  ObjectId object;
  NodeId target;
};
struct ReplicaDrop {
  ObjectId object;
};

// Client to Agent.
struct ClientSearch {
  PatternKey criterion;
  SearchMode mode = SearchMode::kAll;
};
struct ClientInsert {
  DistObject object;
};
struct ClientUpdate {
  ObjectId object;
  std::string payload;
};
struct ClientProgress {
  std::uint64_t version = 0;
};
struct ClientResult {
  Outcome outcome = Outcome::kOk;
  std::vector<DistObject> objects;
  std::optional<NodeId> holder;
  std::uint64_t version = 0;
};

// Agent to RAgent.
struct SearchRequestMsg {
  PatternKey criterion;
  SearchMode mode = SearchMode::kAll;
  NodeId origin;
};
struct SearchResult {
  Outcome outcome = Outcome::kOk;
  std::vector<DistObject> objects;
  std::optional<NodeId> holder;
};
struct InsertRequest {
  DistObject object;
  NodeId origin;
};
struct InsertResult {
  Outcome outcome = Outcome::kOk;
  ObjectId id;
};
struct UpdateRequestMsg {
  UpdateRequest request;
};
struct UpdateProgress {
  std::uint64_t version = 0;
};
struct UpdateResult {
  Outcome outcome = Outcome::kOk;
  std::uint64_t version = 0;
};

// RAgent to RAgent.
struct SearchForward {
  PatternKey criterion;
  SearchMode mode = SearchMode::kAll;
};
struct SearchPartial {
  std::vector<DistObject> objects;
  std::optional<NodeId> holder;
};
struct InsertDelegate {
  DistObject object;
};
struct InsertDelegateResult {
  Outcome outcome = Outcome::kOk;
  ObjectId id;
};
struct UpdateForward {
  UpdateRequest request;
};
struct UpdateForwardAck {
  bool accepted = false;
};
struct MigrateRequest {
  ObjectId object;
};
struct MigrateTransfer {
  DistObject object;
};
struct MigrateRefused {
  ObjectId object;
};

// RAgent to Agent data path.
struct FetchRequest {
  std::vector<ObjectId> objects;
};
struct FetchReply {
  std::vector<DistObject> objects;
  std::vector<ObjectId> missing;
  std::size_t replica_count = 0;
  std::uint64_t probe_steps = 0;
};
struct ApplyUpdate {
  ObjectId object;
  std::string payload;
};
struct UpdateApplied {
  ObjectId object;
  bool held = false;
  std::uint64_t version = 0;
  std::string payload;
};
struct ReplicaUpdate {
  DistObject object;
};
struct ReplicaUpdateAck {
  ObjectId object;
  std::uint64_t version = 0;
};

// Direct replica reads.
struct ReadRequest {
  ObjectId object;
};
struct ReadReply {
  std::optional<DistObject> object;
};

// An Agent declining a membership it no longer wants (stray join accept).
struct Leave {};

}  // namespace msg

using Message = std::variant<
    msg::LusQuery, msg::LusQueryReply, msg::LusDenied, msg::LusRegister, msg::LusDeregister,
    msg::LusReplicate, msg::JoinRequest, msg::JoinAccept, msg::JoinRedirect, msg::Heartbeat,
    msg::RAgentAlive, msg::PeerAlive, msg::Reassign, msg::RejoinDirective, msg::RAgentSuspect,
    msg::BackupSync, msg::BecomeRAgent, msg::PeerHello, msg::PeerGone, msg::MergeRequest,
    msg::MergeAccept, msg::MergeBusy, msg::ReplicaTransfer, msg::ReplicaStore,
    msg::ReplicaStored, msg::ReplicaTransferFailed, msg::ReplicaDrop, msg::ClientSearch,
    msg::ClientInsert, msg::ClientUpdate, msg::ClientProgress, msg::ClientResult,
    msg::SearchRequestMsg, msg::SearchResult, msg::InsertRequest, msg::InsertResult,
    msg::UpdateRequestMsg, msg::UpdateProgress, msg::UpdateResult, msg::SearchForward,
    msg::SearchPartial, msg::InsertDelegate, msg::InsertDelegateResult, msg::UpdateForward,
    msg::UpdateForwardAck, msg::MigrateRequest, msg::MigrateTransfer, msg::MigrateRefused,
    msg::FetchRequest, msg::FetchReply, msg::ApplyUpdate, msg::UpdateApplied,
    msg::ReplicaUpdate, msg::ReplicaUpdateAck, msg::ReadRequest, msg::ReadReply, msg::Leave>;

// Stable lowercase name of the message type, e.g. "fetch_request".
std::string_view message_kind(const Message& message);

// Compact deterministic rendering of the message payload.
std::string describe(const Message& message);

struct Envelope {
  NodeId src;
  NodeId dst;
  Role src_role = Role::kAgent;
  Role dst_role = Role::kAgent;
  std::uint64_t op = 0;
  std::uint32_t hops = 0;
  SimTime sent_at = 0;
  Message body;
};

}  // namespace spdht
