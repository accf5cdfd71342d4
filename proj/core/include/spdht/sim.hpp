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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spdht/dataops.hpp"
#include "spdht/membership.hpp"
#include "spdht/messages.hpp"
#include "spdht/steps.hpp"
#include "spdht/types.hpp"

namespace spdht {

// Latency between two nodes: a base cost plus a penalty per missing
// proximity tier, plus a per-pair jitter fixed by the seed. Constant per
// ordered pair, so delivery is FIFO per (src, dst).
struct NetworkModel {
  SimTime base = from_millis(5);
  SimTime per_missing_tier = from_millis(10);
  SimTime jitter = from_millis(2);
  std::uint64_t seed = 1;

  SimTime latency(NodeId src, const LocalityDescriptor& src_loc, NodeId dst,
                  const LocalityDescriptor& dst_loc) const;
  SimTime max_latency() const noexcept { return base + 4 * per_missing_tier + jitter; }

  bool operator==(const NetworkModel&) const = default;
};

struct SimConfig {
  Thresholds thresholds;
  HeartbeatConfig heartbeat;
  NetworkModel network;
  DelegationPolicy delegation;
  std::size_t migration_threshold = 3;
  // Clients give up on an operation after this long.
  SimTime client_timeout = from_millis(30000);
  bool keep_trace = true;

  // Upper bound on a request/reply round trip.
  SimTime round_trip_timeout() const noexcept {
    return 2 * network.max_latency() + from_millis(1);
  }

  bool operator==(const SimConfig&) const = default;
};

enum class TimerKind : std::uint8_t {
  kHeartbeat,
  kJoinTimeout,
  kFetchTimeout,
  kApplyTimeout,
  kReplicaAckTimeout,
  kInsertAckTimeout,
  kDelegateTimeout,
  kPeerReplyTimeout,
  kForwardTimeout,
  kTransferTimeout,
  kSuspectWait,
  kMergeTimeout,
  kMigrateTimeout,
  kMigrateRetry,
  kClientTimeout,
  kFailoverWait,
};

std::string_view to_string(TimerKind kind);

struct TimerTag {
  TimerKind kind = TimerKind::kHeartbeat;
  std::uint64_t op = 0;
  NodeId node;
  ObjectId object;
  std::uint64_t generation = 0;
};

struct TraceRecord {
  SimTime time = 0;
  std::uint64_t seq = 0;
  NodeId node;
  std::string kind;
  std::uint64_t digest = 0;
};

using SimTrace = std::vector<TraceRecord>;

struct MemberEvent {
  SimTime time = 0;
  std::string kind;
  NodeId cluster;
  NodeId node;
  std::string detail;
};

enum class OpKind : std::uint8_t { kInsert, kSearch, kSearchFirst, kUpdate, kRead, kLusQuery };

std::string_view to_string(OpKind kind);

struct OpRecord {
  SimTime issued = 0;
  SimTime completed = 0;
  OpKind kind = OpKind::kSearch;
  std::uint64_t request = 0;
  Outcome outcome = Outcome::kIncomplete;
  std::vector<ObjectId> results;
  std::optional<NodeId> holder;
  std::uint64_t version = 0;
  std::size_t progress_notifications = 0;
  std::uint64_t messages = 0;
  std::uint64_t inter_ragent_messages = 0;
  std::uint32_t hops = 0;
  // Search accounting; zero for other kinds.
  std::uint64_t steps = 0;
  std::uint64_t bound = 0;
  std::uint64_t decomposed = 0;
};

struct ClientCommand {
  struct Insert {
    NodeId agent;
    DistObject object;
  };
  struct Search {
    NodeId agent;
    PatternKey criterion;
    SearchMode mode = SearchMode::kAll;
  };
  struct Update {
    NodeId agent;
    ObjectId object;
    std::string payload;
  };
  struct Read {
    // Unset: the holder returned by this client's last first-search.
    std::optional<NodeId> holder;
    ObjectId object;
  };
  struct QueryLus {
    NodeId lus;
  };
  std::variant<Insert, Search, Update, Read, QueryLus> action;
};

// Checks that run while the simulation executes.
struct AuditLog {
  std::vector<std::string> violations;
  // Versions committed by owners, per object, in commit order.
  std::map<ObjectId, std::vector<std::uint64_t>> committed;
  std::map<std::pair<NodeId, ObjectId>, std::uint64_t> replica_version;
  std::uint64_t dropped_at_crashed = 0;
  std::uint64_t emissions_from_crashed = 0;
};

class Simulator;
class Node;

// The handle a node uses while processing one event.
class Context {
 public:
  Context(Simulator& sim, NodeId self) : sim_(sim), self_(self) {}

  SimTime now() const;
  NodeId self() const noexcept { return self_; }
  const SimConfig& config() const;

  void send(NodeId dst, Message body, std::uint64_t op = 0, std::uint32_t hops = 0);
  void set_timer(SimTime delay, TimerTag tag);
  void set_role(Role role);

  Role role_of(NodeId node) const;
  const LocalityDescriptor& locality_of(NodeId node) const;
  std::vector<NodeId> lus_nodes() const;
  std::string name_of(NodeId node) const;

  StepCounter& steps();
  std::uint64_t next_internal_op();

  void member_event(std::string_view kind, NodeId cluster, NodeId node, std::string detail = {});
  void report_loss(const ObjectId& id);
  void complete_op(std::uint64_t op, OpKind kind, Outcome outcome,
                   const std::vector<DistObject>& objects, std::optional<NodeId> holder,
                   std::uint64_t version, std::size_t progress, std::uint32_t hops,
                   SimTime issued);

  void audit_owner_apply(const ObjectId& id, std::uint64_t version);
  void audit_replica(const ObjectId& id, std::uint64_t version, bool fresh_copy);

 private:
  Simulator& sim_;
  NodeId self_;
};

class Node {
 public:
  Node(NodeId id, std::string name, Role role, LocalityDescriptor locality)
      : id_(id), name_(std::move(name)), declared_role_(role), locality_(std::move(locality)) {}
  virtual ~Node() = default;

  NodeId id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  Role declared_role() const noexcept { return declared_role_; }
  const LocalityDescriptor& locality() const noexcept { return locality_; }

  virtual void start(Context&) {}
  virtual void on_message(const Envelope& env, Context& ctx) = 0;
  virtual void on_timer(const TimerTag&, Context&) {}
  // Called when a crashed node comes back; all volatile state is discarded.
  virtual void restart(Context&) {}
  // No in-flight protocol work.
  virtual bool quiescent() const { return true; }

 private:
  NodeId id_;
  std::string name_;
  Role declared_role_;
  LocalityDescriptor locality_;
};

struct MessageStats {
  std::map<std::string, std::uint64_t, std::less<>> delivered_by_kind;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

struct ClusterCensus {
  NodeId ragent;
  std::size_t members = 0;
  std::size_t objects = 0;
};

struct Metrics {
  SimTime time = 0;
  std::uint64_t seed = 0;
  std::vector<OpRecord> ops;
  std::vector<MemberEvent> member_events;
  MessageStats messages;
  std::vector<ClusterCensus> clusters;
  std::size_t ragents = 0;
  std::size_t agents = 0;
  std::size_t objects = 0;
  std::size_t replicas = 0;
  std::size_t lost = 0;
  std::size_t violations = 0;
};

class PeerNode;
class LusNode;
class ClientNode;

class Simulator {
 public:
  explicit Simulator(SimConfig config);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  NodeId add_lus(std::string name, LocalityDescriptor locality);
  NodeId add_ragent(std::string name, LocalityDescriptor locality);
  // `pinned` skips the LUS query for the first join; `dormant` agents only
  // join on an explicit join event.
  NodeId add_agent(std::string name, LocalityDescriptor locality,
                   std::optional<NodeId> pinned = std::nullopt, bool dormant = false);
  NodeId add_client(std::string name, LocalityDescriptor locality);

  // Seeds LUS registries and RAgent peer sets, and schedules initial joins.
  void start();

  // Returns the request id used for the operation.
  std::uint64_t schedule_client(SimTime at, NodeId client, ClientCommand command);
  // Throws UnknownNode.
  void inject_crash(NodeId node, SimTime at);
  // Throws UnknownNode. NotCrashed is raised if the node is live when the
  // rejoin fires; the event is then recorded as rejected.
  void inject_rejoin(NodeId node, SimTime at);
  void inject_join(NodeId node, SimTime at);

  // Processes every event with time <= t and returns the trace records added.
  SimTrace run_until(SimTime t);

  SimTime now() const noexcept { return now_; }
  const SimConfig& config() const noexcept { return config_; }

  // Inspection.
  std::vector<NodeId> node_ids() const;
  std::optional<NodeId> find(std::string_view name) const;
  const std::string& name_of(NodeId node) const;
  Role role_of(NodeId node) const;
  bool alive(NodeId node) const;
  const Node& node(NodeId node) const;
  const PeerNode* peer(NodeId node) const;
  const LusNode* lus(NodeId node) const;
  std::vector<NodeId> live_ragents() const;
  std::vector<NodeId> live_agents() const;
  std::vector<NodeId> lus_nodes() const;

  const std::vector<OpRecord>& ops() const noexcept { return ops_; }
  const OpRecord* op(std::uint64_t request) const;
  const std::vector<MemberEvent>& member_events() const noexcept { return member_events_; }
  const StepCounter& steps() const noexcept { return steps_; }
  const SimTrace& trace() const noexcept { return trace_; }
  const AuditLog& audit() const noexcept { return audit_; }
  const MessageStats& message_stats() const noexcept { return message_stats_; }
  const std::set<ObjectId>& reported_losses() const noexcept { return losses_; }
  std::vector<std::uint64_t> pending_ops() const;

  // Every peer and client has finished its in-flight work.
  bool quiescent() const;

  Metrics snapshot_metrics() const;

 private:
  friend class Context;

  struct NodeSlot {
    std::unique_ptr<Node> node;
    Role role = Role::kAgent;
    bool alive = true;
    bool dormant = false;
    SimTime restarted_at = -1;
    std::optional<NodeId> pinned;
  };

  struct TimerEvent {
    NodeId node;
    TimerTag tag;
    SimTime set_at = 0;
  };
  struct InjectEvent {
    enum class Kind : std::uint8_t { kCrash, kRejoin, kJoin, kCommand } kind = Kind::kCrash;
    NodeId node;
    std::uint64_t op = 0;
    std::optional<ClientCommand> command;
  };
  struct Event {
    SimTime time = 0;
    std::uint64_t seq = 0;
    std::variant<Envelope, TimerEvent, InjectEvent> what;
  };
  struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  struct OpMessages {
    std::uint64_t messages = 0;
    std::uint64_t inter_ragent = 0;
  };

  NodeId add_node(std::unique_ptr<Node> node, Role role);
  NodeSlot& slot(NodeId node);
  const NodeSlot& slot(NodeId node) const;
  void push(SimTime time, std::variant<Envelope, TimerEvent, InjectEvent> what);
  void dispatch(Event& event);
  void record(SimTime time, std::uint64_t seq, NodeId node, std::string kind,
              std::uint64_t digest);
  void send_from(NodeId src, NodeId dst, Message body, std::uint64_t op, std::uint32_t hops);

  SimConfig config_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_client_op_ = 1;
  std::uint64_t next_internal_op_ = 1ULL << 40;
  bool started_ = false;
  std::uint32_t next_node_id_ = 1;

  std::map<NodeId, NodeSlot> nodes_;
  std::vector<Event> queue_;

  std::vector<OpRecord> ops_;
  std::map<std::uint64_t, OpMessages> op_messages_;
  std::map<std::uint64_t, SimTime> op_issued_;
  std::vector<MemberEvent> member_events_;
  StepCounter steps_;
  SimTrace trace_;
  AuditLog audit_;
  MessageStats message_stats_;
  std::set<ObjectId> losses_;
};

}  // namespace spdht
