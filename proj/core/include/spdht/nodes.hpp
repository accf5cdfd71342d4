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
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spdht/dataops.hpp"
#include "spdht/lus.hpp"
#include "spdht/membership.hpp"
#include "spdht/messages.hpp"
#include "spdht/sim.hpp"

namespace spdht {

// One lookup-and-discovery service instance. Mutations are pushed to every
// sibling instance.
class LusNode : public Node {
 public:
  LusNode(NodeId id, std::string name, LocalityDescriptor locality)
      : Node(id, std::move(name), Role::kLus, std::move(locality)) {}

  // Pre-registers a declared RAgent before the run starts.
  void seed(NodeId ragent, const LocalityDescriptor& locality);
  const LusRegistry& registry() const noexcept { return registry_; }

  void on_message(const Envelope& env, Context& ctx) override;

 private:
  void replicate(bool add, const LusEntry& entry, Context& ctx);

  LusRegistry registry_;
};

// Issues scripted operations against an Agent and records their completion.
class ClientNode : public Node {
 public:
  ClientNode(NodeId id, std::string name, LocalityDescriptor locality)
      : Node(id, std::move(name), Role::kClient, std::move(locality)) {}

  void issue(std::uint64_t op, const ClientCommand& command, Context& ctx);
  void on_message(const Envelope& env, Context& ctx) override;
  void on_timer(const TimerTag& tag, Context& ctx) override;
  bool quiescent() const override { return pending_.empty(); }
  std::vector<std::uint64_t> pending() const;

 private:
  struct Pending {
    OpKind kind = OpKind::kSearch;
    SimTime issued = 0;
    std::size_t progress = 0;
  };
  void finish(std::uint64_t op, Outcome outcome, const std::vector<DistObject>& objects,
              std::optional<NodeId> holder, std::uint64_t version, std::uint32_t hops,
              Context& ctx);

  std::map<std::uint64_t, Pending> pending_;
  std::optional<NodeId> last_holder_;
};

// A peer that acts either as a plain Agent (holding replicas) or as the
// RAgent of a cluster, and can switch between the two at runtime.
class PeerNode : public Node {
 public:
  enum class Mode : std::uint8_t { kIdle, kJoining, kAgent, kRAgent };

  PeerNode(NodeId id, std::string name, Role declared, LocalityDescriptor locality);
  ~PeerNode() override;

  void set_pinned_ragent(NodeId ragent) { pinned_ = ragent; }
  void set_dormant(bool dormant) { dormant_ = dormant; }
  // Declared RAgents start with an empty cluster and know every other one.
  void bootstrap_ragent(std::set<NodeId> peers);
  void join_now(Context& ctx);

  void start(Context& ctx) override;
  void on_message(const Envelope& env, Context& ctx) override;
  void on_timer(const TimerTag& tag, Context& ctx) override;
  void restart(Context& ctx) override;
  bool quiescent() const override;

  Mode mode() const noexcept { return mode_; }
  const std::map<ObjectId, DistObject>& store() const noexcept { return store_; }
  // Agent mode: the RAgent this node reports to.
  NodeId ragent() const noexcept { return ragent_; }
  const ClusterConfig& config() const noexcept { return config_; }
  // RAgent mode only; nullptr otherwise.
  const ClusterState* cluster() const;
  // Secondary-backup copy of the RAgent's state, if this node holds one.
  const ClusterState* backup() const noexcept { return backup_.get(); }

 private:
  struct SearchCtx {
    std::uint64_t op = 0;
    PatternKey criterion;
    SearchMode mode = SearchMode::kAll;
    bool is_origin = true;
    NodeId origin;     // Agent to answer, at the origin RAgent
    NodeId requester;  // RAgent to answer, at a remote RAgent
    std::uint32_t hops = 0;
    std::map<NodeId, std::vector<ObjectId>> outstanding;
    std::map<ObjectId, std::set<NodeId>> tried;
    std::vector<DistObject> local;
    std::vector<std::vector<DistObject>> remote;
    std::set<NodeId> awaiting_peers;
    std::optional<DistObject> first_hit;
    std::optional<NodeId> first_holder;
    NodeId first_cluster;
    // Latest reply deadline per contacted holder.
    std::map<NodeId, SimTime> fetch_deadline;
    std::uint64_t peer_generation = 0;
  };
  struct InsertCtx {
    std::uint64_t op = 0;
    DistObject object;
    NodeId reply_to;
    bool delegated_in = false;
    bool migration = false;
    std::optional<NodeId> delegated_to;
    bool rerouted = false;  // delegation re-sent to a promoted RAgent
    std::set<NodeId> awaiting;
    std::uint32_t hops = 0;
  };
  struct UpdateCtx {
    QueuedUpdate item;
    NodeId owner;
    bool applying = true;
    std::set<NodeId> awaiting;
    DistObject applied;
    std::uint32_t hops = 0;
  };
  struct ForwardCtx {
    NodeId initiator;
    std::set<NodeId> awaiting;
    std::uint32_t hops = 0;
    UpdateRequest request;
    std::uint64_t generation = 0;
  };
  struct MigrationOut {
    ObjectId object;
    NodeId requester;
    NodeId owner;
  };
  struct MigrationIn {
    NodeId source;
    int attempts = 0;
    std::uint64_t op = 0;
  };
  struct PeerInfo {
    SimTime last_seen = 0;
    std::size_t members = 0;
    std::size_t catalogue_size = 0;
  };
  struct Transfer {
    NodeId source;
    std::uint64_t generation = 0;
  };
  struct RAgentState {
    ClusterState cluster;
    SimTime created_at = 0;
    std::size_t min_cluster = 0;
    std::map<NodeId, SimTime> last_seen;
    std::map<NodeId, PeerInfo> peer_info;
    LockTable locks;
    HotCounter hot;
    std::map<std::uint64_t, SearchCtx> searches;
    std::map<std::uint64_t, InsertCtx> inserts;
    std::map<std::uint64_t, UpdateCtx> updates;
    std::map<std::uint64_t, ForwardCtx> forwards;
    std::map<std::uint64_t, MigrationOut> migrations_out;
    std::map<ObjectId, MigrationIn> migrations_in;
    // (object, target) -> unconfirmed copy.
    std::map<std::pair<ObjectId, NodeId>, Transfer> transfers;
    std::uint64_t transfer_generation = 0;
    std::map<std::uint64_t, std::uint32_t> queued_hops;
    bool split_wanted = false;
    std::optional<NodeId> merge_target;
    // Silent peers whose replacement may still announce itself.
    std::set<NodeId> failed_peers;
    std::deque<Envelope> deferred;
    bool dirty = true;
  };
  struct Relay {
    NodeId client;
    Message request;
  };

  // Shared.
  void handle_replica_message(const Envelope& env, Context& ctx);
  void handle_client_message(const Envelope& env, Context& ctx);
  void relay_reply(const Envelope& env, Context& ctx);
  void resend_relays(Context& ctx);
  void deliver_to_origin(NodeId origin, Message body, std::uint64_t op, std::uint32_t hops,
                         Context& ctx);
  NodeId home_lus(Context& ctx) const;
  void reset_volatile();

  // Agent side.
  void start_join(Context& ctx);
  void on_agent_message(const Envelope& env, Context& ctx);
  void bounce(const Envelope& env, Context& ctx);
  void agent_tick(Context& ctx);
  void promote_from_backup(Context& ctx);
  void rejoin_fresh(Context& ctx, std::string_view reason);
  void flush_queued(Context& ctx);

  // RAgent side.
  void become_ragent(ClusterState state, Context& ctx, std::string_view reason);
  void demote(NodeId new_ragent, Context& ctx);
  ClusterConfig cluster_config() const;
  void on_ragent_message(const Envelope& env, Context& ctx);
  void handle_ragent(const Envelope& env, Context& ctx);
  void ragent_tick(Context& ctx);
  void ragent_timer(const TimerTag& tag, Context& ctx);
  void pump(Context& ctx);
  bool reconfiguring() const;
  bool inflight() const;
  void defer(const Envelope& env);
  void register_with_lus(Context& ctx);
  void issue_moves(const std::vector<ReplicaMove>& moves, Context& ctx);
  void drop_holder(const ObjectId& id, NodeId holder, Context& ctx);
  void fail_members(std::set<NodeId> failed, std::string_view reason, Context& ctx);
  void transfer_failed(const ObjectId& id, NodeId target, Context& ctx);
  void do_split(Context& ctx);
  void maybe_merge(Context& ctx);
  void on_merge_request(const Envelope& env, const msg::MergeRequest& m, Context& ctx);
  void on_merge_accept(const Envelope& env, Context& ctx);
  void remove_peer(NodeId peer, Context& ctx);
  void forget_peer_waits(NodeId peer, Context& ctx);
  void reroute_peer_waits(NodeId old_peer, NodeId replacement, Context& ctx);
  void add_peer(NodeId peer, Context& ctx, std::size_t members, std::size_t catalogue_size);

  void admit(const Envelope& env, Context& ctx);
  void start_search(const Envelope& env, const PatternKey& criterion, SearchMode mode,
                    bool is_origin, NodeId origin, Context& ctx);
  void fetch_for(SearchCtx& sc, const std::vector<ObjectId>& ids, Context& ctx);
  void check_search(std::uint64_t op, Context& ctx);
  void on_fetch_reply(const Envelope& env, const msg::FetchReply& reply, Context& ctx);
  void start_insert(const Envelope& env, const DistObject& object, NodeId reply_to,
                    bool delegated_in, bool may_delegate, Context& ctx);
  void place_object(InsertCtx ic, Context& ctx);
  void finish_insert(std::uint64_t op, Outcome outcome, Context& ctx);
  void route_update(const Envelope& env, const UpdateRequest& request, Context& ctx);
  void accept_update(std::uint64_t op, const UpdateRequest& request,
                     std::optional<NodeId> forwarded_by, std::uint32_t hops, Context& ctx);
  void begin_update(const QueuedUpdate& item, std::uint32_t hops, Context& ctx);
  void on_update_applied(const Envelope& env, const msg::UpdateApplied& m, Context& ctx);
  void finish_update(std::uint64_t op, Outcome outcome, std::uint64_t version, Context& ctx);
  void advance_lock(const ObjectId& id, Context& ctx);
  void start_migration(const ObjectId& id, NodeId source, Context& ctx);
  void abandon_migration(const ObjectId& id);
  void on_migrate_request(const Envelope& env, const ObjectId& id, Context& ctx);
  void on_migrate_transfer(const Envelope& env, const DistObject& object, Context& ctx);

  Mode mode_ = Mode::kIdle;
  std::optional<NodeId> pinned_;
  bool dormant_ = false;
  bool pinned_used_ = false;

  std::map<ObjectId, DistObject> store_;
  NodeId ragent_;
  ClusterConfig config_;
  SimTime last_ragent_seen_ = 0;
  bool suspected_ = false;
  std::uint64_t suspect_generation_ = 0;
  std::shared_ptr<const ClusterState> backup_;
  std::uint64_t join_generation_ = 0;
  std::set<NodeId> join_tried_;
  std::vector<Envelope> queued_;
  std::map<std::uint64_t, Relay> relays_;
  // Which RAgent asked this node to store each replica.
  std::map<ObjectId, NodeId> placed_by_;
  NodeId voted_for_;
  NodeId join_target_;
  // RAgents whose membership this node declined.
  std::set<NodeId> left_;

  std::unique_ptr<RAgentState> ra_;
  bool pumping_ = false;
  bool replaying_ = false;
  bool heartbeat_running_ = false;
};

}  // namespace spdht
