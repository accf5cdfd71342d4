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

// Agent-side behaviour of PeerNode: joining, replica storage, relaying client
// requests and RAgent failure detection.

#include <algorithm>
#include <variant>

#include "spdht/accounting.hpp"
#include "spdht/error.hpp"
#include "spdht/nodes.hpp"

namespace spdht {

namespace {

template <class T>
bool is(const Envelope& env) {
  return std::holds_alternative<T>(env.body);
}

}  // namespace

PeerNode::PeerNode(NodeId id, std::string name, Role declared, LocalityDescriptor locality)
    : Node(id, std::move(name), declared, std::move(locality)) {}

PeerNode::~PeerNode() = default;

const ClusterState* PeerNode::cluster() const {
  return mode_ == Mode::kRAgent && ra_ ? &ra_->cluster : nullptr;
}

void PeerNode::bootstrap_ragent(std::set<NodeId> peers) {
  mode_ = Mode::kRAgent;
  ra_ = std::make_unique<RAgentState>();
  ra_->cluster.ragent = id();
  ra_->cluster.peer_ragents = std::move(peers);
  for (NodeId p : ra_->cluster.peer_ragents) ra_->peer_info[p] = {};
}

void PeerNode::start(Context& ctx) {
  ctx.set_timer(ctx.config().heartbeat.period, {TimerKind::kHeartbeat});
  if (mode_ == Mode::kRAgent) {
    ra_->hot = HotCounter(ctx.config().migration_threshold);
    ctx.set_role(Role::kRAgent);
    return;
  }
  if (!dormant_) start_join(ctx);
}

void PeerNode::join_now(Context& ctx) {
  if (mode_ == Mode::kIdle) start_join(ctx);
}

void PeerNode::reset_volatile() {
  mode_ = Mode::kIdle;
  store_.clear();
  placed_by_.clear();
  ragent_ = NodeId{};
  config_ = {};
  suspected_ = false;
  voted_for_ = NodeId{};
  backup_.reset();
  join_tried_.clear();
  join_target_ = NodeId{};
  left_.clear();
  queued_.clear();
  relays_.clear();
  ra_.reset();
}

void PeerNode::restart(Context& ctx) {
  reset_volatile();
  pinned_used_ = true;
  ctx.set_role(Role::kAgent);
  ctx.set_timer(ctx.config().heartbeat.period, {TimerKind::kHeartbeat});
  start_join(ctx);
}

bool PeerNode::quiescent() const {
  if (mode_ == Mode::kJoining) return false;
  if (!queued_.empty()) return false;
  if (mode_ != Mode::kRAgent) return true;
  if (inflight() || reconfiguring() || ra_->split_wanted || !ra_->deferred.empty()) return false;
  // An undersized cluster with somewhere to merge still has work to do.
  return ra_->cluster.members.size() >= ra_->min_cluster || ra_->cluster.peer_ragents.empty();
}

NodeId PeerNode::home_lus(Context& ctx) const {
  NodeId best;
  int best_rank = -1;
  for (NodeId l : ctx.lus_nodes()) {
    const int rank = proximity_rank(locality(), ctx.locality_of(l));
    if (rank > best_rank) {
      best = l;
      best_rank = rank;
    }
  }
  return best;
}

// ---- message entry point ---------------------------------------------------

void PeerNode::on_message(const Envelope& env, Context& ctx) {
  if (is<msg::ReplicaTransfer>(env) || is<msg::ReplicaStore>(env) || is<msg::ReplicaDrop>(env) ||
      is<msg::FetchRequest>(env) || is<msg::ApplyUpdate>(env) || is<msg::ReplicaUpdate>(env) ||
      is<msg::ReadRequest>(env)) {
    handle_replica_message(env, ctx);
    return;
  }
  if (is<msg::ClientSearch>(env) || is<msg::ClientInsert>(env) || is<msg::ClientUpdate>(env)) {
    handle_client_message(env, ctx);
    return;
  }
  if (is<msg::SearchResult>(env) || is<msg::InsertResult>(env) || is<msg::UpdateProgress>(env) ||
      is<msg::UpdateResult>(env)) {
    relay_reply(env, ctx);
    return;
  }
  if (mode_ == Mode::kRAgent) {
    on_ragent_message(env, ctx);
  } else {
    on_agent_message(env, ctx);
  }
}

// ---- replica storage -------------------------------------------------------

void PeerNode::handle_replica_message(const Envelope& env, Context& ctx) {
  const std::uint32_t hops = env.hops + 1;
  if (const auto* m = std::get_if<msg::ReplicaTransfer>(&env.body)) {
    auto it = store_.find(m->object);
    if (it == store_.end()) {
      if (m->target.valid()) {
        ctx.send(m->reply_to, msg::ReplicaTransferFailed{m->object, m->target}, env.op, hops);
      }
      return;
    }
    if (m->target.valid()) ctx.send(m->target, msg::ReplicaStore{it->second, m->reply_to}, env.op, hops);
    if (m->drop) {
      store_.erase(it);
      placed_by_.erase(m->object);
    }
  } else if (const auto* m = std::get_if<msg::ReplicaStore>(&env.body)) {
    if (left_.contains(m->reply_to)) return;
    auto it = store_.find(m->object.id);
    if (it == store_.end() || it->second.version <= m->object.version) {
      store_[m->object.id] = m->object;
      ctx.audit_replica(m->object.id, m->object.version, true);
    }
    placed_by_[m->object.id] = m->reply_to;
    ctx.send(m->reply_to, msg::ReplicaStored{m->object.id, id()}, env.op, hops);
  } else if (const auto* m = std::get_if<msg::ReplicaDrop>(&env.body)) {
    store_.erase(m->object);
    placed_by_.erase(m->object);
  } else if (const auto* m = std::get_if<msg::FetchRequest>(&env.body)) {
    msg::FetchReply reply;
    reply.replica_count = store_.size();
    for (const ObjectId& oid : m->objects) {
      auto it = store_.find(oid);
      if (it == store_.end()) {
        reply.missing.push_back(oid);
      } else {
        reply.objects.push_back(it->second);
      }
    }
    reply.probe_steps = reply.objects.size() * ceil_log2(reply.replica_count);
    ctx.send(env.src, std::move(reply), env.op, hops);
  } else if (const auto* m = std::get_if<msg::ApplyUpdate>(&env.body)) {
    msg::UpdateApplied reply;
    reply.object = m->object;
    auto it = store_.find(m->object);
    if (it != store_.end() && !left_.contains(env.src)) {
      it->second.payload = m->payload;
      ++it->second.version;
      ctx.audit_replica(m->object, it->second.version, false);
      reply.held = true;
      reply.version = it->second.version;
      reply.payload = it->second.payload;
    }
    ctx.send(env.src, std::move(reply), env.op, hops);
  } else if (const auto* m = std::get_if<msg::ReplicaUpdate>(&env.body)) {
    if (left_.contains(env.src)) return;
    auto it = store_.find(m->object.id);
    if (it == store_.end()) {
      store_[m->object.id] = m->object;
      placed_by_[m->object.id] = env.src;
      ctx.audit_replica(m->object.id, m->object.version, true);
    } else if (m->object.version > it->second.version) {
      it->second = m->object;
      ctx.audit_replica(m->object.id, m->object.version, false);
    }
    ctx.send(env.src, msg::ReplicaUpdateAck{m->object.id, m->object.version}, env.op, hops);
  } else if (const auto* m = std::get_if<msg::ReadRequest>(&env.body)) {
    msg::ReadReply reply;
    if (auto it = store_.find(m->object); it != store_.end()) reply.object = it->second;
    ctx.send(env.src, std::move(reply), env.op, hops);
  }
}

// ---- client relay ----------------------------------------------------------

void PeerNode::handle_client_message(const Envelope& env, Context& ctx) {
  if (mode_ != Mode::kAgent && mode_ != Mode::kRAgent) {
    queued_.push_back(env);
    return;
  }
  Message request;
  if (const auto* m = std::get_if<msg::ClientSearch>(&env.body)) {
    request = msg::SearchRequestMsg{m->criterion, m->mode, id()};
  } else if (const auto* m = std::get_if<msg::ClientInsert>(&env.body)) {
    request = msg::InsertRequest{m->object, id()};
  } else if (const auto* m = std::get_if<msg::ClientUpdate>(&env.body)) {
    request = msg::UpdateRequestMsg{UpdateRequest{m->object, m->payload, id()}};
  } else {
    return;
  }
  relays_[env.op] = Relay{env.src, request};
  if (mode_ == Mode::kAgent) {
    ctx.send(ragent_, std::move(request), env.op, env.hops + 1);
    return;
  }
  Envelope local;
  local.src = id();
  local.dst = id();
  local.src_role = Role::kRAgent;
  local.dst_role = Role::kRAgent;
  local.op = env.op;
  local.hops = env.hops;
  local.sent_at = ctx.now();
  local.body = std::move(request);
  on_ragent_message(local, ctx);
}

void PeerNode::flush_queued(Context& ctx) {
  auto queued = std::move(queued_);
  queued_.clear();
  for (const auto& env : queued) handle_client_message(env, ctx);
}

void PeerNode::resend_relays(Context& ctx) {
  for (const auto& [op, relay] : relays_) {
    if (mode_ == Mode::kAgent) {
      ctx.send(ragent_, relay.request, op, 2);
      continue;
    }
    Envelope local;
    local.src = id();
    local.dst = id();
    local.src_role = Role::kRAgent;
    local.dst_role = Role::kRAgent;
    local.op = op;
    local.hops = 1;
    local.sent_at = ctx.now();
    local.body = relay.request;
    on_ragent_message(local, ctx);
  }
}

void PeerNode::relay_reply(const Envelope& env, Context& ctx) {
  auto it = relays_.find(env.op);
  if (it == relays_.end()) return;
  const NodeId client = it->second.client;
  const std::uint32_t hops = env.hops + 1;
  if (const auto* m = std::get_if<msg::SearchResult>(&env.body)) {
    relays_.erase(it);
    ctx.send(client, msg::ClientResult{m->outcome, m->objects, m->holder, 0}, env.op, hops);
  } else if (const auto* m = std::get_if<msg::InsertResult>(&env.body)) {
    relays_.erase(it);
    ctx.send(client, msg::ClientResult{m->outcome, {}, std::nullopt, 0}, env.op, hops);
  } else if (const auto* m = std::get_if<msg::UpdateProgress>(&env.body)) {
    ctx.send(client, msg::ClientProgress{m->version}, env.op, hops);
  } else if (const auto* m = std::get_if<msg::UpdateResult>(&env.body)) {
    relays_.erase(it);
    ctx.send(client, msg::ClientResult{m->outcome, {}, std::nullopt, m->version}, env.op, hops);
  }
}

void PeerNode::deliver_to_origin(NodeId origin, Message body, std::uint64_t op,
                                 std::uint32_t hops, Context& ctx) {
  if (origin != id()) {
    ctx.send(origin, std::move(body), op, hops);
    return;
  }
  Envelope local;
  local.src = id();
  local.dst = id();
  local.op = op;
  local.hops = hops;
  local.sent_at = ctx.now();
  local.body = std::move(body);
  relay_reply(local, ctx);
}

// ---- joining ---------------------------------------------------------------

void PeerNode::start_join(Context& ctx) {
  mode_ = Mode::kJoining;
  ++join_generation_;
  const SimTime wait =
      4 * ctx.config().round_trip_timeout() + 2 * ctx.config().heartbeat.failure_timeout;
  ctx.set_timer(wait, {TimerKind::kJoinTimeout, 0, NodeId{}, ObjectId{}, join_generation_});
  if (pinned_ && !pinned_used_) {
    pinned_used_ = true;
    join_target_ = *pinned_;
    join_tried_.insert(*pinned_);
    ctx.send(*pinned_, msg::JoinRequest{});
    return;
  }
  const NodeId lus = home_lus(ctx);
  if (lus.valid()) ctx.send(lus, msg::LusQuery{});
}

void PeerNode::rejoin_fresh(Context& ctx, std::string_view reason) {
  if (reason == "no_surviving_secondary") {
    for (const auto& [oid, obj] : store_) ctx.report_loss(oid);
  }
  ctx.member_event("rejoin_fresh", ragent_, id(), std::string(reason));
  auto relays = std::move(relays_);
  auto queued = std::move(queued_);
  reset_volatile();
  // Client requests that were waiting on the old cluster are retried once
  // the node is a member again.
  for (auto& [op, relay] : relays) {
    Envelope env;
    env.src = relay.client;
    env.dst = id();
    env.src_role = Role::kClient;
    env.op = op;
    env.hops = 1;
    env.sent_at = ctx.now();
    if (const auto* s = std::get_if<msg::SearchRequestMsg>(&relay.request)) {
      env.body = msg::ClientSearch{s->criterion, s->mode};
    } else if (const auto* i = std::get_if<msg::InsertRequest>(&relay.request)) {
      env.body = msg::ClientInsert{i->object};
    } else if (const auto* u = std::get_if<msg::UpdateRequestMsg>(&relay.request)) {
      env.body = msg::ClientUpdate{u->request.object_id, u->request.new_payload};
    } else {
      continue;
    }
    queued_.push_back(std::move(env));
  }
  for (auto& env : queued) queued_.push_back(std::move(env));
  start_join(ctx);
}

// ---- agent-mode messages ---------------------------------------------------

void PeerNode::on_agent_message(const Envelope& env, Context& ctx) {
  const NodeId src = env.src;
  if (const auto* m = std::get_if<msg::LusQueryReply>(&env.body)) {
    if (mode_ != Mode::kJoining) return;
    std::vector<JoinCandidate> all;
    std::vector<JoinCandidate> untried;
    for (const auto& e : m->entries) {
      if (e.ragent == id()) continue;
      JoinCandidate c{e.ragent, e.locality, e.connected_count};
      all.push_back(c);
      if (!join_tried_.contains(e.ragent)) untried.push_back(c);
    }
    if (all.empty()) {
      ClusterState state;
      state.ragent = id();
      become_ragent(std::move(state), ctx, "bootstrap");
      flush_queued(ctx);
      pump(ctx);
      return;
    }
    if (untried.empty()) {
      join_tried_.clear();
      untried = all;
    }
    const NodeId choice = join_select_ragent(untried, locality());
    join_tried_.insert(choice);
    join_target_ = choice;
    ctx.send(choice, msg::JoinRequest{});
  } else if (const auto* m = std::get_if<msg::JoinAccept>(&env.body)) {
    if (mode_ != Mode::kJoining || src != join_target_) {
      if (src != ragent_) {
        // Accepted by a RAgent this node no longer wants; undo it.
        left_.insert(src);
        for (auto it = placed_by_.begin(); it != placed_by_.end();) {
          if (it->second == src) {
            store_.erase(it->first);
            it = placed_by_.erase(it);
          } else {
            ++it;
          }
        }
        ctx.send(src, msg::Leave{});
      }
      return;
    }
    mode_ = Mode::kAgent;
    ctx.set_role(Role::kAgent);
    ragent_ = src;
    config_ = m->config;
    last_ragent_seen_ = ctx.now();
    suspected_ = false;
    left_.erase(src);
    join_tried_.clear();
    ctx.member_event("joined", src, id());
    flush_queued(ctx);
  } else if (is<msg::JoinRedirect>(env)) {
    if (mode_ == Mode::kJoining && src == join_target_) {
      const NodeId lus = home_lus(ctx);
      if (lus.valid()) ctx.send(lus, msg::LusQuery{});
    }
  } else if (const auto* m = std::get_if<msg::RAgentAlive>(&env.body)) {
    if (mode_ != Mode::kAgent || src != ragent_) return;
    last_ragent_seen_ = ctx.now();
    config_ = m->config;
    suspected_ = false;
  } else if (const auto* m = std::get_if<msg::Reassign>(&env.body)) {
    if (mode_ != Mode::kAgent) return;
    const bool from_current = src == ragent_;
    const bool from_secondary = config_.secondary && src == *config_.secondary;
    if (!from_current && !from_secondary && !suspected_) return;
    ragent_ = m->ragent;
    config_.ragent = m->ragent;
    last_ragent_seen_ = ctx.now();
    suspected_ = false;
    backup_.reset();
    ctx.send(ragent_, msg::Heartbeat{});
    // The previous RAgent failed; requests it never answered are re-sent.
    if (!from_current) resend_relays(ctx);
  } else if (is<msg::RejoinDirective>(env)) {
    if (mode_ == Mode::kAgent && src == ragent_) rejoin_fresh(ctx, "directive");
  } else if (const auto* m = std::get_if<msg::BackupSync>(&env.body)) {
    if (mode_ == Mode::kAgent && src == ragent_) backup_ = m->state;
  } else if (const auto* m = std::get_if<msg::RAgentSuspect>(&env.body)) {
    if (mode_ == Mode::kAgent && m->ragent == ragent_ && config_.secondary == id()) {
      promote_from_backup(ctx);
    }
  } else if (const auto* m = std::get_if<msg::BecomeRAgent>(&env.body)) {
    if (mode_ != Mode::kAgent || src != ragent_) return;
    become_ragent(*m->state, ctx, "split");
    for (NodeId p : ra_->cluster.peer_ragents) {
      if (p != src) {
        ctx.send(p, msg::PeerHello{std::nullopt, ra_->cluster.members.size(),
                                   ra_->cluster.catalogue.object_count()});
      }
    }
    issue_moves(m->moves, ctx);
    resend_relays(ctx);
    pump(ctx);
  } else {
    bounce(env, ctx);
  }
}

// Answers RAgent-only requests that reached a node which is no longer one.
void PeerNode::bounce(const Envelope& env, Context& ctx) {
  const std::uint32_t hops = env.hops + 1;
  if (is<msg::JoinRequest>(env)) {
    ctx.send(env.src, msg::JoinRedirect{}, env.op, hops);
  } else if (is<msg::SearchForward>(env)) {
    ctx.send(env.src, msg::SearchPartial{}, env.op, hops);
  } else if (const auto* m = std::get_if<msg::InsertDelegate>(&env.body)) {
    ctx.send(env.src, msg::InsertDelegateResult{Outcome::kTimeout, m->object.id}, env.op, hops);
  } else if (is<msg::UpdateForward>(env)) {
    ctx.send(env.src, msg::UpdateForwardAck{false}, env.op, hops);
  } else if (const auto* m = std::get_if<msg::MigrateRequest>(&env.body)) {
    ctx.send(env.src, msg::MigrateRefused{m->object}, env.op, hops);
  } else if (is<msg::MergeRequest>(env)) {
    ctx.send(env.src, msg::MergeBusy{}, env.op, hops);
  }
}

// ---- RAgent failure detection ------------------------------------------------

void PeerNode::agent_tick(Context& ctx) {
  if (!ragent_.valid()) return;
  ctx.send(ragent_, msg::Heartbeat{});
  if (suspected_) return;
  if (ctx.now() - last_ragent_seen_ <= ctx.config().heartbeat.failure_timeout) return;
  suspected_ = true;
  std::set<NodeId> electorate(config_.members.begin(), config_.members.end());
  if (config_.secondary) electorate.erase(*config_.secondary);
  if (!electorate.empty() && voted_for_ != ragent_) {
    voted_for_ = ragent_;
    ctx.member_event("vote", ragent_, id(), "secondary=" + ctx.name_of(elect_agent(electorate)));
  }
  if (config_.secondary == id()) {
    promote_from_backup(ctx);
    return;
  }
  if (!config_.secondary) {
    ctx.member_event("no_surviving_secondary", ragent_, id());
    rejoin_fresh(ctx, "no_surviving_secondary");
    return;
  }
  ctx.send(*config_.secondary, msg::RAgentSuspect{ragent_});
  ++suspect_generation_;
  ctx.set_timer(2 * ctx.config().heartbeat.failure_timeout,
                {TimerKind::kSuspectWait, 0, ragent_, ObjectId{}, suspect_generation_});
}

void PeerNode::promote_from_backup(Context& ctx) {
  const NodeId old = ragent_;
  if (!backup_ || backup_->ragent != old || backup_->secondary_backup != id()) {
    ctx.member_event("no_surviving_secondary", old, id(), "no_backup");
    rejoin_fresh(ctx, "no_surviving_secondary");
    return;
  }
  PromotionOutcome outcome = handle_ragent_failure(*backup_, {old});
  if (voted_for_ != old) {
    voted_for_ = old;
    std::set<NodeId> electorate(backup_->members);
    electorate.erase(id());
    if (!electorate.empty()) {
      ctx.member_event("vote", old, id(),
                       "secondary=" + ctx.name_of(elect_agent(electorate)));
    }
  }
  const std::set<NodeId> members = outcome.cluster.members;
  become_ragent(std::move(outcome.cluster), ctx, "failover");
  ctx.member_event("promote", id(), old);
  for (NodeId m : members) ctx.send(m, msg::Reassign{id()});
  const NodeId lus = home_lus(ctx);
  if (lus.valid()) ctx.send(lus, msg::LusDeregister{old});
  for (NodeId p : ra_->cluster.peer_ragents) {
    ctx.send(p, msg::PeerHello{old, ra_->cluster.members.size(),
                               ra_->cluster.catalogue.object_count()});
  }
  issue_moves(outcome.rehome, ctx);
  issue_moves(replenish_holders(ra_->cluster), ctx);
  resend_relays(ctx);
  pump(ctx);
}

// ---- timers ------------------------------------------------------------------

void PeerNode::on_timer(const TimerTag& tag, Context& ctx) {
  switch (tag.kind) {
    case TimerKind::kHeartbeat:
      ctx.set_timer(ctx.config().heartbeat.period, {TimerKind::kHeartbeat});
      if (mode_ == Mode::kAgent) {
        agent_tick(ctx);
      } else if (mode_ == Mode::kRAgent) {
        ragent_tick(ctx);
        pump(ctx);
      }
      return;
    case TimerKind::kJoinTimeout:
      if (tag.generation == join_generation_ && mode_ == Mode::kJoining) start_join(ctx);
      return;
    case TimerKind::kSuspectWait:
      if (mode_ == Mode::kAgent && suspected_ && tag.generation == suspect_generation_ &&
          tag.node == ragent_) {
        ctx.member_event("no_surviving_secondary", ragent_, id());
        rejoin_fresh(ctx, "no_surviving_secondary");
      }
      return;
    default:
      if (mode_ == Mode::kRAgent) {
        ragent_timer(tag, ctx);
        pump(ctx);
      }
      return;
  }
}

}  // namespace spdht
