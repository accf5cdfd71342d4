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

// RAgent-side behaviour of PeerNode: membership, catalogue maintenance,
// search/insert/update coordination, failure repair and migration.

#include <algorithm>
#include <variant>

#include "spdht/accounting.hpp"
#include "spdht/error.hpp"
#include "spdht/nodes.hpp"

namespace spdht {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

// ---- mode changes ----------------------------------------------------------

void PeerNode::become_ragent(ClusterState state, Context& ctx, std::string_view reason) {
  mode_ = Mode::kRAgent;
  ctx.set_role(Role::kRAgent);
  ra_ = std::make_unique<RAgentState>();
  ra_->cluster = std::move(state);
  ra_->cluster.ragent = id();
  ra_->created_at = ctx.now();
  ra_->min_cluster = ctx.config().thresholds.min_cluster;
  ra_->hot = HotCounter(ctx.config().migration_threshold);
  for (NodeId m : ra_->cluster.members) ra_->last_seen[m] = ctx.now();
  for (NodeId p : ra_->cluster.peer_ragents) ra_->peer_info[p] = {ctx.now(), 0, 0};
  ragent_ = NodeId{};
  config_ = {};
  suspected_ = false;
  backup_.reset();
  ctx.member_event("become_ragent", id(), id(), std::string(reason));
  register_with_lus(ctx);
}

void PeerNode::demote(NodeId new_ragent, Context& ctx) {
  ra_.reset();
  mode_ = Mode::kAgent;
  ctx.set_role(Role::kAgent);
  ragent_ = new_ragent;
  config_ = ClusterConfig{new_ragent, std::nullopt, {}};
  last_ragent_seen_ = ctx.now();
  suspected_ = false;
  backup_.reset();
  ctx.member_event("demote", new_ragent, id());
  ctx.send(new_ragent, msg::Heartbeat{});
}

ClusterConfig PeerNode::cluster_config() const {
  const ClusterState& c = ra_->cluster;
  return ClusterConfig{id(), c.secondary_backup,
                       std::vector<NodeId>(c.members.begin(), c.members.end())};
}

void PeerNode::register_with_lus(Context& ctx) {
  const NodeId lus = home_lus(ctx);
  if (!lus.valid()) return;
  ctx.send(lus, msg::LusRegister{LusEntry{id(), locality(), ra_->cluster.members.size(), ctx.now()}});
}

bool PeerNode::reconfiguring() const {
  return !ra_->transfers.empty() || ra_->merge_target.has_value();
}

bool PeerNode::inflight() const {
  return !ra_->searches.empty() || !ra_->inserts.empty() || !ra_->updates.empty() ||
         !ra_->locks.empty() || !ra_->forwards.empty() || !ra_->migrations_out.empty() ||
         !ra_->migrations_in.empty();
}

void PeerNode::defer(const Envelope& env) {
  if (replaying_) {
    ra_->deferred.push_front(env);
  } else {
    ra_->deferred.push_back(env);
  }
}

void PeerNode::pump(Context& ctx) {
  if (pumping_ || mode_ != Mode::kRAgent) return;
  pumping_ = true;
  bool progressed = true;
  while (progressed && mode_ == Mode::kRAgent) {
    progressed = false;
    if (ra_->split_wanted && !reconfiguring() && !inflight()) {
      do_split(ctx);
      progressed = true;
      continue;
    }
    while (mode_ == Mode::kRAgent && !ra_->deferred.empty() && !reconfiguring() &&
           !ra_->split_wanted) {
      Envelope env = std::move(ra_->deferred.front());
      ra_->deferred.pop_front();
      replaying_ = true;
      handle_ragent(env, ctx);
      replaying_ = false;
      progressed = true;
    }
  }
  if (mode_ == Mode::kRAgent && ra_->dirty) {
    ra_->dirty = false;
    if (ra_->cluster.secondary_backup) {
      ctx.send(*ra_->cluster.secondary_backup,
               msg::BackupSync{std::make_shared<const ClusterState>(ra_->cluster)});
    }
  }
  pumping_ = false;
}

// ---- replica moves and failure repair ---------------------------------------

void PeerNode::issue_moves(const std::vector<ReplicaMove>& moves, Context& ctx) {
  const SimTime wait = 2 * ctx.config().round_trip_timeout();
  for (const ReplicaMove& mv : moves) {
    if (!mv.target.valid()) {
      if (mv.source == id()) {
        store_.erase(mv.object);
        placed_by_.erase(mv.object);
      } else {
        ctx.send(mv.source, msg::ReplicaTransfer{mv.object, NodeId{}, true, id()});
      }
      continue;
    }
    const std::uint64_t gen = ++ra_->transfer_generation;
    ra_->transfers[{mv.object, mv.target}] = Transfer{mv.source, gen};
    ctx.set_timer(wait, {TimerKind::kTransferTimeout, 0, mv.target, mv.object, gen});
    if (mv.source != id()) {
      ctx.send(mv.source, msg::ReplicaTransfer{mv.object, mv.target, mv.drop_source, id()});
      continue;
    }
    auto it = store_.find(mv.object);
    if (it == store_.end()) {
      transfer_failed(mv.object, mv.target, ctx);
      continue;
    }
    ctx.send(mv.target, msg::ReplicaStore{it->second, id()});
    if (mv.drop_source) {
      store_.erase(it);
      placed_by_.erase(mv.object);
    }
  }
}

// Removes `holder` from the object's holder list; an object left with no
// holder is lost.
void PeerNode::drop_holder(const ObjectId& oid, NodeId holder, Context& ctx) {
  ClusterState& c = ra_->cluster;
  if (!c.catalogue.contains(oid)) return;
  HolderList holders = c.catalogue.holders_of(oid);
  if (!holders.remove(holder)) return;
  if (c.loads.contains(holder)) c.loads.decrement(holder);
  if (holders.empty()) {
    c.catalogue.erase(oid);
    ctx.member_event("lost", id(), holder, oid.hex());
    ctx.report_loss(oid);
  } else {
    c.catalogue.replace_holders(oid, std::move(holders));
  }
  ra_->dirty = true;
}

void PeerNode::transfer_failed(const ObjectId& oid, NodeId target, Context& ctx) {
  if (ra_->transfers.erase({oid, target}) == 0) return;
  drop_holder(oid, target, ctx);
  ClusterState& c = ra_->cluster;
  if (!c.catalogue.contains(oid)) return;
  HolderList holders = c.catalogue.holders_of(oid);
  if (holders.size() >= 2) return;
  std::optional<NodeId> source;
  for (NodeId h : holders) {
    if (!ra_->transfers.contains({oid, h})) {
      source = h;
      break;
    }
  }
  if (!source) return;
  const std::set<NodeId> exclude(holders.begin(), holders.end());
  auto pick = c.loads.least_loaded(1, exclude);
  if (pick.empty()) return;
  holders.append(pick.front());
  c.loads.increment(pick.front());
  c.catalogue.replace_holders(oid, std::move(holders));
  issue_moves({{oid, *source, pick.front(), false}}, ctx);
  ra_->dirty = true;
}

void PeerNode::fail_members(std::set<NodeId> failed, std::string_view reason, Context& ctx) {
  ClusterState& c = ra_->cluster;
  for (auto it = failed.begin(); it != failed.end();) {
    it = c.members.contains(*it) ? std::next(it) : failed.erase(it);
  }
  if (failed.empty()) return;
  for (NodeId f : failed) ctx.member_event("agent_failed", id(), f, std::string(reason));

  // Copies still in flight from a failed source never arrive.
  for (auto it = ra_->transfers.begin(); it != ra_->transfers.end();) {
    const auto [oid, target] = it->first;
    if (failed.contains(target)) {
      it = ra_->transfers.erase(it);
    } else if (failed.contains(it->second.source)) {
      it = ra_->transfers.erase(it);
      drop_holder(oid, target, ctx);
    } else {
      ++it;
    }
  }

  AgentFailureOutcome outcome = handle_agent_failure(c, failed);
  c = std::move(outcome.cluster);
  for (const ObjectId& oid : outcome.lost) {
    ctx.member_event("lost", id(), NodeId{}, oid.hex());
    ctx.report_loss(oid);
  }
  for (NodeId f : failed) ra_->last_seen.erase(f);
  if (outcome.secondary_replaced) {
    ctx.member_event("secondary", id(), c.secondary_backup.value_or(NodeId{}));
  }
  issue_moves(outcome.repairs, ctx);
  ra_->dirty = true;
  register_with_lus(ctx);

  // In-flight searches: re-fetch from the surviving holders.
  for (auto& [op, sc] : ra_->searches) {
    std::vector<ObjectId> refetch;
    for (auto it = sc.outstanding.begin(); it != sc.outstanding.end();) {
      if (failed.contains(it->first)) {
        refetch.insert(refetch.end(), it->second.begin(), it->second.end());
        it = sc.outstanding.erase(it);
      } else {
        ++it;
      }
    }
    if (!refetch.empty()) fetch_for(sc, refetch, ctx);
  }
  std::vector<std::uint64_t> ops;
  for (const auto& [op, sc] : ra_->searches) ops.push_back(op);
  for (std::uint64_t op : ops) check_search(op, ctx);

  // Inserts waiting for acks from failed holders; repair already re-copied.
  ops.clear();
  for (auto& [op, ic] : ra_->inserts) {
    for (NodeId f : failed) ic.awaiting.erase(f);
    if (ic.awaiting.empty() && !ic.delegated_to) ops.push_back(op);
  }
  for (std::uint64_t op : ops) finish_insert(op, Outcome::kOk, ctx);

  // Updates: re-apply at the new owner or stop waiting for lost acks.
  ops.clear();
  std::vector<std::uint64_t> reapply;
  for (auto& [op, uc] : ra_->updates) {
    if (uc.applying && failed.contains(uc.owner)) {
      reapply.push_back(op);
    } else if (!uc.applying) {
      for (NodeId f : failed) uc.awaiting.erase(f);
      if (uc.awaiting.empty()) ops.push_back(op);
    }
  }
  for (std::uint64_t op : ops) {
    finish_update(op, Outcome::kOk, ra_->updates.at(op).applied.version, ctx);
  }
  for (std::uint64_t op : reapply) {
    auto it = ra_->updates.find(op);
    if (it == ra_->updates.end()) continue;
    const ObjectId oid = it->second.item.request.object_id;
    if (!c.catalogue.contains(oid)) {
      finish_update(op, Outcome::kObjectLost, 0, ctx);
      continue;
    }
    QueuedUpdate item = it->second.item;
    const std::uint32_t hops = it->second.hops;
    ra_->updates.erase(it);
    begin_update(item, hops, ctx);
  }

  // Migrations whose fetch went to a failed owner.
  ops.clear();
  for (const auto& [op, mo] : ra_->migrations_out) {
    if (failed.contains(mo.owner)) ops.push_back(op);
  }
  for (std::uint64_t op : ops) {
    MigrationOut mo = ra_->migrations_out.at(op);
    if (c.catalogue.contains(mo.object)) {
      mo.owner = c.catalogue.holders_of(mo.object).owner();
      ra_->migrations_out[op] = mo;
      ctx.send(mo.owner, msg::FetchRequest{{mo.object}}, op);
      ctx.set_timer(ctx.config().round_trip_timeout(),
                    {TimerKind::kFetchTimeout, op, mo.owner, mo.object, 0});
    } else {
      ra_->migrations_out.erase(op);
      ctx.send(mo.requester, msg::MigrateRefused{mo.object}, op);
      advance_lock(mo.object, ctx);
    }
  }
}

// ---- membership --------------------------------------------------------------

void PeerNode::admit(const Envelope& env, Context& ctx) {
  const NodeId joiner = env.src;
  ClusterState& c = ra_->cluster;
  if (c.members.contains(joiner)) {
    // The node crashed and came back before the heartbeat sweep noticed.
    ctx.member_event("transient_rejoin", id(), joiner);
    fail_members({joiner}, "rejoin", ctx);
    if (reconfiguring()) {
      defer(env);
      return;
    }
  }
  AdmitOutcome outcome = admit_agent(c, joiner, ctx.config().thresholds);
  c = std::move(outcome.cluster);
  ra_->last_seen[joiner] = ctx.now();
  ctx.send(joiner, msg::JoinAccept{cluster_config()}, env.op, env.hops + 1);
  issue_moves(outcome.replenish, ctx);
  ctx.member_event("admit", id(), joiner, "members=" + std::to_string(c.members.size()));
  if (outcome.split_scheduled) ra_->split_wanted = true;
  ra_->dirty = true;
  register_with_lus(ctx);
}

void PeerNode::do_split(Context& ctx) {
  ClusterState& c = ra_->cluster;
  ra_->split_wanted = false;
  if (c.members.size() <= ctx.config().thresholds.max_cluster) return;
  const std::size_t before = c.catalogue.entry_count();
  SplitOutcome out = split_cluster(c, ctx.config().thresholds);
  const NodeId fresh = out.new_ragent;
  const std::size_t moved_members = out.moved.members.size();
  const std::size_t moved_objects = out.moved.catalogue.object_count();
  const std::size_t moved_entries = out.moved.catalogue.entry_count();
  const std::size_t kept_entries = out.keep.catalogue.entry_count();
  const std::set<NodeId> moved_set = out.moved.members;
  c = std::move(out.keep);
  for (auto it = ra_->last_seen.begin(); it != ra_->last_seen.end();) {
    it = c.members.contains(it->first) ? std::next(it) : ra_->last_seen.erase(it);
  }
  ctx.send(fresh, msg::BecomeRAgent{std::make_shared<const ClusterState>(std::move(out.moved)),
                                    std::move(out.moved_moves)});
  for (NodeId m : moved_set) ctx.send(m, msg::Reassign{fresh});
  add_peer(fresh, ctx, moved_members, moved_objects);
  issue_moves(out.keep_moves, ctx);
  ctx.member_event("split", id(), fresh,
                   "before=" + std::to_string(before) + " kept=" + std::to_string(kept_entries) +
                       " moved=" + std::to_string(moved_entries));
  ra_->dirty = true;
  register_with_lus(ctx);
}

void PeerNode::maybe_merge(Context& ctx) {
  ClusterState& c = ra_->cluster;
  const auto& cfg = ctx.config();
  if (c.members.size() >= cfg.thresholds.min_cluster) return;
  if (reconfiguring() || ra_->split_wanted || inflight() || c.peer_ragents.empty()) return;
  // Wait until every peer has reported its size since this RAgent took over.
  for (NodeId p : c.peer_ragents) {
    auto it = ra_->peer_info.find(p);
    if (it == ra_->peer_info.end() || it->second.last_seen <= ra_->created_at) return;
  }
  std::vector<PeerSummary> peers;
  for (NodeId p : c.peer_ragents) {
    auto it = ra_->peer_info.find(p);
    peers.push_back({p, it == ra_->peer_info.end() ? 0 : it->second.members});
  }
  const NodeId target = select_merge_target(peers);
  ra_->merge_target = target;
  ctx.member_event("merge_request", id(), target);
  ctx.send(target, msg::MergeRequest{std::make_shared<const ClusterState>(c)});
  ctx.set_timer(2 * cfg.round_trip_timeout(), {TimerKind::kMergeTimeout, 0, target});
}

void PeerNode::on_merge_request(const Envelope& env, const msg::MergeRequest& m,
                                Context& ctx) {
  const NodeId small = env.src;
  if (ra_->merge_target) {
    if (*ra_->merge_target == small && id() > small) {
      ctx.member_event("merge_abort", id(), small);
      ra_->merge_target.reset();
    } else {
      ctx.send(small, msg::MergeBusy{}, env.op, env.hops + 1);
      return;
    }
  }
  if (reconfiguring() || ra_->split_wanted) {
    ctx.send(small, msg::MergeBusy{}, env.op, env.hops + 1);
    return;
  }
  ClusterState& c = ra_->cluster;
  const std::size_t before_target = c.catalogue.entry_count();
  const std::size_t before_small = m.state->catalogue.entry_count();
  ClusterState merged;
  try {
    merged = merge_clusters(*m.state, c);
  } catch (const ProtocolError&) {
    ctx.send(small, msg::MergeBusy{}, env.op, env.hops + 1);
    return;
  }
  c = std::move(merged);
  for (NodeId member : c.members) {
    if (!ra_->last_seen.contains(member)) ra_->last_seen[member] = ctx.now();
  }
  for (NodeId p : c.peer_ragents) {
    if (!ra_->peer_info.contains(p)) ra_->peer_info[p] = {ctx.now(), 0, 0};
  }
  ra_->peer_info.erase(small);
  ctx.send(small, msg::MergeAccept{}, env.op, env.hops + 1);
  ctx.member_event("merge", id(), small,
                   "before=" + std::to_string(before_target) + "+" +
                       std::to_string(before_small) +
                       " after=" + std::to_string(c.catalogue.entry_count()));
  if (c.members.size() > ctx.config().thresholds.max_cluster) ra_->split_wanted = true;
  issue_moves(replenish_holders(c), ctx);
  ra_->dirty = true;
  register_with_lus(ctx);
  // Searches still waiting on the absorbed cluster will not hear from it.
  forget_peer_waits(small, ctx);
}

void PeerNode::on_merge_accept(const Envelope& env, Context& ctx) {
  const NodeId target = env.src;
  const ClusterState& c = ra_->cluster;
  for (NodeId m : c.members) ctx.send(m, msg::Reassign{target});
  for (NodeId p : c.peer_ragents) {
    if (p != target) ctx.send(p, msg::PeerGone{target});
  }
  const NodeId lus = home_lus(ctx);
  if (lus.valid()) ctx.send(lus, msg::LusDeregister{id()});
  std::deque<Envelope> deferred = std::move(ra_->deferred);
  demote(target, ctx);
  for (const Envelope& d : deferred) {
    if (std::holds_alternative<msg::SearchRequestMsg>(d.body) ||
        std::holds_alternative<msg::InsertRequest>(d.body) ||
        std::holds_alternative<msg::UpdateRequestMsg>(d.body)) {
      ctx.send(target, d.body, d.op, d.hops + 1);
    } else {
      bounce(d, ctx);
    }
  }
}

void PeerNode::add_peer(NodeId peer, Context& ctx, std::size_t members,
                        std::size_t catalogue_size) {
  if (peer == id()) return;
  ra_->cluster.peer_ragents.insert(peer);
  ra_->peer_info[peer] = {ctx.now(), members, catalogue_size};
}

void PeerNode::forget_peer_waits(NodeId peer, Context& ctx) {
  std::vector<std::uint64_t> ops;
  for (auto& [op, sc] : ra_->searches) {
    if (sc.awaiting_peers.erase(peer) > 0) ops.push_back(op);
  }
  for (std::uint64_t op : ops) check_search(op, ctx);
  ops.clear();
  for (auto& [op, fc] : ra_->forwards) {
    if (fc.awaiting.erase(peer) > 0 && fc.awaiting.empty()) ops.push_back(op);
  }
  for (std::uint64_t op : ops) {
    const ForwardCtx fc = ra_->forwards.at(op);
    ra_->forwards.erase(op);
    deliver_to_origin(fc.initiator, msg::UpdateResult{Outcome::kUnknownObject, 0}, op,
                      fc.hops + 1, ctx);
  }
  ops.clear();
  for (const auto& [op, ic] : ra_->inserts) {
    if (ic.delegated_to == peer) ops.push_back(op);
  }
  for (std::uint64_t op : ops) finish_insert(op, Outcome::kTimeout, ctx);
  std::vector<ObjectId> migrations;
  for (const auto& [oid, mi] : ra_->migrations_in) {
    if (mi.source == peer) migrations.push_back(oid);
  }
  for (const ObjectId& oid : migrations) abandon_migration(oid);
  if (ra_->merge_target == peer) ra_->merge_target.reset();
}

void PeerNode::reroute_peer_waits(NodeId old_peer, NodeId replacement, Context& ctx) {
  const auto& cfg = ctx.config();
  const SimTime wait = 2 * cfg.heartbeat.failure_timeout + 4 * cfg.round_trip_timeout();
  for (auto& [op, sc] : ra_->searches) {
    if (sc.awaiting_peers.erase(old_peer) == 0) continue;
    sc.awaiting_peers.insert(replacement);
    ctx.send(replacement, msg::SearchForward{sc.criterion, sc.mode}, op, sc.hops + 1);
    ctx.set_timer(wait, {TimerKind::kPeerReplyTimeout, op, NodeId{}, ObjectId{},
                         ++sc.peer_generation});
  }
  for (auto& [op, fc] : ra_->forwards) {
    if (fc.awaiting.erase(old_peer) == 0) continue;
    fc.awaiting.insert(replacement);
    ctx.send(replacement, msg::UpdateForward{fc.request}, op, fc.hops + 1);
    ctx.set_timer(wait, {TimerKind::kForwardTimeout, op, NodeId{}, ObjectId{}, ++fc.generation});
  }
  for (auto& [op, ic] : ra_->inserts) {
    if (ic.delegated_to != old_peer) continue;
    ic.delegated_to = replacement;
    ic.rerouted = true;
    ctx.send(replacement, msg::InsertDelegate{ic.object}, op, ic.hops + 1);
    ctx.set_timer(wait, {TimerKind::kDelegateTimeout, op, replacement});
  }
  std::vector<ObjectId> migrations;
  for (const auto& [oid, mi] : ra_->migrations_in) {
    if (mi.source == old_peer) migrations.push_back(oid);
  }
  for (const ObjectId& oid : migrations) abandon_migration(oid);
  if (ra_->merge_target == old_peer) ra_->merge_target.reset();
}

void PeerNode::remove_peer(NodeId peer, Context& ctx) {
  ra_->cluster.peer_ragents.erase(peer);
  ra_->peer_info.erase(peer);
  ra_->dirty = true;
  forget_peer_waits(peer, ctx);
}

void PeerNode::ragent_tick(Context& ctx) {
  ClusterState& c = ra_->cluster;
  const auto& hb = ctx.config().heartbeat;
  const ClusterConfig cfg = cluster_config();
  for (NodeId m : c.members) ctx.send(m, msg::RAgentAlive{cfg});
  for (NodeId p : c.peer_ragents) {
    ctx.send(p, msg::PeerAlive{c.members.size(), c.catalogue.object_count()});
  }
  if (!ra_->merge_target) {
    const auto failed = detect_failures(c.members, ctx.now(), ra_->last_seen, hb);
    if (!failed.empty()) fail_members({failed.begin(), failed.end()}, "heartbeat", ctx);
  }
  std::vector<NodeId> dead_peers;
  for (const auto& [p, info] : ra_->peer_info) {
    if (ctx.now() - info.last_seen > hb.failure_timeout) dead_peers.push_back(p);
  }
  for (NodeId p : dead_peers) {
    ctx.member_event("peer_failed", id(), p);
    // Requests waiting on it are kept until a promoted replacement says hello.
    ra_->cluster.peer_ragents.erase(p);
    ra_->peer_info.erase(p);
    ra_->dirty = true;
    ra_->failed_peers.insert(p);
    if (ra_->merge_target == p) ra_->merge_target.reset();
    ctx.set_timer(hb.failure_timeout + 2 * ctx.config().round_trip_timeout(),
                  {TimerKind::kFailoverWait, 0, p});
    const NodeId lus = home_lus(ctx);
    if (lus.valid()) ctx.send(lus, msg::LusDeregister{p});
  }
  maybe_merge(ctx);
}

// ---- message dispatch ----------------------------------------------------------

void PeerNode::on_ragent_message(const Envelope& env, Context& ctx) {
  handle_ragent(env, ctx);
  pump(ctx);
}

void PeerNode::handle_ragent(const Envelope& env, Context& ctx) {
  if (mode_ != Mode::kRAgent) {
    on_agent_message(env, ctx);
    return;
  }
  const NodeId src = env.src;
  ClusterState& c = ra_->cluster;
  const bool defer_local = reconfiguring() || ra_->split_wanted;
  const bool defer_remote = reconfiguring();
  std::visit(
      Overloaded{
          [&](const msg::Heartbeat&) {
            if (c.members.contains(src)) {
              ra_->last_seen[src] = ctx.now();
            } else {
              ctx.send(src, msg::RejoinDirective{});
            }
          },
          [&](const msg::Leave&) { fail_members({src}, "leave", ctx); },
          [&](const msg::JoinRequest&) {
            if (defer_local) {
              defer(env);
            } else {
              admit(env, ctx);
            }
          },
          [&](const msg::PeerAlive& m) {
            if (src == id()) return;
            ra_->cluster.peer_ragents.insert(src);
            ra_->peer_info[src] = {ctx.now(), m.members, m.catalogue_size};
          },
          [&](const msg::PeerHello& m) {
            if (m.replaces && *m.replaces != id()) {
              const NodeId old = *m.replaces;
              reroute_peer_waits(old, src, ctx);
              ra_->failed_peers.erase(old);
              ra_->cluster.peer_ragents.erase(old);
              ra_->peer_info.erase(old);
            }
            add_peer(src, ctx, m.members, m.catalogue_size);
            ra_->dirty = true;
          },
          [&](const msg::PeerGone&) { remove_peer(src, ctx); },
          [&](const msg::JoinAccept&) { ctx.send(src, msg::Leave{}); },
          [&](const msg::LusQueryReply& m) {
            for (const auto& e : m.entries) {
              if (e.ragent == id() || c.peer_ragents.contains(e.ragent)) continue;
              add_peer(e.ragent, ctx, e.connected_count, 0);
              ctx.send(e.ragent,
                       msg::PeerHello{std::nullopt, c.members.size(), c.catalogue.object_count()});
              ra_->dirty = true;
            }
          },
          [&](const msg::MergeRequest& m) { on_merge_request(env, m, ctx); },
          [&](const msg::MergeAccept&) {
            if (ra_->merge_target == src) on_merge_accept(env, ctx);
          },
          [&](const msg::MergeBusy&) {
            if (ra_->merge_target == src) ra_->merge_target.reset();
          },
          [&](const msg::ReplicaStored& m) {
            if (auto it = ra_->inserts.find(env.op); it != ra_->inserts.end()) {
              it->second.hops = std::max(it->second.hops, env.hops);
              if (it->second.awaiting.erase(m.holder) > 0 && it->second.awaiting.empty()) {
                finish_insert(env.op, Outcome::kOk, ctx);
              }
            }
            ra_->transfers.erase({m.object, m.holder});
          },
          [&](const msg::ReplicaTransferFailed& m) { transfer_failed(m.object, m.target, ctx); },
          [&](const msg::SearchRequestMsg& m) {
            if (defer_local) {
              defer(env);
            } else {
              start_search(env, m.criterion, m.mode, true, m.origin, ctx);
            }
          },
          [&](const msg::SearchForward& m) {
            if (defer_remote) {
              defer(env);
            } else {
              start_search(env, m.criterion, m.mode, false, NodeId{}, ctx);
            }
          },
          [&](const msg::SearchPartial& m) {
            auto it = ra_->searches.find(env.op);
            if (it == ra_->searches.end()) return;
            SearchCtx& sc = it->second;
            if (sc.awaiting_peers.erase(src) == 0) return;
            sc.hops = std::max(sc.hops, env.hops);
            sc.remote.push_back(m.objects);
            if (sc.mode == SearchMode::kFirst && !m.objects.empty() && !sc.first_hit) {
              sc.first_hit = m.objects.front();
              sc.first_holder = m.holder;
              sc.first_cluster = src;
            }
            check_search(env.op, ctx);
          },
          [&](const msg::FetchReply& m) { on_fetch_reply(env, m, ctx); },
          [&](const msg::InsertRequest& m) {
            if (defer_local) {
              defer(env);
            } else {
              start_insert(env, m.object, m.origin, false, true, ctx);
            }
          },
          [&](const msg::InsertDelegate& m) {
            if (defer_remote) {
              defer(env);
            } else {
              start_insert(env, m.object, src, true, false, ctx);
            }
          },
          [&](const msg::InsertDelegateResult& m) {
            auto it = ra_->inserts.find(env.op);
            if (it == ra_->inserts.end() || it->second.delegated_to != src) return;
            it->second.hops = std::max(it->second.hops, env.hops);
            // The crashed RAgent may have stored it before failing over.
            const bool dup = it->second.rerouted && m.outcome == Outcome::kDuplicateObject;
            finish_insert(env.op, dup ? Outcome::kOk : m.outcome, ctx);
          },
          [&](const msg::UpdateRequestMsg& m) {
            if (defer_local) {
              defer(env);
            } else {
              route_update(env, m.request, ctx);
            }
          },
          [&](const msg::UpdateForward& m) {
            if (defer_remote) {
              defer(env);
              return;
            }
            const bool mine = c.catalogue.contains(m.request.object_id);
            ctx.send(src, msg::UpdateForwardAck{mine}, env.op, env.hops + 1);
            if (mine) accept_update(env.op, m.request, src, env.hops, ctx);
          },
          [&](const msg::UpdateForwardAck& m) {
            auto it = ra_->forwards.find(env.op);
            if (it == ra_->forwards.end()) return;
            if (m.accepted) {
              ra_->forwards.erase(it);
              return;
            }
            it->second.awaiting.erase(src);
            if (!it->second.awaiting.empty()) return;
            const ForwardCtx fc = it->second;
            ra_->forwards.erase(it);
            deliver_to_origin(fc.initiator, msg::UpdateResult{Outcome::kUnknownObject, 0}, env.op,
                              std::max(fc.hops, env.hops) + 1, ctx);
          },
          [&](const msg::UpdateApplied& m) { on_update_applied(env, m, ctx); },
          [&](const msg::ReplicaUpdateAck&) {
            auto it = ra_->updates.find(env.op);
            if (it == ra_->updates.end() || it->second.applying) return;
            it->second.hops = std::max(it->second.hops, env.hops);
            if (it->second.awaiting.erase(src) > 0 && it->second.awaiting.empty()) {
              finish_update(env.op, Outcome::kOk, it->second.applied.version, ctx);
            }
          },
          [&](const msg::MigrateRequest& m) {
            if (defer_remote) {
              defer(env);
            } else {
              on_migrate_request(env, m.object, ctx);
            }
          },
          [&](const msg::MigrateTransfer& m) { on_migrate_transfer(env, m.object, ctx); },
          [&](const msg::MigrateRefused& m) {
            auto it = ra_->migrations_in.find(m.object);
            if (it == ra_->migrations_in.end() || it->second.source != src) return;
            if (it->second.attempts >= 2) {
              abandon_migration(m.object);
              return;
            }
            ++it->second.attempts;
            ctx.set_timer(ctx.config().heartbeat.period,
                          {TimerKind::kMigrateRetry, it->second.op, src, m.object, 0});
          },
          [&](const auto&) {},
      },
      env.body);
}

void PeerNode::ragent_timer(const TimerTag& tag, Context& ctx) {
  ClusterState& c = ra_->cluster;
  switch (tag.kind) {
    case TimerKind::kFetchTimeout: {
      if (auto it = ra_->searches.find(tag.op);
          it != ra_->searches.end() && it->second.outstanding.contains(tag.node)) {
        if (ctx.now() < it->second.fetch_deadline[tag.node]) return;
        fail_members({tag.node}, "reactive", ctx);
      } else if (auto mo = ra_->migrations_out.find(tag.op);
                 mo != ra_->migrations_out.end() && mo->second.owner == tag.node) {
        fail_members({tag.node}, "reactive", ctx);
      }
      return;
    }
    case TimerKind::kApplyTimeout: {
      auto it = ra_->updates.find(tag.op);
      if (it != ra_->updates.end() && it->second.applying && it->second.owner == tag.node &&
          it->second.applied.version == tag.generation) {
        fail_members({tag.node}, "reactive", ctx);
      }
      return;
    }
    case TimerKind::kReplicaAckTimeout: {
      auto it = ra_->updates.find(tag.op);
      if (it != ra_->updates.end() && !it->second.applying && !it->second.awaiting.empty()) {
        fail_members(it->second.awaiting, "reactive", ctx);
        it = ra_->updates.find(tag.op);
        if (it != ra_->updates.end() && !it->second.applying) {
          // Holders that are no longer members cannot ack.
          for (auto h = it->second.awaiting.begin(); h != it->second.awaiting.end();) {
            h = c.members.contains(*h) ? std::next(h) : it->second.awaiting.erase(h);
          }
          if (it->second.awaiting.empty()) {
            finish_update(tag.op, Outcome::kOk, it->second.applied.version, ctx);
          }
        }
      }
      return;
    }
    case TimerKind::kInsertAckTimeout: {
      auto it = ra_->inserts.find(tag.op);
      if (it != ra_->inserts.end() && !it->second.delegated_to && !it->second.awaiting.empty()) {
        fail_members(it->second.awaiting, "reactive", ctx);
        it = ra_->inserts.find(tag.op);
        if (it != ra_->inserts.end() && !it->second.delegated_to) {
          for (auto h = it->second.awaiting.begin(); h != it->second.awaiting.end();) {
            h = c.members.contains(*h) ? std::next(h) : it->second.awaiting.erase(h);
          }
          if (it->second.awaiting.empty()) finish_insert(tag.op, Outcome::kOk, ctx);
        }
      }
      return;
    }
    case TimerKind::kDelegateTimeout: {
      auto it = ra_->inserts.find(tag.op);
      if (it != ra_->inserts.end() && it->second.delegated_to == tag.node) {
        finish_insert(tag.op, Outcome::kTimeout, ctx);
      }
      return;
    }
    case TimerKind::kFailoverWait:
      if (ra_->failed_peers.erase(tag.node) > 0) forget_peer_waits(tag.node, ctx);
      return;
    case TimerKind::kPeerReplyTimeout: {
      auto it = ra_->searches.find(tag.op);
      if (it != ra_->searches.end() && !it->second.awaiting_peers.empty() &&
          it->second.peer_generation == tag.generation) {
        it->second.awaiting_peers.clear();
        check_search(tag.op, ctx);
      }
      return;
    }
    case TimerKind::kForwardTimeout: {
      auto it = ra_->forwards.find(tag.op);
      if (it == ra_->forwards.end() || it->second.generation != tag.generation) return;
      const ForwardCtx fc = it->second;
      ra_->forwards.erase(it);
      deliver_to_origin(fc.initiator, msg::UpdateResult{Outcome::kTimeout, 0}, tag.op,
                        fc.hops + 1, ctx);
      return;
    }
    case TimerKind::kTransferTimeout: {
      auto it = ra_->transfers.find({tag.object, tag.node});
      if (it != ra_->transfers.end() && it->second.generation == tag.generation) {
        transfer_failed(tag.object, tag.node, ctx);
      }
      return;
    }
    case TimerKind::kMergeTimeout:
      if (ra_->merge_target == tag.node) ra_->merge_target.reset();
      return;
    case TimerKind::kMigrateTimeout: {
      auto it = ra_->migrations_in.find(tag.object);
      if (it != ra_->migrations_in.end() && it->second.op == tag.op) abandon_migration(tag.object);
      return;
    }
    case TimerKind::kMigrateRetry: {
      auto it = ra_->migrations_in.find(tag.object);
      if (it == ra_->migrations_in.end() || it->second.op != tag.op) return;
      ctx.send(it->second.source, msg::MigrateRequest{tag.object}, tag.op);
      return;
    }
    default:
      return;
  }
}

// ---- search ------------------------------------------------------------------

void PeerNode::start_search(const Envelope& env, const PatternKey& criterion, SearchMode mode,
                            bool is_origin, NodeId origin, Context& ctx) {
  const std::uint64_t op = env.op;
  if (ra_->searches.contains(op)) return;
  const ClusterState& c = ra_->cluster;
  SearchCtx sc;
  sc.op = op;
  sc.criterion = criterion;
  sc.mode = mode;
  sc.is_origin = is_origin;
  sc.origin = origin;
  sc.requester = is_origin ? NodeId{} : env.src;
  sc.hops = env.hops;

  LookupCost cost;
  std::vector<LookupHit> hits = c.catalogue.lookup(criterion, &cost);
  if (mode == SearchMode::kFirst && hits.size() > 1) hits.resize(1);
  ctx.steps().record_lookup(op, id(), criterion.kind, cost.keys_in_catalogue, hits.size(),
                            cost.key_steps);
  ctx.steps().add_id_owner_steps(op, id(), 2 * hits.size());

  SearchCtx& stored = ra_->searches.emplace(op, std::move(sc)).first->second;
  std::vector<ObjectId> ids;
  for (const auto& h : hits) ids.push_back(h.id);
  fetch_for(stored, ids, ctx);

  if (is_origin && (mode == SearchMode::kAll || hits.empty()) && !c.peer_ragents.empty()) {
    for (NodeId p : c.peer_ragents) {
      ctx.send(p, msg::SearchForward{criterion, mode}, op, env.hops + 1);
      stored.awaiting_peers.insert(p);
    }
    const auto& cfg = ctx.config();
    ctx.set_timer(2 * cfg.heartbeat.failure_timeout + 4 * cfg.round_trip_timeout(),
                  {TimerKind::kPeerReplyTimeout, op, NodeId{}, ObjectId{}, 0});
  }
  check_search(op, ctx);
}

void PeerNode::fetch_for(SearchCtx& sc, const std::vector<ObjectId>& ids, Context& ctx) {
  const ClusterState& c = ra_->cluster;
  std::map<NodeId, std::vector<ObjectId>> batches;
  for (const ObjectId& oid : ids) {
    if (!c.catalogue.contains(oid)) continue;
    auto& tried = sc.tried[oid];
    for (NodeId h : c.catalogue.holders_of(oid)) {
      if (tried.contains(h) || ra_->transfers.contains({oid, h})) continue;
      tried.insert(h);
      batches[h].push_back(oid);
      break;
    }
  }
  for (auto& [holder, batch] : batches) {
    auto& pending = sc.outstanding[holder];
    pending.insert(pending.end(), batch.begin(), batch.end());
    ctx.steps().add_fetch_message(sc.op, id(), holder);
    ctx.send(holder, msg::FetchRequest{batch}, sc.op, sc.hops + 1);
    sc.fetch_deadline[holder] = ctx.now() + ctx.config().round_trip_timeout();
    ctx.set_timer(ctx.config().round_trip_timeout(), {TimerKind::kFetchTimeout, sc.op, holder});
  }
}

void PeerNode::on_fetch_reply(const Envelope& env, const msg::FetchReply& m, Context& ctx) {
  if (auto mo = ra_->migrations_out.find(env.op); mo != ra_->migrations_out.end()) {
    if (env.src != mo->second.owner) return;
    const MigrationOut out = mo->second;
    ra_->migrations_out.erase(mo);
    ClusterState& c = ra_->cluster;
    if (m.objects.empty() || !c.catalogue.contains(out.object)) {
      ctx.send(out.requester, msg::MigrateRefused{out.object}, env.op);
      advance_lock(out.object, ctx);
      return;
    }
    const HolderList holders = c.catalogue.holders_of(out.object);
    c.catalogue.erase(out.object);
    for (NodeId h : holders) {
      if (c.loads.contains(h)) c.loads.decrement(h);
      ctx.send(h, msg::ReplicaDrop{out.object});
    }
    ctx.send(out.requester, msg::MigrateTransfer{m.objects.front()}, env.op);
    for (const QueuedUpdate& q : ra_->locks.release_all(out.object)) {
      ctx.send(out.requester, msg::UpdateForward{q.request}, q.request_id);
    }
    ctx.member_event("migrate_out", id(), out.requester, out.object.hex());
    ra_->dirty = true;
    return;
  }
  auto it = ra_->searches.find(env.op);
  if (it == ra_->searches.end()) return;
  SearchCtx& sc = it->second;
  auto pending = sc.outstanding.find(env.src);
  if (pending == sc.outstanding.end()) return;
  sc.hops = std::max(sc.hops, env.hops);
  const std::size_t n = m.objects.size();
  if (n > 0) {
    ctx.steps().add_fetch_steps(env.op, id(), 2 * n);
    ctx.steps().add_probes(env.op, id(), env.src, n, m.replica_count, m.probe_steps);
  }
  auto drop = [&](const ObjectId& oid) {
    auto& v = pending->second;
    if (auto p = std::find(v.begin(), v.end(), oid); p != v.end()) v.erase(p);
  };
  for (const DistObject& o : m.objects) {
    drop(o.id);
    sc.local.push_back(o);
    if (!sc.first_holder) sc.first_holder = env.src;
  }
  for (const ObjectId& oid : m.missing) drop(oid);
  if (pending->second.empty()) sc.outstanding.erase(pending);
  if (!m.missing.empty()) fetch_for(sc, m.missing, ctx);
  check_search(env.op, ctx);
}

void PeerNode::check_search(std::uint64_t op, Context& ctx) {
  auto it = ra_->searches.find(op);
  if (it == ra_->searches.end()) return;
  SearchCtx& sc = it->second;
  const std::uint32_t hops = sc.hops + 1;

  if (!sc.is_origin) {
    if (!sc.outstanding.empty()) return;
    msg::SearchPartial partial{merge_results({sc.local}), std::nullopt};
    if (!partial.objects.empty()) partial.holder = sc.first_holder;
    const NodeId requester = sc.requester;
    ra_->searches.erase(it);
    ctx.send(requester, std::move(partial), op, hops);
    return;
  }

  if (sc.mode == SearchMode::kAll) {
    if (!sc.outstanding.empty() || !sc.awaiting_peers.empty()) return;
    std::vector<std::vector<DistObject>> parts = sc.remote;
    parts.push_back(sc.local);
    std::vector<DistObject> results = merge_results(parts);
    const NodeId origin = sc.origin;
    ra_->searches.erase(it);
    const Outcome outcome = results.empty() ? Outcome::kEmpty : Outcome::kOk;
    deliver_to_origin(origin, msg::SearchResult{outcome, std::move(results), std::nullopt}, op,
                      hops, ctx);
    return;
  }

  // First mode: answer with the first object found.
  if (sc.outstanding.empty() && !sc.local.empty()) {
    msg::SearchResult result{Outcome::kOk, {sc.local.front()}, sc.first_holder};
    const NodeId origin = sc.origin;
    ra_->searches.erase(it);
    deliver_to_origin(origin, std::move(result), op, hops, ctx);
    return;
  }
  if (sc.first_hit && sc.outstanding.empty()) {
    msg::SearchResult result{Outcome::kOk, {*sc.first_hit}, sc.first_holder};
    const NodeId origin = sc.origin;
    const NodeId from = sc.first_cluster;
    const ObjectId oid = sc.first_hit->id;
    ra_->searches.erase(it);
    deliver_to_origin(origin, std::move(result), op, hops, ctx);
    ra_->hot.record(oid);
    if (ra_->hot.reached(oid)) start_migration(oid, from, ctx);
    return;
  }
  if (sc.outstanding.empty() && sc.awaiting_peers.empty()) {
    const NodeId origin = sc.origin;
    ra_->searches.erase(it);
    deliver_to_origin(origin, msg::SearchResult{Outcome::kEmpty, {}, std::nullopt}, op, hops, ctx);
  }
}

// ---- insert ------------------------------------------------------------------

void PeerNode::start_insert(const Envelope& env, const DistObject& object, NodeId reply_to,
                            bool delegated_in, bool may_delegate, Context& ctx) {
  const std::uint64_t op = env.op;
  const ClusterState& c = ra_->cluster;
  InsertCtx ic;
  ic.op = op;
  ic.object = object;
  ic.reply_to = reply_to;
  ic.delegated_in = delegated_in;
  ic.hops = env.hops;
  if (c.catalogue.contains(object.id)) {
    ra_->inserts[op] = ic;
    finish_insert(op, Outcome::kDuplicateObject, ctx);
    return;
  }
  if (may_delegate) {
    std::map<NodeId, std::size_t> sizes;
    for (NodeId p : c.peer_ragents) {
      auto info = ra_->peer_info.find(p);
      sizes[p] = info == ra_->peer_info.end() ? 0 : info->second.catalogue_size;
    }
    if (auto delegate = choose_delegate(c.catalogue.object_count(), sizes, ctx.config().delegation)) {
      ic.delegated_to = *delegate;
      ra_->inserts[op] = ic;
      ctx.send(*delegate, msg::InsertDelegate{object}, op, env.hops + 1);
      const auto& cfg = ctx.config();
      ctx.set_timer(2 * cfg.heartbeat.failure_timeout + 4 * cfg.round_trip_timeout(),
                    {TimerKind::kDelegateTimeout, op, *delegate});
      // Keep the peer's size estimate current until its next heartbeat.
      ++ra_->peer_info[*delegate].catalogue_size;
      return;
    }
  }
  place_object(std::move(ic), ctx);
}

void PeerNode::place_object(InsertCtx ic, Context& ctx) {
  ClusterState& c = ra_->cluster;
  const std::uint64_t op = ic.op;
  const std::size_t want = ic.migration ? std::min<std::size_t>(2, c.members.size()) : 2;
  if (c.members.size() < want || want == 0) {
    if (ic.migration) {
      ctx.member_event("lost", id(), NodeId{}, ic.object.id.hex());
      ctx.report_loss(ic.object.id);
      return;
    }
    ra_->inserts[op] = ic;
    finish_insert(op, Outcome::kInsufficientAgents, ctx);
    return;
  }
  std::vector<NodeId> holders;
  if (want == 2) {
    auto [a, b] = select_replica_holders(c.loads);
    holders = {a, b};
  } else {
    holders = c.loads.least_loaded(1);
  }
  c.catalogue.insert(ObjectMeta::of(ic.object), HolderList(holders));
  for (NodeId h : holders) {
    c.loads.increment(h);
    ctx.send(h, msg::ReplicaStore{ic.object, id()}, op, ic.hops + 1);
    ic.awaiting.insert(h);
  }
  ra_->inserts[op] = std::move(ic);
  ctx.set_timer(ctx.config().round_trip_timeout(), {TimerKind::kInsertAckTimeout, op});
  ra_->dirty = true;
}

void PeerNode::finish_insert(std::uint64_t op, Outcome outcome, Context& ctx) {
  auto it = ra_->inserts.find(op);
  if (it == ra_->inserts.end()) return;
  const InsertCtx ic = std::move(it->second);
  ra_->inserts.erase(it);
  if (ic.migration) return;
  const std::uint32_t hops = ic.hops + 1;
  if (ic.delegated_in) {
    ctx.send(ic.reply_to, msg::InsertDelegateResult{outcome, ic.object.id}, op, hops);
  } else {
    deliver_to_origin(ic.reply_to, msg::InsertResult{outcome, ic.object.id}, op, hops, ctx);
  }
}

// ---- update ------------------------------------------------------------------

void PeerNode::route_update(const Envelope& env, const UpdateRequest& request, Context& ctx) {
  const ClusterState& c = ra_->cluster;
  if (c.catalogue.contains(request.object_id)) {
    accept_update(env.op, request, std::nullopt, env.hops, ctx);
    return;
  }
  if (c.peer_ragents.empty()) {
    deliver_to_origin(request.initiator, msg::UpdateResult{Outcome::kUnknownObject, 0}, env.op,
                      env.hops + 1, ctx);
    return;
  }
  ForwardCtx fc{request.initiator, c.peer_ragents, env.hops, request};
  ra_->forwards[env.op] = fc;
  for (NodeId p : c.peer_ragents) {
    ctx.send(p, msg::UpdateForward{request}, env.op, env.hops + 1);
  }
  const auto& cfg = ctx.config();
  ctx.set_timer(2 * cfg.heartbeat.failure_timeout + 4 * cfg.round_trip_timeout(),
                {TimerKind::kForwardTimeout, env.op});
}

void PeerNode::accept_update(std::uint64_t op, const UpdateRequest& request,
                             std::optional<NodeId> forwarded_by, std::uint32_t hops,
                             Context& ctx) {
  const ClusterState& c = ra_->cluster;
  const ObjectId& oid = request.object_id;
  const auto& rec = c.catalogue.record(oid);
  std::uint64_t ahead = 0;
  if (const auto* lock = ra_->locks.find(oid)) ahead = 1 + lock->waiting.size();
  deliver_to_origin(request.initiator, msg::UpdateProgress{rec.meta.version + ahead + 1}, op,
                    hops + 1, ctx);
  QueuedUpdate item{op, request, forwarded_by};
  ra_->queued_hops[op] = hops;
  if (ra_->locks.acquire_or_queue(oid, rec.holders.owner(), item)) begin_update(item, hops, ctx);
}

void PeerNode::begin_update(const QueuedUpdate& item, std::uint32_t hops, Context& ctx) {
  const ClusterState& c = ra_->cluster;
  const ObjectId& oid = item.request.object_id;
  ra_->queued_hops.erase(item.request_id);
  if (!c.catalogue.contains(oid)) {
    UpdateCtx uc;
    uc.item = item;
    uc.hops = hops;
    ra_->updates[item.request_id] = uc;
    finish_update(item.request_id, Outcome::kUnknownObject, 0, ctx);
    return;
  }
  const auto& rec = c.catalogue.record(oid);
  const NodeId owner = rec.holders.owner();
  ra_->locks.set_holder(oid, owner);
  UpdateCtx uc;
  uc.item = item;
  uc.owner = owner;
  uc.applying = true;
  uc.hops = hops;
  uc.applied.version = rec.meta.version;
  ra_->updates[item.request_id] = uc;
  ctx.send(owner, msg::ApplyUpdate{oid, item.request.new_payload}, item.request_id, hops + 1);
  ctx.set_timer(ctx.config().round_trip_timeout(),
                {TimerKind::kApplyTimeout, item.request_id, owner, oid, rec.meta.version});
}

void PeerNode::on_update_applied(const Envelope& env, const msg::UpdateApplied& m,
                                 Context& ctx) {
  auto it = ra_->updates.find(env.op);
  if (it == ra_->updates.end() || !it->second.applying || it->second.owner != env.src) return;
  UpdateCtx& uc = it->second;
  uc.hops = std::max(uc.hops, env.hops);
  if (!m.held) {
    fail_members({env.src}, "reactive", ctx);
    return;
  }
  ClusterState& c = ra_->cluster;
  if (!c.catalogue.contains(m.object)) {
    finish_update(env.op, Outcome::kObjectLost, 0, ctx);
    return;
  }
  const auto& rec = c.catalogue.record(m.object);
  ctx.audit_owner_apply(m.object, m.version);
  c.catalogue.set_version(m.object, m.version);
  ra_->dirty = true;
  uc.applying = false;
  uc.applied = DistObject{m.object, rec.meta.type_tag, rec.meta.index_keys, m.payload, m.version};
  for (NodeId h : rec.holders) {
    if (h == uc.owner) continue;
    uc.awaiting.insert(h);
    ctx.send(h, msg::ReplicaUpdate{uc.applied}, env.op, uc.hops + 1);
  }
  if (uc.awaiting.empty()) {
    finish_update(env.op, Outcome::kOk, m.version, ctx);
    return;
  }
  ctx.set_timer(ctx.config().round_trip_timeout(), {TimerKind::kReplicaAckTimeout, env.op});
}

void PeerNode::finish_update(std::uint64_t op, Outcome outcome, std::uint64_t version,
                             Context& ctx) {
  auto it = ra_->updates.find(op);
  if (it == ra_->updates.end()) return;
  const UpdateCtx uc = std::move(it->second);
  ra_->updates.erase(it);
  deliver_to_origin(uc.item.request.initiator, msg::UpdateResult{outcome, version}, op,
                    uc.hops + 1, ctx);
  advance_lock(uc.item.request.object_id, ctx);
}

// Hands the object's lock to the next queued update, if any.
void PeerNode::advance_lock(const ObjectId& oid, Context& ctx) {
  if (!ra_->locks.locked(oid)) return;
  std::optional<QueuedUpdate> next = ra_->locks.release(oid);
  if (!next) return;
  const auto h = ra_->queued_hops.find(next->request_id);
  const std::uint32_t hops = h == ra_->queued_hops.end() ? 0 : h->second;
  begin_update(*next, hops, ctx);
}

// ---- hot-object migration ------------------------------------------------------

void PeerNode::start_migration(const ObjectId& oid, NodeId source, Context& ctx) {
  const ClusterState& c = ra_->cluster;
  if (ra_->migrations_in.contains(oid) || c.catalogue.contains(oid)) return;
  if (c.members.size() < 2 || !source.valid()) return;
  const std::uint64_t op = ctx.next_internal_op();
  ra_->migrations_in[oid] = MigrationIn{source, 1, op};
  ctx.member_event("migrate_request", id(), source, oid.hex());
  ctx.send(source, msg::MigrateRequest{oid}, op);
  ctx.set_timer(4 * ctx.config().round_trip_timeout() + 2 * ctx.config().heartbeat.period,
                {TimerKind::kMigrateTimeout, op, source, oid});
}

void PeerNode::abandon_migration(const ObjectId& oid) {
  ra_->migrations_in.erase(oid);
  ra_->hot.reset(oid);
}

void PeerNode::on_migrate_request(const Envelope& env, const ObjectId& oid, Context& ctx) {
  const ClusterState& c = ra_->cluster;
  if (!c.catalogue.contains(oid)) {
    ctx.send(env.src, msg::MigrateRefused{oid}, env.op);
    return;
  }
  const NodeId owner = c.catalogue.holders_of(oid).owner();
  if (!ra_->locks.try_acquire(oid, owner, env.op)) {
    ctx.send(env.src, msg::MigrateRefused{oid}, env.op);
    return;
  }
  ra_->migrations_out[env.op] = MigrationOut{oid, env.src, owner};
  ctx.send(owner, msg::FetchRequest{{oid}}, env.op);
  ctx.set_timer(ctx.config().round_trip_timeout(), {TimerKind::kFetchTimeout, env.op, owner, oid});
}

void PeerNode::on_migrate_transfer(const Envelope& env, const DistObject& object,
                                   Context& ctx) {
  ra_->migrations_in.erase(object.id);
  ra_->hot.reset(object.id);
  if (ra_->cluster.catalogue.contains(object.id)) return;
  InsertCtx ic;
  ic.op = env.op;
  ic.object = object;
  ic.reply_to = id();
  ic.migration = true;
  ic.hops = env.hops;
  place_object(std::move(ic), ctx);
  ctx.member_event("migrate_in", id(), env.src, object.id.hex());
}

}  // namespace spdht
