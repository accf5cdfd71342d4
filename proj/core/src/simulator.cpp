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

#include "spdht/sim.hpp"

#include <algorithm>
#include <sstream>

#include "spdht/error.hpp"
#include "spdht/nodes.hpp"

namespace spdht {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

SimTime NetworkModel::latency(NodeId src, const LocalityDescriptor& src_loc, NodeId dst,
                              const LocalityDescriptor& dst_loc) const {
  const int rank = proximity_rank(src_loc, dst_loc);
  SimTime t = base + per_missing_tier * (4 - rank);
  if (jitter > 0) {
    const std::uint64_t h =
        splitmix(seed ^ splitmix((std::uint64_t{src.value} << 32) | dst.value));
    t += static_cast<SimTime>(h % static_cast<std::uint64_t>(jitter + 1));
  }
  return std::max<SimTime>(t, 1);
}

std::string_view to_string(TimerKind kind) {
  switch (kind) {
    case TimerKind::kHeartbeat:
      return "heartbeat";
    case TimerKind::kJoinTimeout:
      return "join_timeout";
    case TimerKind::kFetchTimeout:
      return "fetch_timeout";
    case TimerKind::kApplyTimeout:
      return "apply_timeout";
    case TimerKind::kReplicaAckTimeout:
      return "replica_ack_timeout";
    case TimerKind::kInsertAckTimeout:
      return "insert_ack_timeout";
    case TimerKind::kDelegateTimeout:
      return "delegate_timeout";
    case TimerKind::kPeerReplyTimeout:
      return "peer_reply_timeout";
    case TimerKind::kForwardTimeout:
      return "forward_timeout";
    case TimerKind::kTransferTimeout:
      return "transfer_timeout";
    case TimerKind::kSuspectWait:
      return "suspect_wait";
    case TimerKind::kMergeTimeout:
      return "merge_timeout";
    case TimerKind::kMigrateTimeout:
      return "migrate_timeout";
    case TimerKind::kMigrateRetry:
      return "migrate_retry";
    case TimerKind::kClientTimeout:
      return "client_timeout";
    case TimerKind::kFailoverWait:
      return "failover_wait";
  }
  return "?";
}

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::kInsert:
      return "insert";
    case OpKind::kSearch:
      return "search";
    case OpKind::kSearchFirst:
      return "search_first";
    case OpKind::kUpdate:
      return "update";
    case OpKind::kRead:
      return "read";
    case OpKind::kLusQuery:
      return "lus_query";
  }
  return "?";
}

// ---- Context ---------------------------------------------------------------

SimTime Context::now() const { return sim_.now_; }
const SimConfig& Context::config() const { return sim_.config_; }

void Context::send(NodeId dst, Message body, std::uint64_t op, std::uint32_t hops) {
  sim_.send_from(self_, dst, std::move(body), op, hops);
}

void Context::set_timer(SimTime delay, TimerTag tag) {
  sim_.push(sim_.now_ + std::max<SimTime>(delay, 1),
            Simulator::TimerEvent{self_, tag, sim_.now_});
}

void Context::set_role(Role role) { sim_.slot(self_).role = role; }
Role Context::role_of(NodeId node) const { return sim_.role_of(node); }
const LocalityDescriptor& Context::locality_of(NodeId node) const {
  return sim_.node(node).locality();
}
std::vector<NodeId> Context::lus_nodes() const { return sim_.lus_nodes(); }
std::string Context::name_of(NodeId node) const { return sim_.name_of(node); }
StepCounter& Context::steps() { return sim_.steps_; }
std::uint64_t Context::next_internal_op() { return sim_.next_internal_op_++; }

void Context::member_event(std::string_view kind, NodeId cluster, NodeId node,
                           std::string detail) {
  sim_.member_events_.push_back(
      {sim_.now_, std::string(kind), cluster, node, std::move(detail)});
}

void Context::report_loss(const ObjectId& id) { sim_.losses_.insert(id); }

void Context::complete_op(std::uint64_t op, OpKind kind, Outcome outcome,
                          const std::vector<DistObject>& objects, std::optional<NodeId> holder,
                          std::uint64_t version, std::size_t progress, std::uint32_t hops,
                          SimTime issued) {
  OpRecord rec;
  rec.issued = issued;
  rec.completed = sim_.now_;
  rec.kind = kind;
  rec.request = op;
  rec.outcome = outcome;
  for (const auto& o : objects) rec.results.push_back(o.id);
  rec.holder = holder;
  rec.version = version;
  rec.progress_notifications = progress;
  rec.hops = hops;
  if (auto it = sim_.op_messages_.find(op); it != sim_.op_messages_.end()) {
    rec.messages = it->second.messages;
    rec.inter_ragent_messages = it->second.inter_ragent;
  }
  if ((kind == OpKind::kSearch || kind == OpKind::kSearchFirst) && sim_.steps_.find(op)) {
    const SearchAccount acc = account_search(sim_.steps_, op);
    rec.steps = acc.measured;
    rec.bound = acc.bound;
    rec.decomposed = acc.decomposed;
  }
  sim_.ops_.push_back(std::move(rec));
}

void Context::audit_owner_apply(const ObjectId& id, std::uint64_t version) {
  auto& seq = sim_.audit_.committed[id];
  const std::uint64_t expected = seq.empty() ? 1 : seq.back() + 1;
  if (version != expected) {
    std::ostringstream out;
    out << "owner_version_gap t=" << sim_.now_ << " object=" << id.short_hex()
        << " expected=" << expected << " got=" << version;
    sim_.audit_.violations.push_back(out.str());
  }
  seq.push_back(version);
}

void Context::audit_replica(const ObjectId& id, std::uint64_t version, bool fresh_copy) {
  auto key = std::make_pair(self_, id);
  auto it = sim_.audit_.replica_version.find(key);
  if (!fresh_copy && it != sim_.audit_.replica_version.end() && version != it->second + 1) {
    std::ostringstream out;
    out << "replica_version_gap t=" << sim_.now_ << " node=" << self_.value
        << " object=" << id.short_hex() << " had=" << it->second << " got=" << version;
    sim_.audit_.violations.push_back(out.str());
  }
  sim_.audit_.replica_version[key] = version;
}

// ---- Simulator -------------------------------------------------------------

Simulator::Simulator(SimConfig config) : config_(std::move(config)) {
  if (!config_.thresholds.valid()) fail(ErrorCode::kInvalidArgument, "thresholds");
  if (!config_.heartbeat.valid()) fail(ErrorCode::kInvalidArgument, "heartbeat");
}

Simulator::~Simulator() = default;

NodeId Simulator::add_node(std::unique_ptr<Node> node, Role role) {
  if (started_) fail(ErrorCode::kInvalidArgument, "nodes must be added before start");
  const NodeId id = node->id();
  NodeSlot s;
  s.node = std::move(node);
  s.role = role;
  nodes_.emplace(id, std::move(s));
  return id;
}

NodeId Simulator::add_lus(std::string name, LocalityDescriptor locality) {
  const NodeId id{next_node_id_++};
  return add_node(std::make_unique<LusNode>(id, std::move(name), std::move(locality)), Role::kLus);
}

NodeId Simulator::add_ragent(std::string name, LocalityDescriptor locality) {
  const NodeId id{next_node_id_++};
  return add_node(
      std::make_unique<PeerNode>(id, std::move(name), Role::kRAgent, std::move(locality)),
      Role::kRAgent);
}

NodeId Simulator::add_agent(std::string name, LocalityDescriptor locality,
                            std::optional<NodeId> pinned, bool dormant) {
  const NodeId id{next_node_id_++};
  auto node = std::make_unique<PeerNode>(id, std::move(name), Role::kAgent, std::move(locality));
  if (pinned) node->set_pinned_ragent(*pinned);
  node->set_dormant(dormant);
  add_node(std::move(node), Role::kAgent);
  slot(id).dormant = dormant;
  slot(id).pinned = pinned;
  return id;
}

NodeId Simulator::add_client(std::string name, LocalityDescriptor locality) {
  const NodeId id{next_node_id_++};
  return add_node(std::make_unique<ClientNode>(id, std::move(name), std::move(locality)),
                  Role::kClient);
}

Simulator::NodeSlot& Simulator::slot(NodeId node) {
  auto it = nodes_.find(node);
  if (it == nodes_.end()) fail(ErrorCode::kUnknownNode, std::to_string(node.value));
  return it->second;
}

const Simulator::NodeSlot& Simulator::slot(NodeId node) const {
  auto it = nodes_.find(node);
  if (it == nodes_.end()) fail(ErrorCode::kUnknownNode, std::to_string(node.value));
  return it->second;
}

void Simulator::start() {
  if (started_) return;
  started_ = true;
  std::vector<NodeId> ragents;
  for (const auto& [id, s] : nodes_) {
    if (s.node->declared_role() == Role::kRAgent) ragents.push_back(id);
  }
  for (auto& [id, s] : nodes_) {
    if (auto* l = dynamic_cast<LusNode*>(s.node.get())) {
      for (NodeId r : ragents) l->seed(r, node(r).locality());
    }
  }
  for (auto& [id, s] : nodes_) {
    if (auto* p = dynamic_cast<PeerNode*>(s.node.get());
        p != nullptr && s.node->declared_role() == Role::kRAgent) {
      std::set<NodeId> peers(ragents.begin(), ragents.end());
      peers.erase(id);
      p->bootstrap_ragent(std::move(peers));
    }
  }
  for (auto& [id, s] : nodes_) {
    Context ctx(*this, id);
    s.node->start(ctx);
  }
}

std::uint64_t Simulator::schedule_client(SimTime at, NodeId client, ClientCommand command) {
  if (slot(client).role != Role::kClient) fail(ErrorCode::kInvalidArgument, "not a client");
  const std::uint64_t op = next_client_op_++;
  InjectEvent ev;
  ev.kind = InjectEvent::Kind::kCommand;
  ev.node = client;
  ev.op = op;
  ev.command = std::move(command);
  push(at, std::move(ev));
  return op;
}

void Simulator::inject_crash(NodeId node, SimTime at) {
  slot(node);
  push(at, InjectEvent{InjectEvent::Kind::kCrash, node, 0, std::nullopt});
}

void Simulator::inject_rejoin(NodeId node, SimTime at) {
  slot(node);
  push(at, InjectEvent{InjectEvent::Kind::kRejoin, node, 0, std::nullopt});
}

void Simulator::inject_join(NodeId node, SimTime at) {
  slot(node);
  push(at, InjectEvent{InjectEvent::Kind::kJoin, node, 0, std::nullopt});
}

void Simulator::push(SimTime time, std::variant<Envelope, TimerEvent, InjectEvent> what) {
  queue_.push_back(Event{time, next_seq_++, std::move(what)});
  std::push_heap(queue_.begin(), queue_.end(), EventLater{});
}

void Simulator::send_from(NodeId src, NodeId dst, Message body, std::uint64_t op,
                          std::uint32_t hops) {
  NodeSlot& from = slot(src);
  if (!from.alive) {
    ++audit_.emissions_from_crashed;
    return;
  }
  const NodeSlot& to = slot(dst);
  Envelope env;
  env.src = src;
  env.dst = dst;
  env.src_role = from.role;
  env.dst_role = to.role;
  env.op = op;
  env.hops = hops;
  env.sent_at = now_;
  env.body = std::move(body);
  const SimTime delay =
      config_.network.latency(src, from.node->locality(), dst, to.node->locality());
  push(now_ + delay, std::move(env));
}

void Simulator::record(SimTime time, std::uint64_t seq, NodeId node, std::string kind,
                       std::uint64_t digest) {
  if (!config_.keep_trace) return;
  trace_.push_back({time, seq, node, std::move(kind), digest});
}

void Simulator::dispatch(Event& event) {
  if (auto* env = std::get_if<Envelope>(&event.what)) {
    NodeSlot& to = slot(env->dst);
    const std::string kind(message_kind(env->body));
    if (!to.alive || env->sent_at < to.restarted_at) {
      ++message_stats_.dropped;
      if (!to.alive) ++audit_.dropped_at_crashed;
      record(event.time, event.seq, env->dst, "drop:" + kind, fnv1a(describe(env->body)));
      return;
    }
    ++message_stats_.delivered;
    ++message_stats_.delivered_by_kind[kind];
    if (env->op != 0) {
      auto& m = op_messages_[env->op];
      ++m.messages;
      if (env->src_role == Role::kRAgent && env->dst_role == Role::kRAgent &&
          env->src != env->dst) {
        ++m.inter_ragent;
      }
    }
    record(event.time, event.seq, env->dst, "deliver:" + kind, fnv1a(describe(env->body)));
    Context ctx(*this, env->dst);
    to.node->on_message(*env, ctx);
    return;
  }
  if (auto* timer = std::get_if<TimerEvent>(&event.what)) {
    NodeSlot& s = slot(timer->node);
    if (!s.alive || timer->set_at < s.restarted_at) return;
    std::ostringstream desc;
    desc << to_string(timer->tag.kind) << ' ' << timer->tag.op << ' ' << timer->tag.node.value
         << ' ' << timer->tag.generation;
    record(event.time, event.seq, timer->node, "timer:" + std::string(to_string(timer->tag.kind)),
           fnv1a(desc.str()));
    Context ctx(*this, timer->node);
    s.node->on_timer(timer->tag, ctx);
    return;
  }
  auto& inject = std::get<InjectEvent>(event.what);
  NodeSlot& s = slot(inject.node);
  Context ctx(*this, inject.node);
  switch (inject.kind) {
    case InjectEvent::Kind::kCrash:
      record(event.time, event.seq, inject.node, "inject:crash", 0);
      if (s.alive) {
        s.alive = false;
        member_events_.push_back({now_, "crash", NodeId{}, inject.node, {}});
      }
      break;
    case InjectEvent::Kind::kRejoin:
      record(event.time, event.seq, inject.node, "inject:rejoin", 0);
      if (s.alive) {
        member_events_.push_back({now_, "rejoin_rejected", NodeId{}, inject.node,
                                  std::string(to_string(ErrorCode::kNotCrashed))});
        break;
      }
      s.alive = true;
      s.restarted_at = now_;
      s.role = s.node->declared_role() == Role::kRAgent ? Role::kAgent : s.node->declared_role();
      for (auto it = audit_.replica_version.begin(); it != audit_.replica_version.end();) {
        it = it->first.first == inject.node ? audit_.replica_version.erase(it) : std::next(it);
      }
      member_events_.push_back({now_, "rejoin", NodeId{}, inject.node, {}});
      s.node->restart(ctx);
      break;
    case InjectEvent::Kind::kJoin:
      record(event.time, event.seq, inject.node, "inject:join", 0);
      if (auto* p = dynamic_cast<PeerNode*>(s.node.get()); p != nullptr && s.alive) {
        p->join_now(ctx);
      }
      break;
    case InjectEvent::Kind::kCommand: {
      record(event.time, event.seq, inject.node, "inject:command", inject.op);
      op_issued_[inject.op] = now_;
      if (!s.alive) break;
      if (auto* c = dynamic_cast<ClientNode*>(s.node.get())) c->issue(inject.op, *inject.command, ctx);
      break;
    }
  }
}

SimTrace Simulator::run_until(SimTime t) {
  if (!started_) start();
  const std::size_t before = trace_.size();
  while (!queue_.empty() && queue_.front().time <= t) {
    std::pop_heap(queue_.begin(), queue_.end(), EventLater{});
    Event event = std::move(queue_.back());
    queue_.pop_back();
    now_ = event.time;
    dispatch(event);
  }
  now_ = std::max(now_, t);
  std::size_t live_objects = 0;
  for (NodeId r : live_ragents()) live_objects += peer(r)->cluster()->catalogue.object_count();
  steps_.set_globals(live_ragents().size(), live_agents().size(), live_objects);
  return SimTrace(trace_.begin() + static_cast<std::ptrdiff_t>(before), trace_.end());
}

std::vector<NodeId> Simulator::node_ids() const {
  std::vector<NodeId> out;
  for (const auto& [id, s] : nodes_) out.push_back(id);
  return out;
}

std::optional<NodeId> Simulator::find(std::string_view name) const {
  for (const auto& [id, s] : nodes_) {
    if (s.node->name() == name) return id;
  }
  return std::nullopt;
}

const std::string& Simulator::name_of(NodeId node) const { return slot(node).node->name(); }
Role Simulator::role_of(NodeId node) const { return slot(node).role; }
bool Simulator::alive(NodeId node) const { return slot(node).alive; }
const Node& Simulator::node(NodeId node) const { return *slot(node).node; }

const PeerNode* Simulator::peer(NodeId node) const {
  return dynamic_cast<const PeerNode*>(slot(node).node.get());
}

const LusNode* Simulator::lus(NodeId node) const {
  return dynamic_cast<const LusNode*>(slot(node).node.get());
}

std::vector<NodeId> Simulator::live_ragents() const {
  std::vector<NodeId> out;
  for (const auto& [id, s] : nodes_) {
    const auto* p = dynamic_cast<const PeerNode*>(s.node.get());
    if (s.alive && p != nullptr && p->mode() == PeerNode::Mode::kRAgent) out.push_back(id);
  }
  return out;
}

std::vector<NodeId> Simulator::live_agents() const {
  std::vector<NodeId> out;
  for (const auto& [id, s] : nodes_) {
    const auto* p = dynamic_cast<const PeerNode*>(s.node.get());
    if (s.alive && p != nullptr && p->mode() == PeerNode::Mode::kAgent) out.push_back(id);
  }
  return out;
}

std::vector<NodeId> Simulator::lus_nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, s] : nodes_) {
    if (s.node->declared_role() == Role::kLus) out.push_back(id);
  }
  return out;
}

const OpRecord* Simulator::op(std::uint64_t request) const {
  for (const auto& r : ops_) {
    if (r.request == request) return &r;
  }
  return nullptr;
}

std::vector<std::uint64_t> Simulator::pending_ops() const {
  std::vector<std::uint64_t> out;
  for (const auto& [id, s] : nodes_) {
    if (const auto* c = dynamic_cast<const ClientNode*>(s.node.get())) {
      for (std::uint64_t op : c->pending()) out.push_back(op);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Simulator::quiescent() const {
  for (const auto& [id, s] : nodes_) {
    if (s.alive && !s.node->quiescent()) return false;
  }
  // Periodic liveness traffic never stops; anything else still in flight
  // means the protocol has not settled.
  for (const Event& e : queue_) {
    const auto* env = std::get_if<Envelope>(&e.what);
    if (env == nullptr) continue;
    if (std::holds_alternative<msg::Heartbeat>(env->body) ||
        std::holds_alternative<msg::RAgentAlive>(env->body) ||
        std::holds_alternative<msg::PeerAlive>(env->body)) {
      continue;
    }
    if (alive(env->dst)) return false;
  }
  return true;
}

Metrics Simulator::snapshot_metrics() const {
  Metrics m;
  m.time = now_;
  m.seed = config_.network.seed;
  m.ops = ops_;
  m.member_events = member_events_;
  m.messages = message_stats_;
  std::set<ObjectId> objects;
  for (const auto& [id, s] : nodes_) {
    if (!s.alive) continue;
    const auto* p = dynamic_cast<const PeerNode*>(s.node.get());
    if (p == nullptr) continue;
    m.replicas += p->store().size();
    if (p->mode() == PeerNode::Mode::kRAgent) {
      ++m.ragents;
      const ClusterState& c = *p->cluster();
      m.clusters.push_back({id, c.members.size(), c.catalogue.object_count()});
      for (const auto& [oid, rec] : c.catalogue.records()) objects.insert(oid);
    } else if (p->mode() == PeerNode::Mode::kAgent) {
      ++m.agents;
    }
  }
  m.objects = objects.size();
  m.lost = losses_.size();
  m.violations = audit_.violations.size();
  return m;
}

}  // namespace spdht
