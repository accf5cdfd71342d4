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

#include "spdht/messages.hpp"

#include <array>
#include <sstream>

namespace spdht {

namespace {

constexpr std::array<std::string_view, std::variant_size_v<Message>> kKinds = {
    "lus_query",        "lus_query_reply",   "lus_denied",        "lus_register",
    "lus_deregister",   "lus_replicate",     "join_request",      "join_accept",
    "join_redirect",    "heartbeat",         "ragent_alive",      "peer_alive",
    "reassign",         "rejoin_directive",  "ragent_suspect",    "backup_sync",
    "become_ragent",    "peer_hello",        "peer_gone",         "merge_request",
    "merge_accept",     "merge_busy",        "replica_transfer",  "replica_store",
    "replica_stored",   "replica_transfer_failed", "replica_drop", "client_search",
    "client_insert",    "client_update",     "client_progress",   "client_result",
    "search_request",   "search_result",     "insert_request",    "insert_result",
    "update_request",   "update_progress",   "update_result",     "search_forward",
    "search_partial",   "insert_delegate",   "insert_delegate_result", "update_forward",
    "update_forward_ack", "migrate_request", "migrate_transfer",  "migrate_refused",
    "fetch_request",    "fetch_reply",       "apply_update",      "update_applied",
    "replica_update",   "replica_update_ack", "read_request",     "read_reply",        "leave",
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void put(std::ostream& out, const ObjectId& id) { out << id.short_hex(); }
void put(std::ostream& out, NodeId n) { out << n.value; }
void put(std::ostream& out, const std::optional<NodeId>& n) {
  if (n) {
    out << n->value;
  } else {
    out << '-';
  }
}
void put(std::ostream& out, const PatternKey& k) { out << to_string(k.kind) << ':' << k.key; }
void put(std::ostream& out, const DistObject& o) {
  out << o.id.short_hex() << '@' << o.version << '#' << o.payload.size();
}
void put(std::ostream& out, const LusEntry& e);
template <class T>
void put_list(std::ostream& out, const std::vector<T>& items);
void put(std::ostream& out, const ClusterConfig& c) {
  put(out, c.ragent);
  out << '/';
  put(out, c.secondary);
  out << '/';
  put_list(out, c.members);
}
void put(std::ostream& out, const LusEntry& e) {
  out << e.ragent.value << ':' << e.connected_count;
}
void put(std::ostream& out, const ClusterState& s) {
  out << s.ragent.value << ":m" << s.members.size() << ":o" << s.catalogue.object_count();
}

template <class T>
void put_list(std::ostream& out, const std::vector<T>& items) {
  out << '[';
  bool first = true;
  for (const auto& item : items) {
    if (!first) out << ',';
    put(out, item);
    first = false;
  }
  out << ']';
}

}  // namespace

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kOk:
      return "ok";
    case Outcome::kEmpty:
      return "empty";
    case Outcome::kDuplicateObject:
      return "duplicate_object";
    case Outcome::kUnknownObject:
      return "unknown_object";
    case Outcome::kInsufficientAgents:
      return "insufficient_agents";
    case Outcome::kNotHeld:
      return "not_held";
    case Outcome::kObjectLost:
      return "object_lost";
    case Outcome::kAccessDenied:
      return "access_denied";
    case Outcome::kTimeout:
      return "timeout";
    case Outcome::kIncomplete:
      return "incomplete";
  }
  return "?";
}

std::string_view message_kind(const Message& message) { return kKinds[message.index()]; }

std::string describe(const Message& message) {
  std::ostringstream out;
  out << message_kind(message);
  std::visit(
      Overloaded{
          [&](const msg::LusQueryReply& m) { out << ' '; put_list(out, m.entries); },
          [&](const msg::LusRegister& m) { out << ' '; put(out, m.entry); },
          [&](const msg::LusDeregister& m) { out << ' '; put(out, m.ragent); },
          [&](const msg::LusReplicate& m) {
            out << (m.add ? " +" : " -");
            put(out, m.entry);
          },
          [&](const msg::JoinAccept& m) { out << ' '; put(out, m.config); },
          [&](const msg::RAgentAlive& m) { out << ' '; put(out, m.config); },
          [&](const msg::PeerAlive& m) { out << ' ' << m.members << '/' << m.catalogue_size; },
          [&](const msg::Reassign& m) { out << ' '; put(out, m.ragent); },
          [&](const msg::RAgentSuspect& m) { out << ' '; put(out, m.ragent); },
          [&](const msg::BackupSync& m) { out << ' '; put(out, *m.state); },
          [&](const msg::BecomeRAgent& m) {
            out << ' ';
            put(out, *m.state);
            out << " moves=" << m.moves.size();
          },
          [&](const msg::PeerHello& m) {
            out << ' ';
            put(out, m.replaces);
            out << ' ' << m.members << '/' << m.catalogue_size;
          },
          [&](const msg::PeerGone& m) { out << ' '; put(out, m.absorbed_by); },
          [&](const msg::MergeRequest& m) { out << ' '; put(out, *m.state); },
          [&](const msg::ReplicaTransfer& m) {
            out << ' ';
            put(out, m.object);
            out << "->";
            put(out, m.target);
            out << (m.drop ? " drop" : "");
          },
          [&](const msg::ReplicaStore& m) { out << ' '; put(out, m.object); },
          [&](const msg::ReplicaStored& m) {
            out << ' ';
            put(out, m.object);
            out << '@';
            put(out, m.holder);
          },
          [&](const msg::ReplicaTransferFailed& m) {
            out << ' ';
            put(out, m.object);
            out << "->";
            put(out, m.target);
          },
          [&](const msg::ReplicaDrop& m) { out << ' '; put(out, m.object); },
          [&](const msg::ClientSearch& m) { out << ' '; put(out, m.criterion); },
          [&](const msg::ClientInsert& m) { out << ' '; put(out, m.object); },
          [&](const msg::ClientUpdate& m) {
            out << ' ';
            put(out, m.object);
            out << '#' << m.payload.size();
          },
          [&](const msg::ClientProgress& m) { out << ' ' << m.version; },
          [&](const msg::ClientResult& m) {
            out << ' ' << to_string(m.outcome) << ' ';
            put_list(out, m.objects);
            out << ' ';
            put(out, m.holder);
            out << ' ' << m.version;
          },
          [&](const msg::SearchRequestMsg& m) { out << ' '; put(out, m.criterion); },
          [&](const msg::SearchResult& m) {
            out << ' ' << to_string(m.outcome) << ' ';
            put_list(out, m.objects);
          },
          [&](const msg::InsertRequest& m) { out << ' '; put(out, m.object); },
          [&](const msg::InsertResult& m) {
            out << ' ' << to_string(m.outcome) << ' ';
            put(out, m.id);
          },
          [&](const msg::UpdateRequestMsg& m) {
            out << ' ';
            put(out, m.request.object_id);
          },
          [&](const msg::UpdateProgress& m) { out << ' ' << m.version; },
          [&](const msg::UpdateResult& m) { out << ' ' << to_string(m.outcome) << ' ' << m.version; },
          [&](const msg::SearchForward& m) { out << ' '; put(out, m.criterion); },
          [&](const msg::SearchPartial& m) {
            out << ' ';
            put_list(out, m.objects);
          },
          [&](const msg::InsertDelegate& m) { out << ' '; put(out, m.object); },
          [&](const msg::InsertDelegateResult& m) {
            out << ' ' << to_string(m.outcome) << ' ';
            put(out, m.id);
          },
          [&](const msg::UpdateForward& m) { out << ' '; put(out, m.request.object_id); },
          [&](const msg::UpdateForwardAck& m) { out << (m.accepted ? " yes" : " no"); },
          [&](const msg::MigrateRequest& m) { out << ' '; put(out, m.object); },
          [&](const msg::MigrateTransfer& m) { out << ' '; put(out, m.object); },
          [&](const msg::MigrateRefused& m) { out << ' '; put(out, m.object); },
          [&](const msg::FetchRequest& m) { out << ' '; put_list(out, m.objects); },
          [&](const msg::FetchReply& m) {
            out << ' ';
            put_list(out, m.objects);
            out << " L=" << m.replica_count;
          },
          [&](const msg::ApplyUpdate& m) {
            out << ' ';
            put(out, m.object);
            out << '#' << m.payload.size();
          },
          [&](const msg::UpdateApplied& m) {
            out << ' ';
            put(out, m.object);
            out << '@' << m.version << (m.held ? "" : " missing");
          },
          [&](const msg::ReplicaUpdate& m) { out << ' '; put(out, m.object); },
          [&](const msg::ReplicaUpdateAck& m) {
            out << ' ';
            put(out, m.object);
            out << '@' << m.version;
          },
          [&](const msg::ReadRequest& m) { out << ' '; put(out, m.object); },
          [&](const msg::ReadReply& m) {
            out << ' ';
            if (m.object) {
              put(out, *m.object);
            } else {
              out << '-';
            }
          },
          [&](const auto&) {},
      },
      message);
  return out.str();
}

}  // namespace spdht
