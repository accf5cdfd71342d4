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

#include <variant>

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

std::vector<std::uint64_t> ClientNode::pending() const {
  std::vector<std::uint64_t> out;
  for (const auto& [op, p] : pending_) out.push_back(op);
  return out;
}

void ClientNode::issue(std::uint64_t op, const ClientCommand& command, Context& ctx) {
  ctx.set_timer(ctx.config().client_timeout, {TimerKind::kClientTimeout, op});
  std::visit(
      Overloaded{
          [&](const ClientCommand::Insert& c) {
            pending_[op] = {OpKind::kInsert, ctx.now()};
            ctx.send(c.agent, msg::ClientInsert{c.object}, op, 1);
          },
          [&](const ClientCommand::Search& c) {
            pending_[op] = {c.mode == SearchMode::kAll ? OpKind::kSearch : OpKind::kSearchFirst,
                            ctx.now()};
            ctx.send(c.agent, msg::ClientSearch{c.criterion, c.mode}, op, 1);
          },
          [&](const ClientCommand::Update& c) {
            pending_[op] = {OpKind::kUpdate, ctx.now()};
            ctx.send(c.agent, msg::ClientUpdate{c.object, c.payload}, op, 1);
          },
          [&](const ClientCommand::Read& c) {
            pending_[op] = {OpKind::kRead, ctx.now()};
            const std::optional<NodeId> target = c.holder ? c.holder : last_holder_;
            if (!target) {
              finish(op, Outcome::kNotHeld, {}, std::nullopt, 0, 0, ctx);
              return;
            }
            ctx.send(*target, msg::ReadRequest{c.object}, op, 1);
          },
          [&](const ClientCommand::QueryLus& c) {
            pending_[op] = {OpKind::kLusQuery, ctx.now()};
            ctx.send(c.lus, msg::LusQuery{}, op, 1);
          },
      },
      command.action);
}

void ClientNode::finish(std::uint64_t op, Outcome outcome, const std::vector<DistObject>& objects,
                        std::optional<NodeId> holder, std::uint64_t version, std::uint32_t hops,
                        Context& ctx) {
  auto it = pending_.find(op);
  if (it == pending_.end()) return;
  const Pending p = it->second;
  pending_.erase(it);
  ctx.complete_op(op, p.kind, outcome, objects, holder, version, p.progress, hops, p.issued);
}

void ClientNode::on_message(const Envelope& env, Context& ctx) {
  auto it = pending_.find(env.op);
  if (it == pending_.end()) return;
  if (const auto* progress = std::get_if<msg::ClientProgress>(&env.body)) {
    ++it->second.progress;
    (void)progress;
  } else if (const auto* result = std::get_if<msg::ClientResult>(&env.body)) {
    if (it->second.kind == OpKind::kSearchFirst && result->holder) last_holder_ = result->holder;
    finish(env.op, result->outcome, result->objects, result->holder, result->version, env.hops,
           ctx);
  } else if (const auto* read = std::get_if<msg::ReadReply>(&env.body)) {
    if (read->object) {
      finish(env.op, Outcome::kOk, {*read->object}, env.src, read->object->version, env.hops,
             ctx);
    } else {
      finish(env.op, Outcome::kNotHeld, {}, env.src, 0, env.hops, ctx);
    }
  } else if (std::holds_alternative<msg::LusDenied>(env.body)) {
    finish(env.op, Outcome::kAccessDenied, {}, std::nullopt, 0, env.hops, ctx);
  } else if (std::holds_alternative<msg::LusQueryReply>(env.body)) {
    finish(env.op, Outcome::kOk, {}, std::nullopt, 0, env.hops, ctx);
  }
}

void ClientNode::on_timer(const TimerTag& tag, Context& ctx) {
  if (tag.kind == TimerKind::kClientTimeout) {
    finish(tag.op, Outcome::kTimeout, {}, std::nullopt, 0, 0, ctx);
  }
}

}  // namespace spdht
