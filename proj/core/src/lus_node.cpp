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

#include "spdht/error.hpp"
#include "spdht/nodes.hpp"

namespace spdht {

void LusNode::seed(NodeId ragent, const LocalityDescriptor& locality) {
  registry_.register_ragent(ragent, locality, 0, 0);
}

void LusNode::replicate(bool add, const LusEntry& entry, Context& ctx) {
  for (NodeId sibling : ctx.lus_nodes()) {
    if (sibling != id()) ctx.send(sibling, msg::LusReplicate{add, entry});
  }
}

void LusNode::on_message(const Envelope& env, Context& ctx) {
  if (std::holds_alternative<msg::LusQuery>(env.body)) {
    try {
      ctx.send(env.src, msg::LusQueryReply{registry_.query(env.src_role)}, env.op, env.hops + 1);
    } catch (const ProtocolError&) {
      ctx.send(env.src, msg::LusDenied{}, env.op, env.hops + 1);
    }
  } else if (const auto* reg = std::get_if<msg::LusRegister>(&env.body)) {
    const bool fresh = !registry_.contains(reg->entry.ragent);
    registry_.register_ragent(reg->entry.ragent, reg->entry.locality, reg->entry.connected_count,
                              ctx.now());
    replicate(true, registry_.entries().at(reg->entry.ragent), ctx);
    if (fresh) {
      // A newly registered RAgent learns about the others from the reply.
      std::vector<LusEntry> entries;
      for (const auto& [r, e] : registry_.entries()) entries.push_back(e);
      ctx.send(env.src, msg::LusQueryReply{std::move(entries)});
    }
  } else if (const auto* dereg = std::get_if<msg::LusDeregister>(&env.body)) {
    if (!registry_.contains(dereg->ragent)) return;
    LusEntry entry = registry_.entries().at(dereg->ragent);
    registry_.deregister(dereg->ragent);
    replicate(false, entry, ctx);
  } else if (const auto* rep = std::get_if<msg::LusReplicate>(&env.body)) {
    if (rep->add) {
      registry_.register_ragent(rep->entry.ragent, rep->entry.locality,
                                rep->entry.connected_count, rep->entry.last_update);
    } else {
      registry_.deregister(rep->entry.ragent);
    }
  }
}

}  // namespace spdht
