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

#include <gtest/gtest.h>

#include "spdht/error.hpp"
#include "spdht/lus.hpp"

namespace spdht {
namespace {

const LocalityDescriptor kLoc{"n", "as", "ro", "eu"};

TEST(LusRegistry, RegisterReplaceDeregister) {
  LusRegistry reg;
  reg.register_ragent(NodeId{2}, kLoc, 3, 10);
  reg.register_ragent(NodeId{1}, kLoc, 0, 10);
  reg.register_ragent(NodeId{2}, kLoc, 4, 20);
  ASSERT_EQ(reg.size(), 2u);
  const auto entries = reg.query(Role::kAgent);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].ragent, NodeId{1});
  EXPECT_EQ(entries[1].connected_count, 4u);
  reg.deregister(NodeId{2});
  reg.deregister(NodeId{9});
  EXPECT_FALSE(reg.contains(NodeId{2}));
}

TEST(LusRegistry, OnlyAgentsMayQuery) {
  const LusRegistry reg = lus_register({}, NodeId{1}, kLoc, 0);
  for (Role r : {Role::kClient, Role::kRAgent, Role::kLus}) {
    try {
      lus_query(reg, r);
      ADD_FAILURE() << to_string(r);
    } catch (const ProtocolError& e) {
      EXPECT_EQ(e.code(), ErrorCode::kAccessDenied);
    }
  }
  EXPECT_EQ(lus_query(reg, Role::kAgent).size(), 1u);
}

TEST(LusRegistry, SameViewIgnoresTimestamps) {
  const LusRegistry a = lus_register({}, NodeId{1}, kLoc, 2, 5);
  const LusRegistry b = lus_register({}, NodeId{1}, kLoc, 2, 99);
  EXPECT_TRUE(a.same_view(b));
  EXPECT_FALSE(a == b);
  EXPECT_FALSE(a.same_view(lus_register({}, NodeId{1}, kLoc, 3, 5)));
  EXPECT_TRUE(lus_deregister(a, NodeId{1}).entries().empty());
}

}  // namespace
}  // namespace spdht
