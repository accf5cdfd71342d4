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

#include "spdht/dataops.hpp"
#include "spdht/error.hpp"

namespace spdht {
namespace {

NodeId n(std::uint32_t v) { return NodeId{v}; }

QueuedUpdate upd(std::uint64_t req, const ObjectId& id) {
  return {req, {id, "p" + std::to_string(req), n(1)}, std::nullopt};
}

TEST(LockTable, QueuesInArrivalOrder) {
  LockTable locks;
  const ObjectId id = make_object("T", {}, "x").id;
  EXPECT_TRUE(locks.acquire_or_queue(id, n(1), upd(1, id)));
  EXPECT_FALSE(locks.acquire_or_queue(id, n(1), upd(2, id)));
  EXPECT_FALSE(locks.acquire_or_queue(id, n(1), upd(3, id)));
  EXPECT_FALSE(locks.try_acquire(id, n(1), 4));
  EXPECT_EQ(locks.find(id)->request_id, 1u);

  auto next = locks.release(id);
  ASSERT_TRUE(next.has_value());
  EXPECT_EQ(next->request_id, 2u);
  // Handed over, not freed.
  EXPECT_TRUE(locks.locked(id));
  EXPECT_EQ(locks.find(id)->request_id, 2u);
  const auto rest = locks.release_all(id);
  ASSERT_EQ(rest.size(), 1u);
  EXPECT_EQ(rest.front().request_id, 3u);
  EXPECT_TRUE(locks.empty());
  EXPECT_TRUE(locks.try_acquire(id, n(1), 9));
  EXPECT_FALSE(locks.release(id).has_value());
  EXPECT_FALSE(locks.locked(id));
}

TEST(LockTable, IndependentObjects) {
  LockTable locks;
  const ObjectId a = make_object("T", {}, "a").id;
  const ObjectId b = make_object("T", {}, "b").id;
  EXPECT_TRUE(locks.try_acquire(a, n(1), 1));
  EXPECT_TRUE(locks.try_acquire(b, n(2), 2));
  locks.set_holder(a, n(5));
  EXPECT_EQ(locks.find(a)->holder, n(5));
  EXPECT_EQ(locks.size(), 2u);
  EXPECT_FALSE(locks.release(b).has_value());
}

TEST(HotCounter, ReachesThreshold) {
  HotCounter hot(3);
  const ObjectId id = make_object("T", {}, "x").id;
  EXPECT_EQ(hot.record(id), 1u);
  hot.record(id);
  EXPECT_FALSE(hot.reached(id));
  hot.record(id);
  EXPECT_TRUE(hot.reached(id));
  hot.reset(id);
  EXPECT_EQ(hot.count(id), 0u);
}

TEST(MergeResults, DedupedSortedNewestVersion) {
  DistObject a = make_object("T", {}, "a");
  DistObject b = make_object("T", {}, "b");
  DistObject a2 = a;
  a2.version = 3;
  a2.payload = "new";
  const auto merged = merge_results({{a, b}, {a2}, {}, {b}});
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_LT(merged[0].id, merged[1].id);
  for (const auto& o : merged) {
    if (o.id == a.id) EXPECT_EQ(o.version, 3u);
  }
}

TEST(ReplicaHolders, TwoLeastLoaded) {
  AgentLoadTable loads;
  loads.add_agent(n(3), 0);
  loads.add_agent(n(1), 2);
  loads.add_agent(n(2), 0);
  EXPECT_EQ(select_replica_holders(loads), std::make_pair(n(2), n(3)));
  AgentLoadTable one;
  one.add_agent(n(1));
  try {
    select_replica_holders(one);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientAgents);
  }
}

TEST(Delegate, BoundAndMeanFactor) {
  const std::map<NodeId, std::size_t> peers = {{n(5), 10}, {n(4), 10}, {n(6), 30}};
  const DelegationPolicy bound{20, 2.0};
  EXPECT_FALSE(choose_delegate(19, peers, bound).has_value());
  EXPECT_EQ(choose_delegate(20, peers, bound), n(4));
  EXPECT_FALSE(choose_delegate(20, {{n(4), 20}}, bound).has_value());

  const DelegationPolicy factor{0, 2.0};
  // Mean across all RAgents including the local one.
  EXPECT_FALSE(choose_delegate(10, {{n(4), 10}}, factor).has_value());
  EXPECT_EQ(choose_delegate(40, {{n(5), 5}, {n(4), 5}, {n(6), 5}}, factor), n(4));
  EXPECT_FALSE(choose_delegate(40, {}, factor).has_value());
}

TEST(BatchByHolder, OneGroupPerOwner) {
  const ObjectId a = make_object("T", {}, "a").id;
  const ObjectId b = make_object("T", {}, "b").id;
  const ObjectId c = make_object("T", {}, "c").id;
  const auto batches = batch_by_holder({{a, n(1)}, {b, n(2)}, {c, n(1)}});
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches.at(n(1)), (std::vector<ObjectId>{a, c}));
  EXPECT_EQ(batches.at(n(2)), (std::vector<ObjectId>{b}));
}

}  // namespace
}  // namespace spdht
