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
#include "spdht/nodes.hpp"
#include "spdht/sim.hpp"

namespace spdht {
namespace {

const LocalityDescriptor kEu{"n0", "as0", "ro", "eu"};

struct Fixture {
  explicit Fixture(std::uint64_t seed = 1) : sim(config(seed)) {
    lus = {sim.add_lus("lus1", kEu), sim.add_lus("lus2", kEu)};
    r0 = sim.add_ragent("r0", kEu);
    for (int i = 0; i < 4; ++i) agents.push_back(sim.add_agent("a" + std::to_string(i), kEu));
    client = sim.add_client("client", kEu);
    sim.start();
  }

  static SimConfig config(std::uint64_t seed) {
    SimConfig c;
    c.network.seed = seed;
    c.thresholds = {2, 16};
    return c;
  }

  Simulator sim;
  std::vector<NodeId> lus;
  NodeId r0;
  std::vector<NodeId> agents;
  NodeId client;
};

TEST(Simulator, AgentsJoinAndRAgentRegisters) {
  Fixture f;
  f.sim.run_until(from_millis(500));
  const PeerNode* ra = f.sim.peer(f.r0);
  ASSERT_NE(ra->cluster(), nullptr);
  EXPECT_EQ(ra->cluster()->members.size(), 4u);
  for (NodeId a : f.agents) EXPECT_EQ(f.sim.peer(a)->ragent(), f.r0);
  for (NodeId l : f.lus) EXPECT_TRUE(f.sim.lus(l)->registry().contains(f.r0));
  EXPECT_TRUE(f.sim.quiescent());
}

TEST(Simulator, InsertThenSearchFindsObject) {
  Fixture f;
  const DistObject obj = make_object("Doc", {"red"}, "x");
  const auto ins = f.sim.schedule_client(from_millis(500), f.client,
                                         {ClientCommand::Insert{f.agents[0], obj}});
  const auto srch = f.sim.schedule_client(
      from_millis(800), f.client,
      {ClientCommand::Search{f.agents[3], PatternKey::pattern("red"), SearchMode::kAll}});
  f.sim.run_until(from_millis(1500));
  EXPECT_EQ(f.sim.op(ins)->outcome, Outcome::kOk);
  const OpRecord* s = f.sim.op(srch);
  EXPECT_EQ(s->outcome, Outcome::kOk);
  EXPECT_EQ(s->results, (std::vector<ObjectId>{obj.id}));
  EXPECT_EQ(s->steps, s->decomposed);
  EXPECT_LE(s->steps, s->bound);

  std::size_t copies = 0;
  for (NodeId a : f.agents) copies += f.sim.peer(a)->store().count(obj.id);
  EXPECT_EQ(copies, 2u);
}

TEST(Simulator, ClientCannotQueryLus) {
  Fixture f;
  const auto q = f.sim.schedule_client(from_millis(300), f.client, {ClientCommand::QueryLus{f.lus[0]}});
  f.sim.run_until(from_millis(600));
  EXPECT_EQ(f.sim.op(q)->outcome, Outcome::kAccessDenied);
}

TEST(Simulator, CrashedNodeDropsTrafficAndIsDetected) {
  Fixture f;
  f.sim.inject_crash(f.agents[1], from_millis(400));
  f.sim.run_until(from_millis(1000));
  EXPECT_FALSE(f.sim.alive(f.agents[1]));
  EXPECT_FALSE(f.sim.peer(f.r0)->cluster()->members.contains(f.agents[1]));
  EXPECT_GT(f.sim.audit().dropped_at_crashed, 0u);
  EXPECT_EQ(f.sim.audit().emissions_from_crashed, 0u);
  bool failed = false;
  for (const auto& e : f.sim.member_events()) failed |= e.kind == "agent_failed" && e.node == f.agents[1];
  EXPECT_TRUE(failed);
}

TEST(Simulator, RejoinOfLiveNodeRejected) {
  Fixture f;
  f.sim.inject_rejoin(f.agents[0], from_millis(300));
  f.sim.run_until(from_millis(400));
  bool rejected = false;
  for (const auto& e : f.sim.member_events()) {
    rejected |= e.kind == "rejoin_rejected" && e.detail == "NotCrashed";
  }
  EXPECT_TRUE(rejected);
}

TEST(Simulator, UnknownNodeFaultThrows) {
  Fixture f;
  EXPECT_THROW(f.sim.inject_crash(NodeId{999}, 1), ProtocolError);
}

TEST(Simulator, CrashRejoinReturnsToCluster) {
  Fixture f;
  f.sim.inject_crash(f.agents[2], from_millis(400));
  f.sim.inject_rejoin(f.agents[2], from_millis(1200));
  f.sim.run_until(from_millis(2500));
  EXPECT_TRUE(f.sim.peer(f.r0)->cluster()->members.contains(f.agents[2]));
}

TEST(Simulator, SameSeedSameTrace) {
  auto run = [](std::uint64_t seed) {
    Fixture f(seed);
    f.sim.schedule_client(from_millis(500), f.client,
                          {ClientCommand::Insert{f.agents[0], make_object("T", {}, "p")}});
    f.sim.inject_crash(f.agents[3], from_millis(700));
    f.sim.run_until(from_millis(2000));
    std::vector<std::tuple<SimTime, std::uint64_t, std::uint32_t, std::string, std::uint64_t>> out;
    for (const auto& r : f.sim.trace()) out.emplace_back(r.time, r.seq, r.node.value, r.kind, r.digest);
    return out;
  };
  const auto a = run(5);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, run(5));
  EXPECT_NE(a, run(6));
}

}  // namespace
}  // namespace spdht
