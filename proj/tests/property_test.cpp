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

#include <algorithm>
#include <cstdlib>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "spdht/scenario.hpp"

namespace spdht::testing {
namespace {

int seed_count() {
  const char* env = std::getenv("SPDHT_PROPERTY_SEEDS");
  return env != nullptr ? std::atoi(env) : 12;
}

class RandomSearchProperty : public ::testing::TestWithParam<int> {};

TEST_P(RandomSearchProperty, SearchesMatchScanAndAccounting) {
  const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(GetParam());
  const RandomTopology topo = draw_topology(seed);
  const Scenario scenario = random_search_scenario(topo, seed);
  ScenarioRun run(scenario);
  const RunResult result = run.run();
  for (const auto& v : result.violations) ADD_FAILURE() << v.name << ": " << v.detail;
  ASSERT_EQ(result.exit_code, 0);

  std::size_t searches = 0;
  for (std::size_t i = 0; i < scenario.events.size(); ++i) {
    const ScenarioEvent& e = scenario.events[i];
    const auto request = run.request_of(i);
    ASSERT_TRUE(request.has_value());
    const OpRecord* op = run.sim().op(*request);
    ASSERT_NE(op, nullptr) << "request " << *request;
    if (e.kind != ScenarioEvent::Kind::kSearch) {
      EXPECT_EQ(op->outcome, Outcome::kOk);
      continue;
    }
    ++searches;
    ASSERT_EQ(op->outcome, Outcome::kOk);

    const std::set<ObjectId> got(op->results.begin(), op->results.end());
    EXPECT_EQ(got.size(), op->results.size()) << "duplicate ids in search " << *request;
    EXPECT_EQ(got, brute_force_scan(run.sim(), e.criterion)) << e.criterion.key;

    const RequestTally* tally = run.sim().steps().find(*request);
    ASSERT_NE(tally, nullptr);
    const OracleCost cost = oracle_cost(*tally);
    EXPECT_EQ(cost.measured, op->steps);
    EXPECT_EQ(cost.decomposed, cost.measured);
    EXPECT_EQ(op->decomposed, op->steps);
    EXPECT_EQ(cost.bound, op->bound);
    if (cost.bound_applies) EXPECT_LE(cost.measured, cost.bound);
    for (const auto& [ragent, t] : tally->clusters) {
      EXPECT_LE(t.fetch_messages, t.holders_contacted.size());
    }
  }
  EXPECT_EQ(searches, topo.searches);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomSearchProperty, ::testing::Range(0, seed_count()));

// Crashes and rejoins interleaved with client traffic: the run must end
// quiescent with every invariant intact.
class ChaosProperty : public ::testing::TestWithParam<int> {};

TEST_P(ChaosProperty, InvariantsHoldThroughCrashes) {
  const std::uint64_t seed = 2000 + static_cast<std::uint64_t>(GetParam());
  RandomTopology topo = draw_topology(seed);
  topo.objects = std::min<std::size_t>(topo.objects, 150);
  ScenarioRun run(random_chaos_scenario(topo, 4, from_millis(1500), seed));
  const RunResult result = run.run();
  for (const auto& v : result.violations) ADD_FAILURE() << v.name << ": " << v.detail;
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_TRUE(result.quiescent);
  EXPECT_TRUE(run.sim().reported_losses().empty());
}

INSTANTIATE_TEST_SUITE_P(Seeds, ChaosProperty, ::testing::Range(0, seed_count()));

class ChurnProperty : public ::testing::TestWithParam<int> {};

TEST_P(ChurnProperty, NoObjectLostUnderChurn) {
  const std::uint64_t seed = 3000 + static_cast<std::uint64_t>(GetParam());
  ScenarioRun run(churn_scenario(24, 40, seed));
  const RunResult result = run.run();
  for (const auto& v : result.violations) ADD_FAILURE() << v.name << ": " << v.detail;
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_TRUE(run.sim().reported_losses().empty());
  std::size_t stored = 0;
  for (int t = 0; t < 5; ++t) {
    stored += brute_force_scan(run.sim(), PatternKey::exact("T" + std::to_string(t))).size();
  }
  EXPECT_EQ(stored, 40u);
}

INSTANTIATE_TEST_SUITE_P(Seeds, ChurnProperty, ::testing::Range(0, std::max(1, seed_count() / 3)));

}  // namespace
}  // namespace spdht::testing
