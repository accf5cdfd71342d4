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
#include "spdht/steps.hpp"

namespace spdht {
namespace {

TEST(CeilLog2, SmallValuesCountOneStep) {
  EXPECT_EQ(ceil_log2(0), 1u);
  EXPECT_EQ(ceil_log2(1), 1u);
  EXPECT_EQ(ceil_log2(2), 1u);
  EXPECT_EQ(ceil_log2(3), 2u);
  EXPECT_EQ(ceil_log2(4), 2u);
  EXPECT_EQ(ceil_log2(5), 3u);
  EXPECT_EQ(ceil_log2(1024), 10u);
  EXPECT_EQ(ceil_log2(1025), 11u);
}

TEST(KeyLookupSteps, ExactIsLogPatternIsLinear) {
  EXPECT_EQ(key_lookup_steps(0, KeyKind::kPattern), 0u);
  EXPECT_EQ(key_lookup_steps(0, KeyKind::kExactType), 0u);
  EXPECT_EQ(key_lookup_steps(100, KeyKind::kPattern), 100u);
  EXPECT_EQ(key_lookup_steps(100, KeyKind::kExactType), 7u);
}

TEST(SearchBound, ClosedForms) {
  EXPECT_EQ(search_bound_term(8, 2, 5), 8u * (8 + 3));
  EXPECT_EQ(uniform_search_steps(4, 8, 2, 5), 4u * 88);
  // 1024 objects over 64 agents: L = 32, so 1024 * (4 + 5).
  EXPECT_EQ(ideal_search_steps(1024, 64), 9216u);
  EXPECT_EQ(ideal_search_steps(1024, 16), 1024u * (4 + 7));
}

TEST(AccountSearch, MeasuredDecomposedAndBound) {
  StepCounter counter;
  const NodeId r1{10}, r2{20}, h1{1};
  counter.record_lookup(7, r1, KeyKind::kExactType, 8, 2, 3);
  counter.add_id_owner_steps(7, r1, 4);
  counter.add_fetch_steps(7, r1, 4);
  counter.add_fetch_message(7, r1, h1);
  counter.add_probes(7, r1, h1, 2, 5, 6);
  // Second cluster has no match: bound does not apply there.
  counter.record_lookup(7, r2, KeyKind::kPattern, 6, 0, 6);

  const SearchAccount acc = account_search(counter, 7);
  ASSERT_EQ(acc.clusters.size(), 2u);
  EXPECT_EQ(acc.clusters[0].measured, 3u + 4 + 4 + 6);
  EXPECT_EQ(acc.clusters[0].decomposed, 3u + 8 + 2 * 3);
  EXPECT_EQ(acc.clusters[0].bound, 88u);
  EXPECT_EQ(acc.clusters[0].l, 5u);
  EXPECT_TRUE(acc.clusters[0].bound_applies());
  EXPECT_EQ(acc.clusters[1].measured, 6u);
  EXPECT_EQ(acc.clusters[1].decomposed, 6u);
  EXPECT_EQ(acc.clusters[1].l, 1u);
  EXPECT_FALSE(acc.bound_applies());
  EXPECT_EQ(acc.measured, acc.decomposed);
  EXPECT_EQ(counter.find(7)->clusters.at(r1).holders_contacted, (std::set<NodeId>{h1}));
}

TEST(AccountSearch, UnknownRequest) {
  StepCounter counter;
  try {
    account_search(counter, 1);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownRequest);
  }
}

}  // namespace
}  // namespace spdht
