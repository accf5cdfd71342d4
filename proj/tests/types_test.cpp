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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "spdht/error.hpp"
#include "spdht/types.hpp"

namespace spdht {
namespace {

std::string hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

TEST(CanonicalEncode, LengthPrefixedBigEndian) {
  const std::vector<std::string> keys = {"b", "a", "b"};
  EXPECT_EQ(hex(canonical_encode("Doc", keys, "hello")),
            "00000003446f6300000002000000016100000001620000000568656c6c6f");
}

TEST(ObjectIdentity, Blake2b160OfEncoding) {
  // Reference digests computed with an independent BLAKE2b implementation.
  const std::string abc = "abc";
  const std::vector<std::uint8_t> raw(abc.begin(), abc.end());
  EXPECT_EQ(derive_object_id(raw).hex(), "384264f676f39536840523f284921cdc68b6846b");
  EXPECT_EQ(make_object("Doc", {"a", "b"}, "hello").id.hex(),
            "0315c103786f8521316fe9dd6d3e909c84a16102");
}

TEST(ObjectIdentity, KeyOrderDoesNotMatterPayloadDoes) {
  const std::vector<std::string> k1 = {"x", "y"};
  const std::vector<std::string> k2 = {"y", "x", "x"};
  EXPECT_EQ(derive_object_id(canonical_encode("T", k1, "p")),
            derive_object_id(canonical_encode("T", k2, "p")));
  EXPECT_NE(make_object("T", {"x"}, "p").id, make_object("T", {"x"}, "q").id);
  EXPECT_NE(make_object("T", {}, "xp").id, make_object("Tx", {}, "p").id);
}

TEST(ObjectIdentity, EmptyEncodingRejected) {
  EXPECT_THROW(derive_object_id({}), ProtocolError);
}

TEST(ObjectIdHex, RoundTrip) {
  const ObjectId id = make_object("T", {}, "p").id;
  EXPECT_EQ(ObjectId::from_hex(id.hex()), id);
  EXPECT_EQ(id.short_hex(), id.hex().substr(0, 12));
  std::string upper = id.hex();
  for (auto& c : upper) c = static_cast<char>(std::toupper(c));
  EXPECT_EQ(ObjectId::from_hex(upper), id);
  EXPECT_FALSE(ObjectId::from_hex("abc").has_value());
  EXPECT_FALSE(ObjectId::from_hex(std::string(40, 'g')).has_value());
}

TEST(Proximity, StopsAtFirstMismatchFromContinentDown) {
  const LocalityDescriptor a{"n1", "as1", "ro", "eu"};
  EXPECT_EQ(proximity_rank(a, a), 4);
  EXPECT_EQ(proximity_rank(a, {"n2", "as1", "ro", "eu"}), 3);
  EXPECT_EQ(proximity_rank(a, {"n1", "as2", "ro", "eu"}), 2);
  EXPECT_EQ(proximity_rank(a, {"n1", "as1", "de", "eu"}), 1);
  // Same network name on another continent still ranks zero.
  EXPECT_EQ(proximity_rank(a, {"n1", "as1", "ro", "na"}), 0);
}

TEST(Locality, WellFormedNeedsEveryTier) {
  EXPECT_TRUE((LocalityDescriptor{"n", "a", "c", "e"}.well_formed()));
  EXPECT_FALSE((LocalityDescriptor{"n", "", "c", "e"}.well_formed()));
}

TEST(PatternKeyMatch, ExactUsesTypePatternUsesKeys) {
  const DistObject obj = make_object("Doc", {"red", "big"}, "x");
  EXPECT_TRUE(obj.matches(PatternKey::exact("Doc")));
  EXPECT_FALSE(obj.matches(PatternKey::exact("red")));
  EXPECT_TRUE(obj.matches(PatternKey::pattern("red")));
  EXPECT_FALSE(obj.matches(PatternKey::pattern("Doc")));
  EXPECT_EQ(parse_key_kind("exact"), KeyKind::kExactType);
  EXPECT_EQ(parse_key_kind("pattern"), KeyKind::kPattern);
  EXPECT_FALSE(parse_key_kind("fuzzy").has_value());
}

TEST(Time, Millis) {
  EXPECT_EQ(from_millis(3), 3000);
}

}  // namespace
}  // namespace spdht
