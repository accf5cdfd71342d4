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

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spdht {

// Simulated time in microseconds.
using SimTime = std::int64_t;
inline constexpr SimTime kMillisecond = 1000;

constexpr SimTime from_millis(std::int64_t ms) { return ms * kMillisecond; }

struct NodeId {
  std::uint32_t value = 0;

  constexpr bool valid() const noexcept { return value != 0; }
  constexpr auto operator<=>(const NodeId&) const = default;
};

enum class Role : std::uint8_t { kAgent, kRAgent, kLus, kClient };

std::string_view to_string(Role role);

// 160-bit content digest identifying a DistObject.
class ObjectId {
 public:
  static constexpr std::size_t kBytes = 20;
  using Bytes = std::array<std::uint8_t, kBytes>;

  constexpr ObjectId() = default;
  constexpr explicit ObjectId(const Bytes& bytes) : bytes_(bytes) {}

  const Bytes& bytes() const noexcept { return bytes_; }
  std::string hex() const;
  // First 12 hex digits; for human-facing diagnostics only.
  std::string short_hex() const;
  static std::optional<ObjectId> from_hex(std::string_view text);

  constexpr auto operator<=>(const ObjectId&) const = default;

 private:
  Bytes bytes_{};
};

struct LocalityDescriptor {
  std::string network_domain;
  std::string as_domain;
  std::string country;
  std::string continent;

  bool well_formed() const noexcept;
  bool operator==(const LocalityDescriptor&) const = default;
};

// Number of matching tiers, scanned continent -> country -> AS -> network
// and stopping at the first mismatch. 4 means every tier matches.
int proximity_rank(const LocalityDescriptor& a, const LocalityDescriptor& b);

enum class KeyKind : std::uint8_t { kExactType, kPattern };

std::string_view to_string(KeyKind kind);
std::optional<KeyKind> parse_key_kind(std::string_view text);

struct PatternKey {
  KeyKind kind = KeyKind::kExactType;
  std::string key;

  static PatternKey exact(std::string type_tag) {
    return {KeyKind::kExactType, std::move(type_tag)};
  }
  static PatternKey pattern(std::string key) {
    return {KeyKind::kPattern, std::move(key)};
  }

  auto operator<=>(const PatternKey&) const = default;
};

struct DistObject {
  ObjectId id;
  std::string type_tag;
  std::set<std::string> index_keys;
  std::string payload;
  std::uint64_t version = 0;

  // True when an object with these fields can be matched by `criterion`.
  bool matches(const PatternKey& criterion) const;

  bool operator==(const DistObject&) const = default;
};

// Length-prefixed big-endian encoding of (type_tag, sorted index_keys,
// payload). The key list is sorted and deduplicated before encoding.
std::vector<std::uint8_t> canonical_encode(std::string_view type_tag,
                                           std::span<const std::string> index_keys,
                                           std::string_view payload);

ObjectId derive_object_id(std::span<const std::uint8_t> encoded);

// Builds a version-0 object whose id is derived from its canonical encoding.
DistObject make_object(std::string type_tag, std::set<std::string> index_keys,
                       std::string payload);

}  // namespace spdht

template <>
struct std::hash<spdht::NodeId> {
  std::size_t operator()(const spdht::NodeId& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};

template <>
struct std::hash<spdht::ObjectId> {
  std::size_t operator()(const spdht::ObjectId& id) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
      h = (h << 8) | id.bytes()[i];
    }
    return h;
  }
};
