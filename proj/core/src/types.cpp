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

#include "spdht/types.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

#include "spdht/error.hpp"

namespace spdht {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_field(std::vector<std::uint8_t>& out, std::string_view field) {
  put_u32(out, static_cast<std::uint32_t>(field.size()));
  out.insert(out.end(), field.begin(), field.end());
}

bool ensure_sodium() {
  static const bool ready = sodium_init() >= 0;
  return ready;
}

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kAgent:
      return "agent";
    case Role::kRAgent:
      return "ragent";
    case Role::kLus:
      return "lus";
    case Role::kClient:
      return "client";
  }
  return "?";
}

std::string ObjectId::hex() const {
  std::string out;
  out.reserve(kBytes * 2);
  for (std::uint8_t b : bytes_) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

std::string ObjectId::short_hex() const { return hex().substr(0, 12); }

std::optional<ObjectId> ObjectId::from_hex(std::string_view text) {
  if (text.size() != kBytes * 2) return std::nullopt;
  Bytes bytes{};
  for (std::size_t i = 0; i < kBytes; ++i) {
    const int hi = hex_value(text[2 * i]);
    const int lo = hex_value(text[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return ObjectId(bytes);
}

bool LocalityDescriptor::well_formed() const noexcept {
  return !network_domain.empty() && !as_domain.empty() && !country.empty() &&
         !continent.empty();
}

int proximity_rank(const LocalityDescriptor& a, const LocalityDescriptor& b) {
  if (a.continent != b.continent) return 0;
  if (a.country != b.country) return 1;
  if (a.as_domain != b.as_domain) return 2;
  if (a.network_domain != b.network_domain) return 3;
  return 4;
}

std::string_view to_string(KeyKind kind) {
  return kind == KeyKind::kExactType ? "exact" : "pattern";
}

std::optional<KeyKind> parse_key_kind(std::string_view text) {
  if (text == "exact") return KeyKind::kExactType;
  if (text == "pattern") return KeyKind::kPattern;
  return std::nullopt;
}

bool DistObject::matches(const PatternKey& criterion) const {
  if (criterion.kind == KeyKind::kExactType) return type_tag == criterion.key;
  return index_keys.contains(criterion.key);
}

std::vector<std::uint8_t> canonical_encode(std::string_view type_tag,
                                           std::span<const std::string> index_keys,
                                           std::string_view payload) {
  std::vector<std::string> keys(index_keys.begin(), index_keys.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  std::vector<std::uint8_t> out;
  std::size_t size = 12 + type_tag.size() + payload.size();
  for (const auto& k : keys) size += 4 + k.size();
  out.reserve(size);

  put_field(out, type_tag);
  put_u32(out, static_cast<std::uint32_t>(keys.size()));
  for (const auto& k : keys) put_field(out, k);
  put_field(out, payload);
  return out;
}

ObjectId derive_object_id(std::span<const std::uint8_t> encoded) {
  if (encoded.empty()) fail(ErrorCode::kInvalidArgument, "empty encoding");
  if (!ensure_sodium()) throw std::runtime_error("libsodium failed to initialise");
  ObjectId::Bytes digest{};
  crypto_generichash(digest.data(), digest.size(), encoded.data(), encoded.size(),
                     nullptr, 0);
  return ObjectId(digest);
}

DistObject make_object(std::string type_tag, std::set<std::string> index_keys,
                       std::string payload) {
  const std::vector<std::string> keys(index_keys.begin(), index_keys.end());
  DistObject obj;
  obj.id = derive_object_id(canonical_encode(type_tag, keys, payload));
  obj.type_tag = std::move(type_tag);
  obj.index_keys = std::move(index_keys);
  obj.payload = std::move(payload);
  obj.version = 0;
  return obj;
}

}  // namespace spdht
