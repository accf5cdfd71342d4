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

#include <cstddef>
#include <cstdint>

#include "spdht/types.hpp"

namespace spdht {

// Base-2 logarithm rounded up, with arguments below 2 counted as one step.
constexpr std::uint64_t ceil_log2(std::uint64_t x) noexcept {
  if (x < 2) return 1;
  std::uint64_t bits = 0;
  std::uint64_t v = x - 1;
  while (v != 0) {
    v >>= 1;
    ++bits;
  }
  return bits;
}

// Accounted cost of resolving one criterion against a catalogue of `keys`
// keys: pattern criteria scan every key, exact type criteria use the hashed
// index and are charged ceil(log2 M). An empty catalogue costs nothing.
constexpr std::uint64_t key_lookup_steps(std::uint64_t keys, KeyKind kind) noexcept {
  if (keys == 0) return 0;
  return kind == KeyKind::kPattern ? keys : ceil_log2(keys);
}

}  // namespace spdht
