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

#include <set>
#include <string>
#include <vector>

#include "spdht/sim.hpp"

namespace spdht {

struct Violation {
  std::string name;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// Global consistency checks meant for a settled simulation: cluster sizes,
// the RAgent graph, LUS registries, holder lists against replica stores,
// load tables, secondary copies, replica equality and the runtime audit.
// Losses in `expected_losses` are not reported.
std::vector<Violation> check_quiescent(const Simulator& sim,
                                       const std::set<ObjectId>& expected_losses = {});

// The subset that must hold at every instant: audit log and delivery rules.
std::vector<Violation> check_runtime(const Simulator& sim);

}  // namespace spdht
