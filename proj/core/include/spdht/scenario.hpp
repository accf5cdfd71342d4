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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spdht/invariants.hpp"
#include "spdht/sim.hpp"

namespace spdht {

struct ScenarioNode {
  std::string name;
  Role role = Role::kAgent;
  LocalityDescriptor locality;
  std::optional<std::string> pinned;  // RAgent to contact first
  bool dormant = false;               // waits for a `join` event

  bool operator==(const ScenarioNode&) const = default;
};

struct ObjectSpec {
  std::string type_tag;
  std::set<std::string> index_keys;
  std::string payload;

  bool operator==(const ObjectSpec&) const = default;
};

struct ScenarioEvent {
  enum class Kind : std::uint8_t {
    kInsert,
    kSearch,
    kSearchFirst,
    kUpdate,
    kRead,
    kQueryLus,
    kCrash,
    kRejoin,
    kJoin,
  };
  SimTime time = 0;
  Kind kind = Kind::kInsert;
  std::string client;                 // client-issued kinds
  std::string node;                   // agent, LUS, or fault target
  std::string object;                 // object label
  ObjectSpec spec;                    // insert
  PatternKey criterion;               // search kinds
  std::string payload;                // update
  std::optional<std::string> holder;  // read
  int line = 0;                       // source line, 0 when built in code

  bool operator==(const ScenarioEvent& o) const {
    return time == o.time && kind == o.kind && client == o.client && node == o.node &&
           object == o.object && spec == o.spec && criterion == o.criterion &&
           payload == o.payload && holder == o.holder;
  }
};

std::string_view to_string(ScenarioEvent::Kind kind);

struct Scenario {
  SimConfig config;
  // LUS instances created when none are declared.
  std::size_t lus_count = 2;
  // Extra time simulated after the last event before checks run.
  SimTime drain = from_millis(3000);
  std::vector<std::string> expected_losses;  // object labels
  std::vector<ScenarioNode> nodes;
  std::vector<ScenarioEvent> events;

  bool operator==(const Scenario&) const = default;
};

struct ScenarioIssue {
  enum class Kind : std::uint8_t { kSyntax, kValidation } kind = Kind::kSyntax;
  int line = 0;
  std::string field;
  std::string reason;
};

// Raised with every problem found, in source order.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<ScenarioIssue> issues);
  const std::vector<ScenarioIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ScenarioIssue> issues_;
};

// Parses and validates. Throws ScenarioError.
Scenario parse_scenario(std::string_view text);
// Validation only; empty when the scenario is usable.
std::vector<ScenarioIssue> validate_scenario(const Scenario& scenario);
// Canonical text form; parse_scenario(print_scenario(s)) == s.
std::string print_scenario(const Scenario& scenario);

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 invariant violation
  std::vector<Violation> violations;
  bool quiescent = false;
  SimTime finished_at = 0;
};

// Builds and drives a simulation; nodes and objects are addressed by name.
class ScenarioRun {
 public:
  // Throws ScenarioError when the scenario does not validate.
  explicit ScenarioRun(const Scenario& scenario);
  ~ScenarioRun();
  ScenarioRun(const ScenarioRun&) = delete;
  ScenarioRun& operator=(const ScenarioRun&) = delete;

  // Runs past the last event plus the drain margin, keeps going until the
  // system settles (bounded), then checks invariants.
  RunResult run();

  Simulator& sim() noexcept { return *sim_; }
  const Simulator& sim() const noexcept { return *sim_; }
  const Scenario& scenario() const noexcept { return scenario_; }
  NodeId node(std::string_view name) const;
  const DistObject& object(std::string_view label) const;
  const std::map<std::string, DistObject, std::less<>>& objects() const noexcept {
    return objects_;
  }
  // Request id assigned to the client event at `index` in the scenario.
  std::optional<std::uint64_t> request_of(std::size_t index) const;
  std::string label_of(const ObjectId& id) const;

  void emit_metrics(std::ostream& out, const RunResult& result) const;
  void emit_trace(std::ostream& out) const;

 private:
  Scenario scenario_;
  std::unique_ptr<Simulator> sim_;
  std::map<std::string, NodeId, std::less<>> names_;
  std::map<std::string, DistObject, std::less<>> objects_;
  std::map<std::size_t, std::uint64_t> requests_;
};

}  // namespace spdht
