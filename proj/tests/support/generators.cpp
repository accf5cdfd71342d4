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

#include "generators.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace spdht::testing {

LocalityDescriptor cluster_locality(std::size_t i) {
  const std::string n = std::to_string(i);
  return {"net" + n, "as" + n, "c" + n, "eu"};
}

std::string agent_name(std::size_t cluster, std::size_t index) {
  return "a" + std::to_string(cluster) + "_" + std::to_string(index);
}

RandomTopology draw_topology(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RandomTopology t;
  t.clusters = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
  t.agents_per_cluster = std::uniform_int_distribution<std::size_t>(4, 32)(rng);
  t.agents_max = std::uniform_int_distribution<std::size_t>(t.agents_per_cluster, 32)(rng);
  t.objects = std::uniform_int_distribution<std::size_t>(50, 512)(rng);
  t.searches = 40;
  return t;
}

Scenario random_search_scenario(const RandomTopology& topo, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.config.network.seed = seed;
  s.config.thresholds = {2, 64};
  s.drain = from_millis(2000);

  std::vector<std::vector<std::string>> agents(topo.clusters);
  for (std::size_t c = 0; c < topo.clusters; ++c) {
    s.nodes.push_back({"r" + std::to_string(c), Role::kRAgent, cluster_locality(c)});
  }
  for (std::size_t c = 0; c < topo.clusters; ++c) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(
        topo.agents_per_cluster, std::max(topo.agents_per_cluster, topo.agents_max))(rng);
    for (std::size_t i = 0; i < n; ++i) {
      agents[c].push_back(agent_name(c, i));
      s.nodes.push_back({agents[c].back(), Role::kAgent, cluster_locality(c)});
    }
  }
  s.nodes.push_back({"client", Role::kClient, cluster_locality(0)});

  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto any_agent = [&] {
    const auto& group = agents[pick(agents.size())];
    return group[pick(group.size())];
  };

  SimTime t = from_millis(1000);
  for (std::size_t i = 0; i < topo.objects; ++i) {
    ScenarioEvent e;
    e.time = t;
    e.kind = ScenarioEvent::Kind::kInsert;
    e.client = "client";
    e.node = any_agent();
    e.object = "o" + std::to_string(i);
    e.spec.type_tag = "T" + std::to_string(pick(topo.type_tags));
    const std::size_t nkeys = pick(4);
    for (std::size_t k = 0; k < nkeys; ++k) {
      e.spec.index_keys.insert("k" + std::to_string(pick(topo.pattern_keys)));
    }
    e.spec.payload = "p" + std::to_string(seed) + "_" + std::to_string(i);
    s.events.push_back(std::move(e));
    t += from_millis(2);
  }
  t += from_millis(1000);
  for (std::size_t i = 0; i < topo.searches; ++i) {
    ScenarioEvent e;
    e.time = t;
    e.kind = ScenarioEvent::Kind::kSearch;
    e.client = "client";
    e.node = any_agent();
    if (pick(2) == 0) {
      e.criterion = PatternKey::exact("T" + std::to_string(pick(topo.type_tags)));
    } else {
      e.criterion = PatternKey::pattern("k" + std::to_string(pick(topo.pattern_keys)));
    }
    s.events.push_back(std::move(e));
    t += from_millis(5);
  }
  return s;
}

Scenario random_chaos_scenario(const RandomTopology& topo, std::size_t crashes,
                               SimTime crash_gap, std::uint64_t seed) {
  Scenario s = random_search_scenario(topo, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  std::vector<std::string> peers;
  std::vector<std::string> agents;
  for (const auto& n : s.nodes) {
    if (n.role == Role::kAgent) agents.push_back(n.name);
    if (n.role == Role::kAgent || n.role == Role::kRAgent) peers.push_back(n.name);
  }
  const SimTime start = s.events.back().time + from_millis(500);
  std::vector<ScenarioEvent> extra;
  const SimTime span = static_cast<SimTime>(crashes + 1) * crash_gap;
  for (std::size_t i = 0; i < topo.searches; ++i) {
    ScenarioEvent e;
    e.time = start + static_cast<SimTime>(pick(static_cast<std::size_t>(span / 1000))) * 1000;
    e.client = "client";
    e.node = agents[pick(agents.size())];
    switch (pick(3)) {
      case 0:
        e.kind = ScenarioEvent::Kind::kUpdate;
        e.object = "o" + std::to_string(pick(topo.objects));
        e.payload = "u" + std::to_string(i);
        break;
      case 1:
        e.kind = ScenarioEvent::Kind::kSearchFirst;
        e.criterion = PatternKey::exact("T" + std::to_string(pick(topo.type_tags)));
        break;
      default:
        e.kind = ScenarioEvent::Kind::kSearch;
        e.criterion = PatternKey::pattern("k" + std::to_string(pick(topo.pattern_keys)));
        break;
    }
    extra.push_back(std::move(e));
  }
  std::set<std::string> used;
  for (std::size_t i = 0; i < crashes; ++i) {
    std::string victim;
    do {
      victim = peers[pick(peers.size())];
    } while (used.contains(victim));
    used.insert(victim);
    ScenarioEvent crash;
    crash.time = start + static_cast<SimTime>(i + 1) * crash_gap;
    crash.kind = ScenarioEvent::Kind::kCrash;
    crash.node = victim;
    ScenarioEvent back = crash;
    back.time += crash_gap / 2;
    back.kind = ScenarioEvent::Kind::kRejoin;
    extra.push_back(std::move(crash));
    extra.push_back(std::move(back));
  }
  for (auto& e : extra) s.events.push_back(std::move(e));
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.time < b.time; });
  return s;
}

Scenario churn_scenario(std::size_t peak, std::size_t objects, std::uint64_t seed) {
  Scenario s;
  s.config.network.seed = seed;
  s.config.thresholds = {2, 8};
  s.drain = from_millis(3000);
  s.nodes.push_back({"r0", Role::kRAgent, cluster_locality(0)});
  for (std::size_t i = 0; i < peak; ++i) {
    ScenarioNode n{agent_name(0, i), Role::kAgent, cluster_locality(0)};
    n.dormant = i >= 2;
    s.nodes.push_back(std::move(n));
  }
  s.nodes.push_back({"client", Role::kClient, cluster_locality(0)});

  SimTime t = from_millis(1000);
  for (std::size_t i = 0; i < objects; ++i) {
    ScenarioEvent e;
    e.time = t;
    e.kind = ScenarioEvent::Kind::kInsert;
    e.client = "client";
    e.node = agent_name(0, i % 2);
    e.object = "o" + std::to_string(i);
    e.spec.type_tag = "T" + std::to_string(i % 5);
    e.spec.index_keys = {"k" + std::to_string(i % 3)};
    e.spec.payload = "v" + std::to_string(i);
    s.events.push_back(std::move(e));
    t += from_millis(5);
  }
  t += from_millis(1000);
  for (std::size_t i = 2; i < peak; ++i) {
    ScenarioEvent e;
    e.time = t;
    e.kind = ScenarioEvent::Kind::kJoin;
    e.node = agent_name(0, i);
    s.events.push_back(std::move(e));
    t += from_millis(400);
  }
  t += from_millis(2000);
  std::vector<std::size_t> order(peak);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(peak - 2);
  for (std::size_t i : order) {
    ScenarioEvent e;
    e.time = t;
    e.kind = ScenarioEvent::Kind::kCrash;
    e.node = agent_name(0, i);
    s.events.push_back(std::move(e));
    t += from_millis(1500);
  }
  return s;
}

}  // namespace spdht::testing
