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

// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "spdht/nodes.hpp"
#include "spdht/scenario.hpp"
#include "spdht/steps.hpp"

namespace spdht::testing {
namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (detail.size() < 400) detail += (detail.empty() ? "" : "; ") + why;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

ScenarioEvent client_event(SimTime at, ScenarioEvent::Kind kind, std::string agent) {
  ScenarioEvent e;
  e.time = at;
  e.kind = kind;
  e.client = "client";
  e.node = std::move(agent);
  return e;
}

ScenarioEvent fault_event(SimTime at, ScenarioEvent::Kind kind, std::string node) {
  ScenarioEvent e;
  e.time = at;
  e.kind = kind;
  e.node = std::move(node);
  return e;
}

void sort_events(Scenario& s) {
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.time < b.time; });
}

// Fixed-size clusters with `objects` inserts and no searches.
Scenario static_scenario(std::size_t clusters, std::size_t agents, std::size_t objects,
                         std::uint64_t seed) {
  RandomTopology topo;
  topo.clusters = clusters;
  topo.agents_per_cluster = agents;
  topo.agents_max = agents;
  topo.objects = objects;
  topo.searches = 0;
  return random_search_scenario(topo, seed);
}

std::vector<const PeerNode*> live_ragents(const Simulator& sim) {
  std::vector<const PeerNode*> out;
  for (NodeId id : sim.live_ragents()) {
    const PeerNode* p = sim.peer(id);
    if (p != nullptr && p->cluster() != nullptr) out.push_back(p);
  }
  return out;
}

// Quiescent, and every live Agent sits in the cluster of a live RAgent.
bool settled(const Simulator& sim) {
  if (!sim.quiescent()) return false;
  for (NodeId id : sim.live_agents()) {
    const PeerNode* p = sim.peer(id);
    if (p->mode() != PeerNode::Mode::kAgent) return false;
    if (!sim.alive(p->ragent())) return false;
    const PeerNode* ra = sim.peer(p->ragent());
    if (ra == nullptr || ra->cluster() == nullptr || !ra->cluster()->members.contains(id)) return false;
  }
  return true;
}

std::string violations_text(const RunResult& r) {
  std::string out;
  for (const auto& v : r.violations) out += v.name + "(" + v.detail + ") ";
  return out;
}

// Exactly two live holders per object, matching the single catalogue that
// lists it, owner first.
void check_two_holders(const ScenarioRun& run, Verdict& v) {
  const Simulator& sim = run.sim();
  std::map<ObjectId, int> listed;
  for (const PeerNode* ra : live_ragents(sim)) {
    for (const auto& [oid, rec] : ra->cluster()->catalogue.records()) {
      ++listed[oid];
      std::vector<NodeId> cat(rec.holders.begin(), rec.holders.end());
      std::vector<NodeId> real = holders_of(sim, oid);
      std::sort(cat.begin(), cat.end());
      if (cat != real) v.fail(run.label_of(oid) + " catalogue/store holder mismatch");
      if (!rec.holders.empty() && !ra->cluster()->members.contains(rec.holders.owner())) {
        v.fail(run.label_of(oid) + " owner not a member");
      }
    }
  }
  for (const auto& [label, obj] : run.objects()) {
    const auto real = holders_of(sim, obj.id);
    if (real.size() != 2) v.fail(label + " has " + std::to_string(real.size()) + " holders");
    if (listed[obj.id] != 1) v.fail(label + " listed by " + std::to_string(listed[obj.id]) + " catalogues");
  }
}

// ---- criteria 1, 3, 4 ----------------------------------------------------------

struct RandomSweep {
  Verdict cost;
  Verdict correctness;
  Verdict batching;
  std::size_t searches = 0;
  std::size_t bounded = 0;
  double seconds = 0;
};

RandomSweep random_sweep(int scenarios) {
  RandomSweep out;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < scenarios; ++i) {
    const std::uint64_t seed = 1 + static_cast<std::uint64_t>(i);
    const RandomTopology topo = draw_topology(seed);
    const Scenario s = random_search_scenario(topo, seed);
    ScenarioRun run(s);
    const RunResult r = run.run();
    const std::string tag = "seed " + std::to_string(seed);
    if (r.exit_code != 0) out.correctness.fail(tag + ": " + violations_text(r));
    for (std::size_t e = 0; e < s.events.size(); ++e) {
      if (s.events[e].kind != ScenarioEvent::Kind::kSearch) continue;
      const auto request = run.request_of(e);
      const OpRecord* op = request ? run.sim().op(*request) : nullptr;
      if (op == nullptr || op->outcome != Outcome::kOk) {
        out.cost.fail(tag + ": search did not complete");
        continue;
      }
      ++out.searches;
      const RequestTally* tally = run.sim().steps().find(*request);
      if (tally == nullptr) {
        out.cost.fail(tag + ": no tally");
        continue;
      }
      const OracleCost c = oracle_cost(*tally);
      if (c.decomposed != c.measured || op->decomposed != op->steps || c.measured != op->steps) {
        out.cost.fail(tag + " req " + std::to_string(*request) + ": measured " +
                      std::to_string(c.measured) + " decomposed " + std::to_string(c.decomposed));
      }
      if (c.bound_applies) {
        ++out.bounded;
        if (c.measured > c.bound) {
          out.cost.fail(tag + " req " + std::to_string(*request) + ": measured " +
                        std::to_string(c.measured) + " > bound " + std::to_string(c.bound));
        }
      }

      const std::set<ObjectId> got(op->results.begin(), op->results.end());
      if (got.size() != op->results.size()) out.correctness.fail(tag + ": duplicate ids");
      if (got != brute_force_scan(run.sim(), s.events[e].criterion)) {
        out.correctness.fail(tag + ": result differs from replica scan for " +
                             s.events[e].criterion.key);
      }
      for (const auto& [ragent, t] : tally->clusters) {
        if (t.fetch_messages > t.holders_contacted.size()) {
          out.batching.fail(tag + ": " + std::to_string(t.fetch_messages) + " fetches to " +
                            std::to_string(t.holders_contacted.size()) + " holders");
        }
      }
    }
  }
  out.seconds = seconds_since(start);
  if (out.seconds >= 60) out.cost.fail("runtime " + fmt(out.seconds) + " s");
  return out;
}

// ---- criterion 2 -----------------------------------------------------------------

Verdict ideal_closed_form() {
  Verdict v;
  std::ostringstream detail;
  for (std::size_t b : {64u, 256u, 1024u}) {
    for (std::size_t n : {16u, 64u}) {
      const std::size_t clusters = n / 8;
      Scenario s = static_scenario(clusters, 8, 0, b * 31 + n);
      s.config.delegation.factor = 1e9;
      // One distinct type per object, spread evenly over the clusters.
      std::vector<std::vector<std::string>> agents(clusters);
      for (const auto& node : s.nodes) {
        if (node.role == Role::kAgent) agents[static_cast<std::size_t>(node.name[1] - '0')].push_back(node.name);
      }
      SimTime t = from_millis(1000);
      for (std::size_t i = 0; i < b; ++i) {
        ScenarioEvent e = client_event(t, ScenarioEvent::Kind::kInsert,
                                       agents[i % clusters][(i / clusters) % 8]);
        e.object = "o" + std::to_string(i);
        e.spec.type_tag = "T" + std::to_string(i);
        e.spec.payload = "p" + std::to_string(i);
        s.events.push_back(std::move(e));
        t += from_millis(1);
      }
      ScenarioRun run(s);
      const RunResult r = run.run();
      const std::string tag = "B=" + std::to_string(b) + " N=" + std::to_string(n);
      if (r.exit_code != 0) v.fail(tag + ": " + violations_text(r));

      // Observed M, P, L per cluster; the idealisation needs them uniform.
      std::uint64_t s_closed = 0;
      std::set<std::size_t> ms;
      std::set<std::size_t> ls;
      for (const PeerNode* ra : live_ragents(run.sim())) {
        const auto& cat = ra->cluster()->catalogue;
        std::map<PatternKey, std::size_t> per_key;
        for (const auto& [oid, rec] : cat.records()) {
          for (const PatternKey& k : rec.meta.keys()) ++per_key[k];
        }
        std::size_t p = 0;
        for (const auto& [k, count] : per_key) p = std::max(p, count);
        std::size_t l = 0;
        for (const auto& [agent, count] : ra->cluster()->loads.counts()) l = std::max(l, count);
        ms.insert(cat.key_count());
        ls.insert(l);
        s_closed += search_bound_term(cat.key_count(), p, l);
      }
      if (ms.size() != 1 || *ms.begin() != b / clusters) v.fail(tag + ": M not uniform");
      if (ls.size() != 1 || *ls.begin() != 2 * b / n) v.fail(tag + ": L != 2B/N");
      const std::uint64_t oracle = oracle_ideal(b, n);
      if (s_closed != oracle || ideal_search_steps(b, n) != oracle) {
        v.fail(tag + ": closed form " + std::to_string(s_closed) + " expected " +
               std::to_string(oracle));
      }
      detail << tag << "->" << s_closed << ' ';
    }
  }
  if (v.pass) v.detail = detail.str();
  return v;
}

// ---- criterion 5 -----------------------------------------------------------------

Verdict placement_balance() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  Scenario s = static_scenario(1, 10, 1000, 5);
  ScenarioRun run(s);
  const RunResult r = run.run();
  if (r.exit_code != 0) v.fail(violations_text(r));
  std::size_t lo = SIZE_MAX;
  std::size_t hi = 0;
  for (NodeId id : run.sim().live_agents()) {
    const std::size_t n = run.sim().peer(id)->store().size();
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  const double secs = seconds_since(start);
  if (hi - lo > 1) v.fail("max " + std::to_string(hi) + " min " + std::to_string(lo));
  if (secs >= 5) v.fail("runtime " + fmt(secs) + " s");
  if (v.pass) v.detail = "replicas per agent " + std::to_string(lo) + ".." + std::to_string(hi) + ", " + fmt(secs) + " s";
  return v;
}

// ---- criterion 6 -----------------------------------------------------------------

Verdict split_merge() {
  Verdict v;
  const std::size_t objects = 60;
  std::size_t splits = 0;
  std::size_t merges = 0;
  std::size_t samples = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Scenario s = churn_scenario(40, objects, seed);
    std::size_t entries = 0;
    for (const auto& e : s.events) {
      if (e.kind == ScenarioEvent::Kind::kInsert) entries += 1 + e.spec.index_keys.size();
    }
    ScenarioRun run(s);
    Simulator& sim = run.sim();
    const auto& th = s.config.thresholds;
    const SimTime end = s.events.back().time + s.drain;
    std::size_t seen_events = 0;
    bool inserted = false;
    while (sim.now() < end) {
      sim.run_until(sim.now() + s.config.heartbeat.period);
      for (; seen_events < sim.member_events().size(); ++seen_events) {
        const auto& kind = sim.member_events()[seen_events].kind;
        splits += kind == "split";
        merges += kind == "merge";
      }
      if (!settled(sim)) continue;
      const auto ragents = live_ragents(sim);
      std::size_t agents = 0;
      std::size_t records = 0;
      std::size_t entry_total = 0;
      for (const PeerNode* ra : ragents) {
        agents += ra->cluster()->members.size();
        records += ra->cluster()->catalogue.object_count();
        entry_total += ra->cluster()->catalogue.entry_count();
      }
      if (!inserted) {
        inserted = records == objects;
        if (!inserted) continue;
      }
      ++samples;
      const std::string at = "seed " + std::to_string(seed) + " t=" + std::to_string(sim.now() / 1000) + "ms";
      if (agents >= 2 * th.min_cluster) {
        for (const PeerNode* ra : ragents) {
          const std::size_t m = ra->cluster()->members.size();
          if (m < th.min_cluster || m > th.max_cluster) {
            v.fail(at + ": cluster " + ra->name() + " has " + std::to_string(m) + " members");
          }
        }
      }
      if (records != objects || entry_total != entries) {
        v.fail(at + ": catalogue holds " + std::to_string(records) + " objects / " +
               std::to_string(entry_total) + " entries");
      }
    }
    const RunResult r = run.run();
    if (r.exit_code != 0) v.fail("seed " + std::to_string(seed) + ": " + violations_text(r));
  }
  if (splits == 0 || merges == 0) v.fail("no split or merge exercised");
  if (v.pass) {
    v.detail = std::to_string(splits) + " splits, " + std::to_string(merges) + " merges, " +
               std::to_string(samples) + " quiescent samples";
  }
  return v;
}

// ---- criterion 7 -----------------------------------------------------------------

Verdict single_crash() {
  Verdict v;
  const Scenario base = static_scenario(4, 6, 200, 7);
  const SimTime crash_at = base.events.back().time + from_millis(1000);
  const auto& hb = base.config.heartbeat;
  const SimTime drain = hb.period + 2 * base.config.round_trip_timeout();
  std::vector<std::string> agents;
  for (const auto& n : base.nodes) {
    if (n.role == Role::kAgent) agents.push_back(n.name);
  }
  for (const std::string& victim : agents) {
    Scenario s = base;
    s.events.push_back(fault_event(crash_at, ScenarioEvent::Kind::kCrash, victim));
    ScenarioRun run(s);
    run.sim().run_until(crash_at + hb.failure_timeout + drain);
    Verdict one;
    check_two_holders(run, one);
    if (!run.sim().reported_losses().empty()) one.fail("losses reported");
    const RunResult r = run.run();
    if (r.exit_code != 0) one.fail(violations_text(r));
    if (!one.pass) v.fail("crash " + victim + ": " + one.detail);
  }
  if (v.pass) {
    v.detail = std::to_string(agents.size()) + " single-agent crashes healed within " +
               std::to_string((hb.failure_timeout + drain) / 1000) + " ms";
  }
  return v;
}

// ---- criterion 8 -----------------------------------------------------------------

Verdict double_crash() {
  Verdict v;
  Scenario base = static_scenario(2, 6, 6, 8);
  // Pick an object whose holder pair no other object shares.
  ScenarioRun probe(base);
  probe.run();
  std::map<std::vector<NodeId>, std::vector<std::string>> by_pair;
  for (const auto& [label, obj] : probe.objects()) by_pair[holders_of(probe.sim(), obj.id)].push_back(label);
  std::string target;
  std::vector<NodeId> pair;
  for (const auto& [holders, labels] : by_pair) {
    if (labels.size() == 1 && holders.size() == 2) {
      target = labels.front();
      pair = holders;
      break;
    }
  }
  if (target.empty()) {
    v.fail("no object with a unique holder pair");
    return v;
  }
  const std::string h1 = probe.sim().name_of(pair[0]);
  const std::string h2 = probe.sim().name_of(pair[1]);
  const SimTime t0 = base.events.back().time + from_millis(1000);
  const SimTime ft = base.config.heartbeat.failure_timeout;

  {
    Scenario s = base;
    s.events.push_back(fault_event(t0, ScenarioEvent::Kind::kCrash, h1));
    s.events.push_back(fault_event(t0 + 2 * ft, ScenarioEvent::Kind::kCrash, h2));
    ScenarioRun run(s);
    const RunResult r = run.run();
    if (r.exit_code != 0) v.fail("separated: " + violations_text(r));
    if (!run.sim().reported_losses().empty()) v.fail("separated: loss reported");
    check_two_holders(run, v);
    for (NodeId h : holders_of(run.sim(), run.object(target).id)) {
      const DistObject& copy = run.sim().peer(h)->store().at(run.object(target).id);
      if (copy.payload != run.object(target).payload) v.fail("separated: payload changed");
    }
  }
  {
    Scenario s = base;
    s.expected_losses = {target};
    s.events.push_back(fault_event(t0, ScenarioEvent::Kind::kCrash, h1));
    s.events.push_back(fault_event(t0, ScenarioEvent::Kind::kCrash, h2));
    ScenarioRun run(s);
    const RunResult r = run.run();
    if (r.exit_code != 0) v.fail("same step: " + violations_text(r));
    const std::set<ObjectId> want{run.object(target).id};
    if (run.sim().reported_losses() != want) {
      v.fail("same step: " + std::to_string(run.sim().reported_losses().size()) + " losses reported");
    }
    for (const auto& [label, obj] : run.objects()) {
      if (label == target) continue;
      if (holders_of(run.sim(), obj.id).size() != 2) v.fail("same step: " + label + " not healed");
    }
  }
  if (v.pass) v.detail = "object " + target + " on " + h1 + "+" + h2;
  return v;
}

// ---- criterion 9 -----------------------------------------------------------------

Verdict ragent_failover() {
  Verdict v;
  Scenario s = static_scenario(3, 6, 60, 9);
  const SimTime t0 = s.events.back().time + from_millis(1000);
  const SimTime crash_at = t0 + from_millis(1000);
  const SimTime t1 = crash_at + from_millis(3000);
  std::vector<PatternKey> criteria;
  for (int i = 0; i < 8; ++i) criteria.push_back(PatternKey::exact("T" + std::to_string(i)));
  for (int i = 0; i < 6; ++i) criteria.push_back(PatternKey::pattern("k" + std::to_string(i)));
  const std::vector<std::string> origins = {agent_name(1, 2), agent_name(0, 3), agent_name(2, 4)};
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  SimTime t = 0;
  for (const auto& origin : origins) {
    for (const auto& c : criteria) {
      ScenarioEvent before = client_event(t0 + t, ScenarioEvent::Kind::kSearch, origin);
      before.criterion = c;
      ScenarioEvent after = before;
      after.time = t1 + t;
      s.events.push_back(before);
      s.events.push_back(after);
      t += from_millis(10);
    }
  }
  s.events.push_back(fault_event(crash_at, ScenarioEvent::Kind::kCrash, "r1"));
  sort_events(s);

  ScenarioRun run(s);
  const RunResult r = run.run();
  if (r.exit_code != 0) v.fail(violations_text(r));
  const Simulator& sim = run.sim();
  // Pair searches by (origin, criterion) in issue order.
  std::map<std::pair<std::string, PatternKey>, std::vector<std::set<ObjectId>>> results;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    if (e.kind != ScenarioEvent::Kind::kSearch) continue;
    const OpRecord* op = sim.op(*run.request_of(i));
    if (op == nullptr || op->outcome != Outcome::kOk) {
      v.fail("search " + e.criterion.key + " from " + e.node + " failed");
      continue;
    }
    results[{e.node, e.criterion}].emplace_back(op->results.begin(), op->results.end());
  }
  std::size_t compared = 0;
  for (const auto& [key, sets] : results) {
    if (sets.size() != 2 || sets[0] != sets[1]) {
      v.fail(key.second.key + " from " + key.first + " differs across failover");
    }
    ++compared;
  }

  const NodeId crashed = run.node("r1");
  NodeId promoted;
  std::map<std::string, std::set<NodeId>> votes;
  for (const auto& e : sim.member_events()) {
    if (e.kind == "promote" && e.node == crashed) promoted = e.cluster;
    if (e.kind == "vote" && e.cluster == crashed) votes[e.detail].insert(e.node);
  }
  if (!promoted.valid()) v.fail("no promotion");
  for (NodeId lus : sim.lus_nodes()) {
    const auto& reg = sim.lus(lus)->registry();
    if (!reg.contains(promoted)) v.fail(sim.name_of(lus) + " lacks the promoted RAgent");
    if (reg.contains(crashed)) v.fail(sim.name_of(lus) + " still lists r1");
  }
  std::size_t initiators = 0;
  for (const auto& [choice, voters] : votes) initiators += voters.size();
  if (votes.size() != 1) v.fail(std::to_string(votes.size()) + " distinct vote outcomes");
  if (initiators < 2) v.fail("fewer than two vote initiators");
  if (promoted.valid() && votes.size() == 1) {
    const PeerNode* p = sim.peer(promoted);
    const auto* c = p != nullptr ? p->cluster() : nullptr;
    const std::string want = votes.begin()->first;
    if (c == nullptr || !c->secondary_backup ||
        "secondary=" + sim.name_of(*c->secondary_backup) != want) {
      v.fail("promoted RAgent's secondary differs from the vote (" + want + ")");
    }
  }
  if (v.pass) {
    v.detail = std::to_string(compared) + " searches identical, promoted " + sim.name_of(promoted) +
               ", " + std::to_string(initiators) + " voters agree on " + votes.begin()->first;
  }
  return v;
}

// ---- criterion 10 ----------------------------------------------------------------

Verdict update_consistency() {
  Verdict v;
  Scenario s = static_scenario(2, 5, 0, 10);
  const SimTime t0 = from_millis(1000);
  ScenarioEvent ins = client_event(t0, ScenarioEvent::Kind::kInsert, agent_name(0, 0));
  ins.object = "target";
  ins.spec.type_tag = "Doc";
  ins.spec.payload = "v0";
  s.events.push_back(ins);
  std::vector<std::string> agents;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 5; ++i) agents.push_back(agent_name(c, i));
  }
  const SimTime t1 = t0 + from_millis(1000);
  for (int i = 0; i < 50; ++i) {
    ScenarioEvent u = client_event(t1, ScenarioEvent::Kind::kUpdate, agents[i % agents.size()]);
    u.object = "target";
    u.payload = "payload-" + std::to_string(i);
    s.events.push_back(u);
  }
  ScenarioRun run(s);
  const RunResult r = run.run();
  if (r.exit_code != 0) v.fail(violations_text(r));
  const Simulator& sim = run.sim();
  const ObjectId oid = run.object("target").id;

  std::vector<std::uint64_t> versions;
  std::map<std::uint64_t, std::string> payload_at;
  std::size_t without_progress = 0;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    if (s.events[i].kind != ScenarioEvent::Kind::kUpdate) continue;
    const OpRecord* op = sim.op(*run.request_of(i));
    if (op == nullptr || op->outcome != Outcome::kOk) {
      v.fail("update " + std::to_string(i) + " did not succeed");
      continue;
    }
    versions.push_back(op->version);
    payload_at[op->version] = s.events[i].payload;
    if (op->progress_notifications == 0) ++without_progress;
  }
  std::sort(versions.begin(), versions.end());
  std::vector<std::uint64_t> want(50);
  for (std::uint64_t i = 0; i < 50; ++i) want[i] = i + 1;
  if (versions != want) v.fail("versions are not 1..50");
  const auto it = sim.audit().committed.find(oid);
  if (it == sim.audit().committed.end() || it->second != want) v.fail("commit order is not 1..50");
  if (without_progress > 0) v.fail(std::to_string(without_progress) + " requests without progress");

  const auto holders = holders_of(sim, oid);
  if (holders.size() != 2) v.fail(std::to_string(holders.size()) + " holders");
  for (NodeId h : holders) {
    const DistObject& copy = sim.peer(h)->store().at(oid);
    if (copy != sim.peer(holders.front())->store().at(oid)) v.fail("replicas differ");
    if (copy.version != 50 || copy.payload != payload_at[50]) v.fail("replica is not the last write");
  }
  if (v.pass) v.detail = "versions 1..50, " + std::to_string(holders.size()) + " identical replicas";
  return v;
}

// ---- criterion 11 ----------------------------------------------------------------

Verdict hot_migration() {
  Verdict v;
  Scenario s = static_scenario(2, 4, 0, 11);
  const SimTime t0 = from_millis(1000);
  ScenarioEvent ins = client_event(t0, ScenarioEvent::Kind::kInsert, agent_name(0, 1));
  ins.object = "hot";
  ins.spec.type_tag = "Hot";
  ins.spec.payload = "data";
  s.events.push_back(ins);
  const std::size_t threshold = s.config.migration_threshold;
  std::vector<std::size_t> searches;
  for (std::size_t i = 0; i <= threshold; ++i) {
    ScenarioEvent e = client_event(t0 + from_millis(1000) * static_cast<SimTime>(i + 1),
                                   ScenarioEvent::Kind::kSearchFirst, agent_name(1, i % 4));
    e.criterion = PatternKey::exact("Hot");
    searches.push_back(s.events.size());
    s.events.push_back(e);
  }
  ScenarioRun run(s);
  const RunResult r = run.run();
  if (r.exit_code != 0) v.fail(violations_text(r));
  const Simulator& sim = run.sim();
  std::vector<std::uint64_t> inter;
  for (std::size_t idx : searches) {
    const OpRecord* op = sim.op(*run.request_of(idx));
    if (op == nullptr || op->outcome != Outcome::kOk || op->results.size() != 1 ||
        op->results.front() != run.object("hot").id) {
      v.fail("first-search " + std::to_string(idx) + " missed the object");
      inter.push_back(0);
      continue;
    }
    inter.push_back(op->inter_ragent_messages);
  }
  for (std::size_t i = 0; i < threshold && i < inter.size(); ++i) {
    if (inter[i] == 0) v.fail("remote search " + std::to_string(i) + " sent no inter-RAgent messages");
  }
  if (inter.back() != 0) v.fail("post-migration search sent " + std::to_string(inter.back()) + " inter-RAgent messages");
  const PeerNode* r1 = sim.peer(run.node("r1"));
  if (r1 == nullptr || r1->cluster() == nullptr ||
      !r1->cluster()->catalogue.contains(run.object("hot").id)) {
    v.fail("object not catalogued in the searching cluster");
  }
  if (v.pass) {
    std::string seq;
    for (auto n : inter) seq += std::to_string(n) + " ";
    v.detail = "inter-RAgent messages per search: " + seq;
  }
  return v;
}

// ---- criterion 12 ----------------------------------------------------------------

std::string render(const Scenario& s) {
  ScenarioRun run(s);
  const RunResult r = run.run();
  std::ostringstream out;
  run.emit_metrics(out, r);
  run.emit_trace(out);
  return out.str();
}

Verdict determinism() {
  Verdict v;
  RandomTopology topo = draw_topology(12);
  topo.objects = 120;
  const std::vector<std::pair<std::string, Scenario>> cases = {
      {"chaos", random_chaos_scenario(topo, 4, from_millis(1500), 12)},
      {"churn", churn_scenario(24, 30, 12)},
      {"search", random_search_scenario(draw_topology(99), 99)},
  };
  std::size_t bytes = 0;
  for (const auto& [name, s] : cases) {
    const std::string a = render(s);
    const std::string b = render(s);
    if (a != b) v.fail(name + " output differs between runs");
    bytes += a.size();
  }
  if (v.pass) v.detail = std::to_string(cases.size()) + " scenarios, " + std::to_string(bytes) + " bytes identical";
  return v;
}

}  // namespace
}  // namespace spdht::testing

int main() {
  using namespace spdht::testing;
  int failures = 0;
  auto report = [&](int n, const Verdict& v) {
    std::printf("criterion %2d: %s  %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  };
  const RandomSweep sweep = random_sweep(100);
  Verdict c1 = sweep.cost;
  if (c1.pass) {
    c1.detail = std::to_string(sweep.searches) + " searches over 100 scenarios (" +
                std::to_string(sweep.bounded) + " with M,P>=1), " + fmt(sweep.seconds) + " s";
  }
  report(1, c1);
  report(2, ideal_closed_form());
  Verdict c3 = sweep.correctness;
  if (c3.pass) c3.detail = std::to_string(sweep.searches) + " searches match the replica scan";
  report(3, c3);
  Verdict c4 = sweep.batching;
  if (c4.pass) c4.detail = "at most one fetch per contacted holder per cluster";
  report(4, c4);
  report(5, placement_balance());
  report(6, split_merge());
  report(7, single_crash());
  report(8, double_crash());
  report(9, ragent_failover());
  report(10, update_consistency());
  report(11, hot_migration());
  report(12, determinism());
  return failures == 0 ? 0 : 1;
}
