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

#include "spdht/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

#include "spdht/error.hpp"
#include "spdht/nodes.hpp"

namespace spdht {

namespace {

using Kind = ScenarioEvent::Kind;

constexpr std::pair<Kind, std::string_view> kEventNames[] = {
    {Kind::kInsert, "insert"},     {Kind::kSearch, "search"}, {Kind::kSearchFirst, "search_first"},
    {Kind::kUpdate, "update"},     {Kind::kRead, "read"},     {Kind::kQueryLus, "query_lus"},
    {Kind::kCrash, "crash"},       {Kind::kRejoin, "rejoin"}, {Kind::kJoin, "join"},
};

constexpr std::pair<Role, std::string_view> kRoleNames[] = {
    {Role::kLus, "lus"}, {Role::kRAgent, "ragent"}, {Role::kAgent, "agent"}, {Role::kClient, "client"}};

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_commas(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    if (end > start) out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

std::string format_time(SimTime t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%" PRId64 ".%03" PRId64, t / kMillisecond,
                t % kMillisecond);
  return buf;
}

bool is_client_kind(Kind k) {
  return k == Kind::kInsert || k == Kind::kSearch || k == Kind::kSearchFirst ||
         k == Kind::kUpdate || k == Kind::kRead || k == Kind::kQueryLus;
}

class Parser {
 public:
  Scenario parse(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    std::string section;
    while (pos <= text.size()) {
      const std::size_t nl = std::min(text.find('\n', pos), text.size());
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          syntax(line_no, "section", "unterminated section header");
          continue;
        }
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (section != "config" && section != "nodes" && section != "events") {
          syntax(line_no, "section", "unknown section '" + section + "'");
        }
        continue;
      }
      if (section == "config") {
        config_line(line_no, line);
      } else if (section == "nodes") {
        node_line(line_no, line);
      } else if (section == "events") {
        event_line(line_no, line);
      } else {
        syntax(line_no, "section", "content outside a section");
      }
    }
    for (auto& issue : validate_scenario(s_)) issues_.push_back(std::move(issue));
    if (!issues_.empty()) throw ScenarioError(std::move(issues_));
    return std::move(s_);
  }

 private:
  void syntax(int line, std::string field, std::string reason) {
    issues_.push_back({ScenarioIssue::Kind::kSyntax, line, std::move(field), std::move(reason)});
  }

  template <class T>
  bool number(int line, const std::string& key, std::string_view value, T& out) {
    auto v = parse_number<T>(value);
    if (!v) {
      syntax(line, key, "not a number: '" + std::string(value) + "'");
      return false;
    }
    out = *v;
    return true;
  }

  bool millis(int line, const std::string& key, std::string_view value, SimTime& out) {
    std::int64_t ms = 0;
    if (!number(line, key, value, ms)) return false;
    out = from_millis(ms);
    return true;
  }

  void config_line(int line, std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      syntax(line, "config", "expected 'key = value'");
      return;
    }
    const std::string key(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    SimConfig& c = s_.config;
    if (key == "seed") {
      number(line, key, value, c.network.seed);
    } else if (key == "min_cluster") {
      number(line, key, value, c.thresholds.min_cluster);
    } else if (key == "max_cluster") {
      number(line, key, value, c.thresholds.max_cluster);
    } else if (key == "heartbeat_period") {
      millis(line, key, value, c.heartbeat.period);
    } else if (key == "failure_timeout") {
      millis(line, key, value, c.heartbeat.failure_timeout);
    } else if (key == "latency_base") {
      millis(line, key, value, c.network.base);
    } else if (key == "latency_per_tier") {
      millis(line, key, value, c.network.per_missing_tier);
    } else if (key == "latency_jitter") {
      millis(line, key, value, c.network.jitter);
    } else if (key == "delegation_bound") {
      number(line, key, value, c.delegation.bound);
    } else if (key == "delegation_factor") {
      number(line, key, value, c.delegation.factor);
    } else if (key == "migration_threshold") {
      number(line, key, value, c.migration_threshold);
    } else if (key == "client_timeout") {
      millis(line, key, value, c.client_timeout);
    } else if (key == "lus_count") {
      number(line, key, value, s_.lus_count);
    } else if (key == "drain") {
      millis(line, key, value, s_.drain);
    } else if (key == "expect_loss") {
      for (auto& label : split_commas(value)) s_.expected_losses.push_back(std::move(label));
    } else {
      issues_.push_back({ScenarioIssue::Kind::kValidation, line, key, "unknown config key"});
    }
  }

  void node_line(int line, std::string_view text) {
    const auto tok = split_ws(text);
    if (tok.size() < 6) {
      syntax(line, "node", "expected 'name role network as country continent [options]'");
      return;
    }
    ScenarioNode n;
    n.name = tok[0];
    bool role_ok = false;
    for (const auto& [role, name] : kRoleNames) {
      if (tok[1] == name) {
        n.role = role;
        role_ok = true;
      }
    }
    if (!role_ok) {
      syntax(line, "role", "unknown role '" + tok[1] + "'");
      return;
    }
    n.locality = {tok[2], tok[3], tok[4], tok[5]};
    for (std::size_t i = 6; i < tok.size(); ++i) {
      if (tok[i] == "dormant") {
        n.dormant = true;
      } else if (tok[i].rfind("pinned=", 0) == 0) {
        n.pinned = tok[i].substr(7);
      } else {
        syntax(line, "node", "unknown node option '" + tok[i] + "'");
      }
    }
    s_.nodes.push_back(std::move(n));
  }

  void event_line(int line, std::string_view text) {
    const auto tok = split_ws(text);
    if (tok.size() < 2) {
      syntax(line, "event", "expected 'time kind args...'");
      return;
    }
    ScenarioEvent e;
    e.line = line;
    if (!millis(line, "time", tok[0], e.time)) return;
    bool kind_ok = false;
    for (const auto& [kind, name] : kEventNames) {
      if (tok[1] == name) {
        e.kind = kind;
        kind_ok = true;
      }
    }
    if (!kind_ok) {
      syntax(line, "event", "unknown event kind '" + tok[1] + "'");
      return;
    }
    auto need = [&](std::size_t lo, std::size_t hi, const char* usage) {
      if (tok.size() < lo || tok.size() > hi) {
        syntax(line, tok[1], std::string("usage: ") + usage);
        return false;
      }
      return true;
    };
    switch (e.kind) {
      case Kind::kInsert:
        if (!need(5, 8, "insert CLIENT AGENT LABEL type=T [keys=a,b] [payload=P]")) return;
        e.client = tok[2];
        e.node = tok[3];
        e.object = tok[4];
        for (std::size_t i = 5; i < tok.size(); ++i) {
          const auto eq = tok[i].find('=');
          const std::string k = tok[i].substr(0, eq);
          const std::string v = eq == std::string::npos ? std::string() : tok[i].substr(eq + 1);
          if (eq == std::string::npos) {
            syntax(line, "insert", "expected key=value, got '" + tok[i] + "'");
          } else if (k == "type") {
            e.spec.type_tag = v;
          } else if (k == "keys") {
            for (auto& key : split_commas(v)) e.spec.index_keys.insert(std::move(key));
          } else if (k == "payload") {
            e.spec.payload = v;
          } else {
            syntax(line, "insert", "unknown field '" + k + "'");
          }
        }
        break;
      case Kind::kSearch:
      case Kind::kSearchFirst: {
        if (!need(6, 6, "search CLIENT AGENT exact|pattern KEY")) return;
        e.client = tok[2];
        e.node = tok[3];
        const auto kind = parse_key_kind(tok[4]);
        if (!kind) {
          syntax(line, "criterion", "expected 'exact' or 'pattern'");
          return;
        }
        e.criterion = {*kind, tok[5]};
        break;
      }
      case Kind::kUpdate:
        if (!need(6, 6, "update CLIENT AGENT LABEL PAYLOAD")) return;
        e.client = tok[2];
        e.node = tok[3];
        e.object = tok[4];
        e.payload = tok[5];
        break;
      case Kind::kRead:
        if (!need(4, 5, "read CLIENT LABEL [HOLDER]")) return;
        e.client = tok[2];
        e.object = tok[3];
        if (tok.size() == 5) e.holder = tok[4];
        break;
      case Kind::kQueryLus:
        if (!need(4, 4, "query_lus CLIENT LUS")) return;
        e.client = tok[2];
        e.node = tok[3];
        break;
      case Kind::kCrash:
      case Kind::kRejoin:
      case Kind::kJoin:
        if (!need(3, 3, "crash|rejoin|join NODE")) return;
        e.node = tok[2];
        break;
    }
    s_.events.push_back(std::move(e));
  }

  Scenario s_;
  std::vector<ScenarioIssue> issues_;
};

std::string join_set(const std::set<std::string>& items) {
  std::string out;
  for (const auto& i : items) {
    if (!out.empty()) out += ',';
    out += i;
  }
  return out;
}

}  // namespace

std::string_view to_string(ScenarioEvent::Kind kind) {
  for (const auto& [k, name] : kEventNames) {
    if (k == kind) return name;
  }
  return "?";
}

ScenarioError::ScenarioError(std::vector<ScenarioIssue> issues)
    : std::runtime_error([&] {
        std::string msg;
        for (const auto& i : issues) {
          if (!msg.empty()) msg += '\n';
          msg += (i.kind == ScenarioIssue::Kind::kSyntax ? "SyntaxError" : "ValidationError");
          msg += "(line " + std::to_string(i.line) + ", " + i.field + "): " + i.reason;
        }
        return msg;
      }()),
      issues_(std::move(issues)) {}

std::vector<ScenarioIssue> validate_scenario(const Scenario& s) {
  std::vector<ScenarioIssue> out;
  auto bad = [&](int line, std::string field, std::string reason) {
    out.push_back({ScenarioIssue::Kind::kValidation, line, std::move(field), std::move(reason)});
  };
  const SimConfig& c = s.config;
  if (!c.thresholds.valid()) bad(0, "min_cluster", "min_cluster must be positive and below max_cluster");
  if (!c.heartbeat.valid()) {
    bad(0, "failure_timeout", "heartbeat_period must be positive and failure_timeout >= 2 x period");
  }
  if (c.network.base <= 0) bad(0, "latency_base", "must be positive");
  if (c.network.per_missing_tier < 0) bad(0, "latency_per_tier", "must not be negative");
  if (c.network.jitter < 0) bad(0, "latency_jitter", "must not be negative");
  if (!(c.delegation.factor > 0)) bad(0, "delegation_factor", "must be positive");
  if (c.migration_threshold == 0) bad(0, "migration_threshold", "must be positive");
  if (c.client_timeout <= 0) bad(0, "client_timeout", "must be positive");
  if (s.lus_count == 0) bad(0, "lus_count", "must be positive");
  if (s.drain < 0) bad(0, "drain", "must not be negative");

  std::map<std::string, const ScenarioNode*, std::less<>> nodes;
  bool any_ragent = false;
  for (const auto& n : s.nodes) {
    if (!nodes.emplace(n.name, &n).second) bad(0, "node", "duplicate node '" + n.name + "'");
    if (!n.locality.well_formed()) bad(0, "locality", "empty locality tier for '" + n.name + "'");
    if (n.role == Role::kRAgent) any_ragent = true;
    if (n.dormant && n.role != Role::kAgent) bad(0, "dormant", "'" + n.name + "' is not an agent");
    if (n.pinned) {
      if (n.role != Role::kAgent) bad(0, "pinned", "'" + n.name + "' is not an agent");
      auto it = nodes.find(*n.pinned);
      if (it == nodes.end() || it->second->role != Role::kRAgent) {
        bad(0, "pinned", "'" + *n.pinned + "' is not an RAgent declared before '" + n.name + "'");
      }
    }
  }
  if (!any_ragent) bad(0, "nodes", "at least one ragent is required");

  auto role_of = [&](const std::string& name) -> std::optional<Role> {
    auto it = nodes.find(name);
    if (it == nodes.end()) return std::nullopt;
    return it->second->role;
  };
  auto peer = [&](const std::string& name) {
    const auto r = role_of(name);
    return r && (*r == Role::kAgent || *r == Role::kRAgent);
  };
  std::set<std::string> labels;
  SimTime last = 0;
  for (const auto& e : s.events) {
    if (e.time < last) bad(e.line, "time", "event times must be non-decreasing");
    last = std::max(last, e.time);
    if (is_client_kind(e.kind) && role_of(e.client) != Role::kClient) {
      bad(e.line, "client", "'" + e.client + "' is not a declared client");
    }
    switch (e.kind) {
      case Kind::kInsert:
        if (!peer(e.node)) bad(e.line, "agent", "'" + e.node + "' is not a declared peer");
        if (e.spec.type_tag.empty()) bad(e.line, "type", "insert needs type=...");
        if (!labels.insert(e.object).second) {
          bad(e.line, "object", "label '" + e.object + "' already inserted");
        }
        break;
      case Kind::kSearch:
      case Kind::kSearchFirst:
        if (!peer(e.node)) bad(e.line, "agent", "'" + e.node + "' is not a declared peer");
        break;
      case Kind::kUpdate:
        if (!peer(e.node)) bad(e.line, "agent", "'" + e.node + "' is not a declared peer");
        if (!labels.contains(e.object)) {
          bad(e.line, "object", "label '" + e.object + "' is not inserted earlier");
        }
        break;
      case Kind::kRead:
        if (!labels.contains(e.object)) {
          bad(e.line, "object", "label '" + e.object + "' is not inserted earlier");
        }
        if (e.holder && !peer(*e.holder)) {
          bad(e.line, "holder", "'" + *e.holder + "' is not a declared peer");
        }
        break;
      case Kind::kQueryLus: {
        const bool declared_lus = role_of(e.node) == Role::kLus;
        bool implicit_lus = false;
        const bool any_lus = std::any_of(s.nodes.begin(), s.nodes.end(),
                                         [](const ScenarioNode& n) { return n.role == Role::kLus; });
        if (!any_lus) {
          for (std::size_t i = 1; i <= s.lus_count; ++i) {
            if (e.node == "lus" + std::to_string(i)) implicit_lus = true;
          }
        }
        if (!declared_lus && !implicit_lus) bad(e.line, "lus", "'" + e.node + "' is not a LUS");
        break;
      }
      case Kind::kCrash:
      case Kind::kRejoin:
        if (!peer(e.node)) bad(e.line, "node", "'" + e.node + "' is not a declared peer");
        break;
      case Kind::kJoin: {
        auto it = nodes.find(e.node);
        if (it == nodes.end() || !it->second->dormant) {
          bad(e.line, "node", "'" + e.node + "' is not a dormant agent");
        }
        break;
      }
    }
  }
  for (const auto& label : s.expected_losses) {
    if (!labels.contains(label)) bad(0, "expect_loss", "label '" + label + "' is never inserted");
  }
  return out;
}

Scenario parse_scenario(std::string_view text) { return Parser().parse(text); }

std::string print_scenario(const Scenario& s) {
  std::ostringstream out;
  const SimConfig& c = s.config;
  auto ms = [](SimTime t) { return std::to_string(t / kMillisecond); };
  out << "[config]\n";
  out << "seed = " << c.network.seed << '\n';
  out << "min_cluster = " << c.thresholds.min_cluster << '\n';
  out << "max_cluster = " << c.thresholds.max_cluster << '\n';
  out << "heartbeat_period = " << ms(c.heartbeat.period) << '\n';
  out << "failure_timeout = " << ms(c.heartbeat.failure_timeout) << '\n';
  out << "latency_base = " << ms(c.network.base) << '\n';
  out << "latency_per_tier = " << ms(c.network.per_missing_tier) << '\n';
  out << "latency_jitter = " << ms(c.network.jitter) << '\n';
  out << "delegation_bound = " << c.delegation.bound << '\n';
  out << "delegation_factor = " << format_double(c.delegation.factor) << '\n';
  out << "migration_threshold = " << c.migration_threshold << '\n';
  out << "client_timeout = " << ms(c.client_timeout) << '\n';
  out << "lus_count = " << s.lus_count << '\n';
  out << "drain = " << ms(s.drain) << '\n';
  if (!s.expected_losses.empty()) {
    out << "expect_loss = ";
    for (std::size_t i = 0; i < s.expected_losses.size(); ++i) {
      out << (i ? "," : "") << s.expected_losses[i];
    }
    out << '\n';
  }
  out << "\n[nodes]\n";
  for (const auto& n : s.nodes) {
    std::string_view role;
    for (const auto& [r, name] : kRoleNames) {
      if (r == n.role) role = name;
    }
    out << n.name << ' ' << role << ' ' << n.locality.network_domain << ' '
        << n.locality.as_domain << ' ' << n.locality.country << ' ' << n.locality.continent;
    if (n.pinned) out << " pinned=" << *n.pinned;
    if (n.dormant) out << " dormant";
    out << '\n';
  }
  out << "\n[events]\n";
  for (const auto& e : s.events) {
    out << ms(e.time) << ' ' << to_string(e.kind);
    switch (e.kind) {
      case Kind::kInsert:
        out << ' ' << e.client << ' ' << e.node << ' ' << e.object << " type=" << e.spec.type_tag;
        if (!e.spec.index_keys.empty()) out << " keys=" << join_set(e.spec.index_keys);
        if (!e.spec.payload.empty()) out << " payload=" << e.spec.payload;
        break;
      case Kind::kSearch:
      case Kind::kSearchFirst:
        out << ' ' << e.client << ' ' << e.node << ' ' << to_string(e.criterion.kind) << ' '
            << e.criterion.key;
        break;
      case Kind::kUpdate:
        out << ' ' << e.client << ' ' << e.node << ' ' << e.object << ' ' << e.payload;
        break;
      case Kind::kRead:
        out << ' ' << e.client << ' ' << e.object;
        if (e.holder) out << ' ' << *e.holder;
        break;
      case Kind::kQueryLus:
        out << ' ' << e.client << ' ' << e.node;
        break;
      case Kind::kCrash:
      case Kind::kRejoin:
      case Kind::kJoin:
        out << ' ' << e.node;
        break;
    }
    out << '\n';
  }
  return out.str();
}

// ---- running -------------------------------------------------------------------

ScenarioRun::ScenarioRun(const Scenario& scenario) : scenario_(scenario) {
  if (auto issues = validate_scenario(scenario_); !issues.empty()) {
    throw ScenarioError(std::move(issues));
  }
  sim_ = std::make_unique<Simulator>(scenario_.config);
  Simulator& sim = *sim_;
  const bool any_lus = std::any_of(scenario_.nodes.begin(), scenario_.nodes.end(),
                                   [](const ScenarioNode& n) { return n.role == Role::kLus; });
  if (!any_lus) {
    // Implicit LUS instances sit next to the first RAgent.
    LocalityDescriptor where;
    for (const auto& n : scenario_.nodes) {
      if (n.role == Role::kRAgent) {
        where = n.locality;
        break;
      }
    }
    for (std::size_t i = 1; i <= scenario_.lus_count; ++i) {
      const std::string name = "lus" + std::to_string(i);
      names_[name] = sim.add_lus(name, where);
    }
  }
  for (const auto& n : scenario_.nodes) {
    NodeId id;
    switch (n.role) {
      case Role::kLus:
        id = sim.add_lus(n.name, n.locality);
        break;
      case Role::kRAgent:
        id = sim.add_ragent(n.name, n.locality);
        break;
      case Role::kAgent: {
        std::optional<NodeId> pinned;
        if (n.pinned) pinned = names_.at(*n.pinned);
        id = sim.add_agent(n.name, n.locality, pinned, n.dormant);
        break;
      }
      case Role::kClient:
        id = sim.add_client(n.name, n.locality);
        break;
    }
    names_[n.name] = id;
  }
  sim.start();
  for (std::size_t i = 0; i < scenario_.events.size(); ++i) {
    const ScenarioEvent& e = scenario_.events[i];
    switch (e.kind) {
      case Kind::kInsert: {
        DistObject obj = make_object(e.spec.type_tag, e.spec.index_keys, e.spec.payload);
        objects_[e.object] = obj;
        requests_[i] = sim.schedule_client(e.time, node(e.client),
                                           {ClientCommand::Insert{node(e.node), std::move(obj)}});
        break;
      }
      case Kind::kSearch:
      case Kind::kSearchFirst:
        requests_[i] = sim.schedule_client(
            e.time, node(e.client),
            {ClientCommand::Search{node(e.node), e.criterion,
                                   e.kind == Kind::kSearch ? SearchMode::kAll : SearchMode::kFirst}});
        break;
      case Kind::kUpdate:
        requests_[i] = sim.schedule_client(
            e.time, node(e.client),
            {ClientCommand::Update{node(e.node), object(e.object).id, e.payload}});
        break;
      case Kind::kRead: {
        std::optional<NodeId> holder;
        if (e.holder) holder = node(*e.holder);
        requests_[i] = sim.schedule_client(e.time, node(e.client),
                                           {ClientCommand::Read{holder, object(e.object).id}});
        break;
      }
      case Kind::kQueryLus:
        requests_[i] =
            sim.schedule_client(e.time, node(e.client), {ClientCommand::QueryLus{node(e.node)}});
        break;
      case Kind::kCrash:
        sim.inject_crash(node(e.node), e.time);
        break;
      case Kind::kRejoin:
        sim.inject_rejoin(node(e.node), e.time);
        break;
      case Kind::kJoin:
        sim.inject_join(node(e.node), e.time);
        break;
    }
  }
}

ScenarioRun::~ScenarioRun() = default;

NodeId ScenarioRun::node(std::string_view name) const {
  auto it = names_.find(name);
  if (it == names_.end()) fail(ErrorCode::kUnknownNode, std::string(name));
  return it->second;
}

const DistObject& ScenarioRun::object(std::string_view label) const {
  auto it = objects_.find(label);
  if (it == objects_.end()) fail(ErrorCode::kUnknownObject, std::string(label));
  return it->second;
}

std::optional<std::uint64_t> ScenarioRun::request_of(std::size_t index) const {
  auto it = requests_.find(index);
  if (it == requests_.end()) return std::nullopt;
  return it->second;
}

std::string ScenarioRun::label_of(const ObjectId& id) const {
  for (const auto& [label, obj] : objects_) {
    if (obj.id == id) return label;
  }
  return id.short_hex();
}

RunResult ScenarioRun::run() {
  Simulator& sim = *sim_;
  const SimTime last = scenario_.events.empty() ? 0 : scenario_.events.back().time;
  sim.run_until(last + scenario_.drain);
  // Settle: bounded extra time for in-flight recovery.
  const SimTime step = scenario_.config.heartbeat.period;
  const SimTime cap = sim.now() + 200 * scenario_.config.heartbeat.failure_timeout;
  while (!sim.quiescent() && sim.now() < cap) sim.run_until(sim.now() + step);

  RunResult result;
  result.quiescent = sim.quiescent();
  result.finished_at = sim.now();
  std::set<ObjectId> expected;
  for (const auto& label : scenario_.expected_losses) expected.insert(object(label).id);
  result.violations = check_quiescent(sim, expected);
  if (!result.quiescent) result.violations.push_back({"not_quiescent", format_time(sim.now())});
  result.exit_code = result.violations.empty() ? 0 : 1;
  return result;
}

void ScenarioRun::emit_metrics(std::ostream& out, const RunResult& result) const {
  const Simulator& sim = *sim_;
  const Metrics m = sim.snapshot_metrics();
  auto name = [&](NodeId n) { return n.valid() ? sim.name_of(n) : std::string("-"); };
  out << "run seed=" << m.seed << " time=" << format_time(m.time)
      << " nodes=" << sim.node_ids().size() << " events=" << scenario_.events.size() << '\n';
  std::vector<const OpRecord*> ops;
  for (const auto& op : m.ops) ops.push_back(&op);
  std::stable_sort(ops.begin(), ops.end(),
                   [](const OpRecord* a, const OpRecord* b) { return a->request < b->request; });
  for (const OpRecord* op : ops) {
    out << "op time=" << format_time(op->completed) << " kind=" << to_string(op->kind)
        << " request=" << op->request << " steps=" << op->steps << " bound=" << op->bound
        << " decomposed=" << op->decomposed << " messages=" << op->messages
        << " hops=" << op->hops << " outcome=" << to_string(op->outcome)
        << " issued=" << format_time(op->issued)
        << " inter_ragent=" << op->inter_ragent_messages << " results=" << op->results.size()
        << " progress=" << op->progress_notifications << " version=" << op->version
        << " holder=" << (op->holder ? name(*op->holder) : "-") << '\n';
  }
  for (const auto& e : m.member_events) {
    out << "member time=" << format_time(e.time) << " event=" << e.kind
        << " cluster=" << name(e.cluster) << " node=" << name(e.node)
        << " detail=" << (e.detail.empty() ? "-" : e.detail) << '\n';
  }
  for (const auto& c : m.clusters) {
    out << "cluster ragent=" << name(c.ragent) << " members=" << c.members
        << " objects=" << c.objects << '\n';
  }
  for (const auto& [kind, count] : m.messages.delivered_by_kind) {
    out << "messages kind=" << kind << " count=" << count << '\n';
  }
  for (const ObjectId& lost : sim.reported_losses()) {
    out << "loss object=" << label_of(lost) << '\n';
  }
  for (const auto& v : result.violations) {
    out << "violation name=" << v.name << " detail=" << v.detail << '\n';
  }
  out << "census ragents=" << m.ragents << " agents=" << m.agents << " objects=" << m.objects
      << " replicas=" << m.replicas << " lost=" << m.lost << " delivered=" << m.messages.delivered
      << " dropped=" << m.messages.dropped << " violations=" << result.violations.size()
      << " quiescent=" << (result.quiescent ? 1 : 0) << '\n';
}

void ScenarioRun::emit_trace(std::ostream& out) const {
  for (const auto& r : sim_->trace()) {
    char digest[17];
    std::snprintf(digest, sizeof(digest), "%016" PRIx64, r.digest);
    out << format_time(r.time) << ' ' << r.seq << ' ' << sim_->name_of(r.node) << ' ' << r.kind
        << ' ' << digest << '\n';
  }
}

}  // namespace spdht
