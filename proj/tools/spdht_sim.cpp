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

// Scenario runner. Exit codes: 0 ok, 1 invariant violation, 2 scenario error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spdht/scenario.hpp"

namespace {

constexpr int kScenarioError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run a super-peer DHT scenario in the discrete-event simulator"};
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string trace_path;
  std::string metrics_path;
  bool check_only = false;
  app.add_option("--scenario", scenario_path, "Scenario file")->required();
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--trace", trace_path, "Write the event trace to this file");
  app.add_option("--metrics", metrics_path, "Write metrics here instead of standard output");
  app.add_flag("--check", check_only, "Parse and validate only");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kScenarioError;
  }

  std::ifstream in(scenario_path);
  if (!in) {
    std::cerr << "cannot read " << scenario_path << '\n';
    return kScenarioError;
  }
  std::stringstream text;
  text << in.rdbuf();

  spdht::Scenario scenario;
  try {
    scenario = spdht::parse_scenario(text.str());
  } catch (const spdht::ScenarioError& e) {
    std::cerr << e.what() << '\n';
    return kScenarioError;
  }
  if (seed) scenario.config.network.seed = *seed;
  if (check_only) {
    std::cout << "ok " << scenario.nodes.size() << " nodes " << scenario.events.size()
              << " events\n";
    return 0;
  }

  spdht::ScenarioRun run(scenario);
  const spdht::RunResult result = run.run();

  std::ofstream metrics_file;
  if (!metrics_path.empty()) {
    metrics_file.open(metrics_path);
    if (!metrics_file) {
      std::cerr << "cannot write " << metrics_path << '\n';
      return kScenarioError;
    }
  }
  std::ostream& metrics = metrics_path.empty() ? std::cout : metrics_file;
  run.emit_metrics(metrics, result);

  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    if (!trace) {
      std::cerr << "cannot write " << trace_path << '\n';
      return kScenarioError;
    }
    run.emit_trace(trace);
  }
  for (const auto& v : result.violations) {
    std::cerr << "invariant violated: " << v.name << " at " << result.finished_at << "us: "
              << v.detail << '\n';
  }
  return result.exit_code;
}
