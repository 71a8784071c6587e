// Copyright 2026 The hrc-safety Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hrc_sim: run scenarios, serve the operator UI stream, export plot tables.
//
// Exit codes: 0 success, 2 schema error or corrupt input, 3 safety
// violation, 4 goal not reached.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hrc/scenario_io.h"
#include "hrc/stream.h"
#include "hrc/trace_io.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitViolation = 3;
constexpr int kExitGoal = 4;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> rate_scaler;
  std::optional<double> rate_planner;
  std::optional<double> alpha_min;
  bool ee_only = false;
  bool no_beta = false;
  bool lockstep = false;
  bool realtime = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Planner random seed");
    cmd->add_option("--duration", duration, "Run length limit [s]");
    cmd->add_option("--rate-scaler", rate_scaler, "Scaler rate [Hz]");
    cmd->add_option("--rate-planner", rate_planner, "Planner cycle rate [Hz]");
    cmd->add_option("--alpha-min", alpha_min, "Replan request threshold");
    cmd->add_flag("--ee-only", ee_only, "Constrain only the last link");
    cmd->add_flag("--no-beta", no_beta, "Ignore replan requests from the scaler");
    auto* ls = cmd->add_flag("--lockstep", lockstep, "Deterministic simulated time");
    auto* rt = cmd->add_flag("--realtime", realtime, "Free-running threads on the wall clock");
    ls->excludes(rt);
  }

  void apply(hrc::ScenarioConfig& c) const {
    if (seed) c.planner.rng_seed = *seed;
    if (duration) c.duration = *duration;
    if (rate_scaler) c.scaler.tick_period = 1.0 / *rate_scaler;
    if (rate_planner) c.planner.cycle_rate = *rate_planner;
    if (alpha_min) c.scaler.alpha_min = *alpha_min;
    if (ee_only) c.scaler.ee_only = true;
    if (no_beta) c.planner.beta_enabled = false;
    if (lockstep) c.mode = hrc::RunMode::kLockstep;
    if (realtime) c.mode = hrc::RunMode::kRealtime;
    c.validate();
  }
};

int cmd_run(const std::string& scenario_path, const Overrides& ov,
            const std::string& trace_path, const std::string& summary_path,
            bool quiet) {
  hrc::ScenarioConfig config = hrc::load_scenario(scenario_path);
  ov.apply(config);
  const hrc::RunResult result = hrc::run_scenario(config);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    const nlohmann::json doc = hrc::scenario_to_json(config);
    hrc::write_trace(out, result.trace, &doc);
    if (!out) throw std::runtime_error("cannot write " + trace_path);
  }
  const nlohmann::json summary = hrc::summary_to_json(result.summary);
  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    out << summary.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + summary_path);
  }
  const hrc::Summary& s = result.summary;
  if (!quiet) {
    std::cout << config.name << ": goal " << (s.goal_reached ? "reached" : "NOT reached");
    if (s.completion_time) std::cout << " at t=" << *s.completion_time << " s";
    std::cout << ", " << s.ticks << " ticks, min separation "
              << s.min_separation << " m, replans infeasible="
              << s.replans.at("infeasible") << " beta=" << s.replans.at("beta")
              << " failed=" << s.replans.at("failed")
              << ", violations=" << s.violations.size() << '\n';
  }
  for (std::size_t i = 0; i < s.violations.size() && i < 10; ++i) {
    std::cerr << "violation at t=" << s.violations[i].t << " s ["
              << s.violations[i].kind << "]: " << s.violations[i].message << '\n';
  }
  if (!s.violations.empty()) return kExitViolation;
  if (!s.goal_reached) return kExitGoal;
  return kExitOk;
}

int cmd_serve(const std::string& scenario_path, const Overrides& ov,
              unsigned short port, const std::string& address) {
  hrc::ScenarioConfig config = hrc::load_scenario(scenario_path);
  ov.apply(config);
  hrc::StreamServer server(config, port, address);
  std::cout << "serving " << config.name << " on ws://" << address << ":"
            << server.port() << "/" << std::endl;
  server.run(/*handle_signals=*/true);
  return kExitOk;
}

int cmd_export(const std::string& trace_path, const std::string& format,
               const std::string& out_dir) {
  if (format != "csv") throw CLI::ValidationError("--format", "only csv is supported");
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) throw hrc::CorruptTraceError(trace_path + ": cannot open file");
  const hrc::TraceFile file = hrc::read_trace(in);
  std::filesystem::create_directories(out_dir);
  for (const hrc::CsvTable& table : hrc::export_tables(file.trace)) {
    const auto path = std::filesystem::path(out_dir) / (table.name + ".csv");
    std::ofstream out(path);
    hrc::write_csv(out, table);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::cout << path.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speed-and-separation-monitoring simulator"};
  app.require_subcommand(1);

  Overrides run_ov;
  std::string run_scenario;
  std::string trace_path;
  std::string summary_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a scenario and write trace/summary");
  run->add_option("scenario", run_scenario, "Scenario JSON file")->required();
  run->add_option("--trace", trace_path, "Trace output (JSON lines)");
  run->add_option("--summary", summary_path, "Summary report output (JSON)");
  run->add_flag("--quiet", quiet, "Suppress the summary line");
  run_ov.attach(run);

  Overrides serve_ov;
  std::string serve_scenario;
  unsigned short port = 8765;
  std::string address = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Serve the live stream for the operator UI");
  serve->add_option("scenario", serve_scenario, "Scenario JSON file")->required();
  serve->add_option("--port", port, "TCP port (0 picks a free one)");
  serve->add_option("--address", address, "Listen address");
  serve_ov.attach(serve);

  std::string export_trace;
  std::string format = "csv";
  std::string out_dir = ".";
  auto* exp = app.add_subcommand("export", "Export plot tables from a trace");
  exp->add_option("trace", export_trace, "Trace file")->required();
  exp->add_option("--format", format, "Output format (csv)");
  exp->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitSchema;
  }

  try {
    if (*run) return cmd_run(run_scenario, run_ov, trace_path, summary_path, quiet);
    if (*serve) return cmd_serve(serve_scenario, serve_ov, port, address);
    if (*exp) return cmd_export(export_trace, format, out_dir);
  } catch (const hrc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const hrc::CorruptTraceError& e) {
    std::cerr << "error: corrupt trace: " << e.what() << '\n';
    return kExitSchema;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
