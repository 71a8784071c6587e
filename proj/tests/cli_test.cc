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

// Drives the hrc_sim binary end to end: exit codes, diagnostics, export.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hrc/scenario_io.h"
#include "hrc/trace_io.h"

namespace hrc {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr
};

Outcome sim(const std::string& args) {
  const std::string cmd = std::string(HRC_SIM_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return o;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) o.output.append(buf, n);
  const int status = ::pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string scenario(const std::string& name) {
  return std::string(HRC_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hrc_cli_" + std::string(::testing::UnitTest::GetInstance()
                                         ->current_test_info()
                                         ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& leaf) const { return (dir_ / leaf).string(); }

  std::string write(const std::string& leaf, const std::string& text) const {
    std::ofstream(path(leaf)) << text;
    return path(leaf);
  }

  fs::path dir_;
};

CsvTable load_csv(const std::string& file, const std::string& name) {
  std::ifstream in(file);
  return read_csv(in, name);
}

TEST_F(CliTest, FarHumanExitsZero) {
  const Outcome o = sim("run " + scenario("far_human") + " --trace " +
                        path("t.jsonl") + " --summary " + path("s.json"));
  EXPECT_EQ(o.code, 0) << o.output;
  EXPECT_TRUE(fs::exists(path("t.jsonl")));
  std::ifstream in(path("s.json"));
  const nlohmann::json s = nlohmann::json::parse(in);
  EXPECT_TRUE(s.at("goal_reached").get<bool>());
  EXPECT_EQ(s.at("violation_count").get<int>(), 0);
}

TEST_F(CliTest, ForcedViolationExitsThree) {
  const Outcome o = sim("run " + scenario("forced_violation") + " --quiet");
  EXPECT_EQ(o.code, 3) << o.output;
  EXPECT_NE(o.output.find("initial_separation"), std::string::npos) << o.output;
  EXPECT_NE(o.output.find("below d_min"), std::string::npos) << o.output;
}

TEST_F(CliTest, GoalUnreachedExitsFour) {
  const Outcome o = sim("run " + scenario("far_human") + " --duration 1");
  EXPECT_EQ(o.code, 4) << o.output;
  EXPECT_NE(o.output.find("NOT reached"), std::string::npos);
}

TEST_F(CliTest, SyntaxErrorExitsTwoWithLine) {
  const std::string f = write("bad.json",
                              "{\n  \"schema_version\": 1,\n  \"name\": \"x\",,\n}\n");
  const Outcome o = sim("run " + f);
  EXPECT_EQ(o.code, 2) << o.output;
  EXPECT_NE(o.output.find("line 3"), std::string::npos) << o.output;
}

TEST_F(CliTest, UnknownKeyExitsTwoWithField) {
  std::ifstream in(scenario("far_human"));
  nlohmann::json doc = nlohmann::json::parse(in);
  doc["planner"]["horizon_lenght"] = 10;
  const Outcome o = sim("run " + write("typo.json", doc.dump(2)));
  EXPECT_EQ(o.code, 2) << o.output;
  EXPECT_NE(o.output.find("planner.horizon_lenght"), std::string::npos) << o.output;
}

TEST_F(CliTest, BadFlagExitsTwo) {
  EXPECT_EQ(sim("run " + scenario("far_human") + " --rate-scaler").code, 2);
  EXPECT_EQ(sim("run " + scenario("far_human") + " --rate-scaler 7").code, 2);
  EXPECT_EQ(sim("run " + scenario("far_human") + " --lockstep --realtime").code, 2);
}

TEST_F(CliTest, OverridesReachTheRun) {
  const Outcome o = sim("run " + scenario("beta_trigger") + " --no-beta --summary " +
                        path("s.json"));
  EXPECT_EQ(o.code, 0) << o.output;
  std::ifstream in(path("s.json"));
  const nlohmann::json s = nlohmann::json::parse(in);
  EXPECT_EQ(s.at("replans").at("beta").get<int>(), 0);
}

TEST_F(CliTest, CorruptTraceExitsTwo) {
  const std::string f = write("bad.jsonl", "{\"type\":\"header\"}\nnot json\n");
  const Outcome o = sim("export " + f + " --out " + path("csv"));
  EXPECT_EQ(o.code, 2) << o.output;
  EXPECT_NE(o.output.find("corrupt trace"), std::string::npos) << o.output;
  EXPECT_EQ(sim("export " + path("missing.jsonl")).code, 2);
}

TEST_F(CliTest, ExportFarHumanAlphaIsOne) {
  ASSERT_EQ(sim("run " + scenario("far_human") + " --trace " + path("t.jsonl")).code, 0);
  const Outcome o = sim("export " + path("t.jsonl") + " --format csv --out " + path("csv"));
  ASSERT_EQ(o.code, 0) << o.output;
  const CsvTable ab = load_csv(path("csv/alpha_beta.csv"), "alpha_beta");
  ASSERT_EQ(ab.columns[1], "alpha");
  ASSERT_FALSE(ab.rows.empty());
  for (const auto& row : ab.rows) EXPECT_EQ(row[1], 1.0);
}

TEST_F(CliTest, ExportBetaStepsUpAndDown) {
  ASSERT_EQ(sim("run " + scenario("beta_trigger") + " --trace " + path("t.jsonl")).code, 0);
  ASSERT_EQ(sim("export " + path("t.jsonl") + " --out " + path("csv")).code, 0);
  const CsvTable ab = load_csv(path("csv/alpha_beta.csv"), "alpha_beta");
  ASSERT_EQ(ab.columns[2], "beta");
  std::vector<double> steps = {ab.rows.front()[2]};
  for (const auto& row : ab.rows) {
    if (row[2] != steps.back()) steps.push_back(row[2]);
  }
  ASSERT_GE(steps.size(), 3u);
  EXPECT_EQ(steps[0], 0.0);
  EXPECT_EQ(steps[1], 1.0);
  EXPECT_EQ(steps[2], 0.0);
}

// run, export, re-ingest: the tables equal the in-process run's signals.
TEST_F(CliTest, ExportRoundTripMatchesInProcessRun) {
  ASSERT_EQ(sim("run " + scenario("approach") + " --trace " + path("t.jsonl")).code, 0);
  ASSERT_EQ(sim("export " + path("t.jsonl") + " --out " + path("csv")).code, 0);
  const RunResult r = run_scenario(load_scenario(scenario("approach")));
  const std::vector<CsvTable> expected = export_tables(r.trace);
  ASSERT_EQ(expected.size(), 4u);
  for (const CsvTable& e : expected) {
    const CsvTable got = load_csv(path("csv/" + e.name + ".csv"), e.name);
    EXPECT_EQ(got.columns, e.columns) << e.name;
    EXPECT_EQ(got.rows, e.rows) << e.name;
  }
  const CsvTable exec = load_csv(path("csv/joints_executed.csv"), "joints_executed");
  const CsvTable nom = load_csv(path("csv/joints_nominal.csv"), "joints_nominal");
  ASSERT_EQ(exec.rows.size(), nom.rows.size());
  for (std::size_t i = 0; i < exec.rows.size(); ++i) {
    EXPECT_EQ(exec.rows[i][0], nom.rows[i][0]);
  }
}

}  // namespace
}  // namespace hrc
