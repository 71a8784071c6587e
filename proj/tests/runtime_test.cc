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

#include "hrc/runtime.h"

#include <chrono>
#include <cmath>
#include <thread>

#include <gtest/gtest.h>

#include "hrc/error.h"
#include "hrc/geometry.h"
#include "hrc/realtime.h"
#include "hrc/robot_presets.h"
#include "oracles.h"

namespace hrc {
namespace {

JointVector j2(double a, double b) { return (JointVector(2) << a, b).finished(); }

Capsule rod(const Vec3& at, double radius) {
  return {{at - Vec3(0, 0, 1), at + Vec3(0, 0, 1)}, radius};
}

Vec3 tip_at(double theta) {
  return Vec3(2.0 * std::cos(theta), 2.0 * std::sin(theta), 0.0);
}

ScenarioConfig base_scenario() {
  ScenarioConfig c;
  c.name = "test";
  c.robot = std::make_shared<const RobotModel>(planar_2r(1.0, 1.0, 0.05));
  c.q_start = j2(0.0, 0.0);
  c.goals = {j2(1.5, 0.0)};
  c.duration = 20.0;
  return c;
}

// A rod walks from far outside the reach toward the middle of the sweep and
// stays there.
ScenarioConfig approach_scenario() {
  ScenarioConfig c = base_scenario();
  c.human.kind = HumanSourceSpec::Kind::kScript;
  const Vec3 stop = tip_at(0.75) * 1.25;
  c.human.script.keyframes = {{0.0, {rod(tip_at(0.75) * 3.0, 0.1)}},
                              {1.0, {rod(stop, 0.1)}},
                              {30.0, {rod(stop, 0.1)}}};
  return c;
}

TEST(Scenario, TicksPerCycle) {
  ScenarioConfig c = base_scenario();
  EXPECT_EQ(c.ticks_per_cycle(), 5);
  c.planner.cycle_rate = 7.0;
  EXPECT_THROW(c.ticks_per_cycle(), ConfigError);
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Scenario, ValidateRejectsBadGoal) {
  ScenarioConfig c = base_scenario();
  c.goals = {j2(1.0, 0.0), (JointVector(3) << 0, 0, 0).finished()};
  EXPECT_THROW(c.validate(), ConfigError);
  c = base_scenario();
  c.goals.clear();
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Lockstep, EmptyWorkspaceRunsAtNominalSpeed) {
  const ScenarioConfig c = base_scenario();
  const RunResult r = run_lockstep(c);
  ASSERT_TRUE(r.summary.goal_reached);
  for (const TickRecord& t : r.trace.ticks) {
    ASSERT_EQ(t.alpha, 1.0) << "tick " << t.tick;
    ASSERT_FALSE(t.beta);
  }
  for (const auto& [name, count] : r.summary.replans) EXPECT_EQ(count, 0) << name;
  EXPECT_TRUE(r.summary.violations.empty());
  ASSERT_TRUE(r.summary.completion_time.has_value());
  // Completion is observed on the first planner cycle after arrival.
  const double cycle = 1.0 / c.planner.cycle_rate;
  EXPECT_GE(*r.summary.completion_time, r.summary.nominal_duration - 1e-9);
  EXPECT_LE(*r.summary.completion_time,
            r.summary.nominal_duration + cycle + c.scaler.tick_period + 1e-9);
  EXPECT_LE((r.trace.ticks.back().q - c.goals[0]).cwiseAbs().maxCoeff(),
            c.planner.goal_tolerance);
}

TEST(Lockstep, RepeatVisitsGoalsInOrder) {
  ScenarioConfig c = base_scenario();
  c.goals = {j2(1.0, 0.0), j2(0.0, 0.5)};
  c.repeat = 2;
  c.duration = 40.0;
  const RunResult r = run_lockstep(c);
  ASSERT_TRUE(r.summary.goal_reached);
  std::vector<std::string> reached;
  for (const EventRecord& e : r.trace.events) {
    if (e.name == "goal_reached") reached.push_back(e.detail);
  }
  EXPECT_EQ(reached, (std::vector<std::string>{"goal 0", "goal 1", "goal 2",
                                               "goal 3"}));
  EXPECT_EQ(r.trace.events.back().name, "run_complete");
}

TEST(Lockstep, DeterministicAcrossRuns) {
  const ScenarioConfig c = approach_scenario();
  const RunResult a = run_lockstep(c);
  const RunResult b = run_lockstep(c);
  ASSERT_EQ(a.trace.ticks.size(), b.trace.ticks.size());
  for (std::size_t i = 0; i < a.trace.ticks.size(); ++i) {
    ASSERT_EQ(a.trace.ticks[i].alpha, b.trace.ticks[i].alpha);
    ASSERT_EQ(a.trace.ticks[i].q, b.trace.ticks[i].q);
  }
  ASSERT_EQ(a.trace.events.size(), b.trace.events.size());
  ASSERT_EQ(a.trace.trajectories.size(), b.trace.trajectories.size());
}

TEST(Lockstep, ApproachingHumanSlowsRobotSafely) {
  const ScenarioConfig c = approach_scenario();
  const RunResult r = run_lockstep(c);
  double lowest = 1.0;
  for (const TickRecord& t : r.trace.ticks) lowest = std::min(lowest, t.alpha);
  EXPECT_LT(lowest, 1.0);
  EXPECT_TRUE(r.summary.violations.empty())
      << r.summary.violations.front().message;
  EXPECT_GE(r.summary.min_separation, c.safety.min_distance);
  EXPECT_TRUE(r.summary.goal_reached);
}

TEST(Lockstep, ReplayReproducesAlpha) {
  const ScenarioConfig c = approach_scenario();
  const RunResult r = run_lockstep(c);
  const std::vector<double> alphas = replay_alphas(r.trace, c);
  ASSERT_EQ(alphas.size(), r.trace.ticks.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    ASSERT_EQ(alphas[i], r.trace.ticks[i].alpha) << "tick " << i;
  }
}

TEST(Lockstep, NominalShadowIgnoresHuman) {
  const ScenarioConfig c = approach_scenario();
  const RunResult r = run_lockstep(c);
  // Identical until the first scaled tick, apart afterwards.
  std::size_t first_scaled = r.trace.ticks.size();
  for (std::size_t i = 0; i < r.trace.ticks.size(); ++i) {
    const TickRecord& t = r.trace.ticks[i];
    if (t.alpha < 1.0) {
      first_scaled = i;
      break;
    }
    ASSERT_EQ(t.q, t.q_nominal) << "tick " << i;
    ASSERT_EQ(t.qdot_cmd, t.qdot_nominal) << "tick " << i;
  }
  ASSERT_LT(first_scaled + 1, r.trace.ticks.size());
  const TickRecord& next = r.trace.ticks[first_scaled + 1];
  EXPECT_GT((next.q - next.q_nominal).norm(), 0.0);
}

// d(separation)/dt of a static human equals minus the approach speed.
TEST(Monitor, ApproachSpeedMatchesSeparationRate) {
  const RobotModel arm = planar_2r(1.0, 1.0, 0.05);
  HumanState h;
  h.links = {rod(Vec3(1.2, 1.4, 0.0), 0.1)};
  h.velocities = {{Vec3::Zero(), Vec3::Zero()}};
  const JointVector q = j2(0.3, 0.4);
  const JointVector qdot = j2(0.7, -0.2);
  const auto links = monitor_links(arm, q, qdot, h, SafetyParams{}, ScalerConfig{});
  const double eps = 1e-6;
  for (std::size_t i = 0; i < 2; ++i) {
    auto sep = [&](const JointVector& qq) {
      const KinematicState fk = forward_kinematics(arm, qq);
      return oracle::refined_segment_distance(fk.capsules[i].axis, h.links[0].axis, 60) -
             fk.capsules[i].radius - h.links[0].radius;
    };
    const double rate = (sep(q + eps * qdot) - sep(q - eps * qdot)) / (2 * eps);
    EXPECT_NEAR(links[i].v_toward, -rate, 1e-6) << "link " << i;
    EXPECT_NEAR(links[i].separation, sep(q), 1e-9);
  }
}

TEST(Monitor, InitialSeparationIsAViolation) {
  ScenarioConfig c = base_scenario();
  c.human.kind = HumanSourceSpec::Kind::kScript;
  c.human.script.keyframes = {{0.0, {rod(tip_at(0.0), 0.1)}}};
  c.duration = 1.0;
  const RunResult r = run_lockstep(c);
  ASSERT_FALSE(r.summary.violations.empty());
  EXPECT_EQ(r.summary.violations.front().kind, "initial_separation");
  EXPECT_FALSE(r.summary.goal_reached);
}

TEST(Monitor, SpeedViolationDetected) {
  TickRecord rec;
  rec.tick = 3;
  LinkRecord l;
  l.constrained = true;
  l.has_human = true;
  l.separation = 0.5;
  l.v_max = 0.2;
  l.v_toward = 0.3;
  rec.links = {l};
  const auto v = check_tick(rec, SafetyParams{});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, "speed");
  rec.links[0].v_toward = 0.2 + 5e-7;
  EXPECT_TRUE(check_tick(rec, SafetyParams{}).empty());
}

TEST(Summary, HistogramHasExactOneBin) {
  ScenarioConfig c = base_scenario();
  Trace t;
  for (double a : {0.0, 0.05, 0.55, 0.999, 1.0, 1.0}) {
    TickRecord r;
    r.alpha = a;
    r.min_separation = 1.0;
    t.ticks.push_back(r);
  }
  const Summary s = summarize(t, c);
  EXPECT_EQ(s.alpha_histogram,
            (std::vector<std::int64_t>{2, 0, 0, 0, 0, 1, 0, 0, 0, 1, 2}));
}

TEST(Realtime, EmptyWorkspaceReachesGoal) {
  ScenarioConfig c = base_scenario();
  c.mode = RunMode::kRealtime;
  c.duration = 15.0;
  const RunResult r = run_scenario(c);
  EXPECT_TRUE(r.summary.goal_reached);
  EXPECT_TRUE(r.summary.violations.empty());
  ASSERT_FALSE(r.trace.ticks.empty());
  EXPECT_LE((r.trace.ticks.back().q - c.goals[0]).cwiseAbs().maxCoeff(),
            c.planner.goal_tolerance);
}

TEST(Realtime, PauseFreezesCommandsWhileFramesContinue) {
  ScenarioConfig c = base_scenario();
  c.goals = {j2(2.5, 0.0)};
  std::mutex mu;
  std::vector<Frame> frames;
  RealtimeRunner runner(c, [&](const Frame& f) {
    std::lock_guard<std::mutex> lock(mu);
    frames.push_back(f);
  });
  runner.start();
  std::this_thread::sleep_for(std::chrono::milliseconds(600));
  runner.pause();
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  std::size_t mark = 0;
  {
    std::lock_guard<std::mutex> lock(mu);
    mark = frames.size();
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  runner.stop();
  ASSERT_GT(frames.size(), mark + 5);
  const JointVector held = frames[mark].tick.q;
  for (std::size_t i = mark; i < frames.size(); ++i) {
    EXPECT_TRUE(frames[i].tick.paused);
    EXPECT_EQ(frames[i].tick.qdot_cmd.norm(), 0.0);
    EXPECT_EQ(frames[i].tick.q, held);
  }
}

TEST(Realtime, LivePosesOutOfOrderAreDropped) {
  ScenarioConfig c = base_scenario();
  c.human.kind = HumanSourceSpec::Kind::kLive;
  RealtimeRunner runner(c);
  runner.push_human(1.0, {rod(Vec3(3, 0, 0), 0.1)});
  runner.push_human(0.5, {rod(Vec3(3, 0, 0), 0.1)});
  runner.push_human(1.0, {rod(Vec3(3, 0, 0), 0.1)});
  EXPECT_EQ(runner.dropped_poses(), 2u);
}

}  // namespace
}  // namespace hrc
