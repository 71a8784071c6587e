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

#include "hrc/planner.h"

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hrc/error.h"
#include "hrc/robot_presets.h"

namespace hrc {
namespace {

JointVector j2(double a, double b) { return (JointVector(2) << a, b).finished(); }

HumanState vertical_rod(const Vec3& at, double radius) {
  HumanState h;
  h.links = {{{at - Vec3(0, 0, 1), at + Vec3(0, 0, 1)}, radius}};
  h.velocities = {{Vec3::Zero(), Vec3::Zero()}};
  return h;
}

Vec3 tip_at(double theta) {
  return Vec3(2.0 * std::cos(theta), 2.0 * std::sin(theta), 0.0);
}

// Clearance along a path sampled much finer than the planner's spacing.
double swept_clearance(const RobotModel& m, const GeometricPath& p,
                       const HumanState& h, double step, double from = 0.0) {
  double best = 1e9;
  for (double s = from; s <= p.length(); s += step) {
    best = std::min(best, clearance(m, p.position(s), h));
  }
  return std::min(best, clearance(m, p.goal(), h));
}

std::vector<PlannerEvent> named(const std::vector<PlannerEvent>& evs,
                                const std::string& name) {
  std::vector<PlannerEvent> out;
  for (const PlannerEvent& e : evs) {
    if (e.name == name) out.push_back(e);
  }
  return out;
}

PlannerFeedback feedback(const Trajectory& t, double s, bool beta = false) {
  return {s, t.path.position(s), beta, t.id, t.episode};
}

TEST(Plan, IdentityWithoutHuman) {
  const RobotModel arm = planar_2r();
  const auto t = plan(arm, j2(0.3, 0.2), j2(0.3, 0.2), HumanState{},
                      SafetyParams{}, PlannerConfig{}, 1);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->path.length(), 0.0);
  EXPECT_EQ(t->law.duration(), 0.0);
}

TEST(Plan, StraightSegmentInFreeSpace) {
  const RobotModel arm = planar_2r();
  const auto t = plan(arm, j2(0.0, 0.0), j2(1.0, -0.5), HumanState{},
                      SafetyParams{}, PlannerConfig{}, 1);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->path.waypoints().size(), 2u);
  EXPECT_NEAR(t->path.length(), std::hypot(1.0, 0.5), 1e-12);
}

TEST(Plan, AvoidsBlockingHuman) {
  const RobotModel arm = planar_2r(1.0, 1.0, 0.05);
  const HumanState h = vertical_rod(tip_at(0.75), 0.1);
  const SafetyParams params;
  const PlannerConfig config;
  const auto t = plan(arm, j2(0.0, 0.0), j2(1.5, 0.0), h, params, config, 1);
  ASSERT_TRUE(t.has_value());
  EXPECT_GT(t->path.waypoints().size(), 2u);
  EXPECT_LT((t->path.goal() - j2(1.5, 0.0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GE(swept_clearance(arm, t->path, h, config.horizon_spacing / 10.0),
            params.min_distance);
}

TEST(Plan, EscapesFromStartNearHuman) {
  const RobotModel arm = planar_2r(1.0, 1.0, 0.05);
  const HumanState h = vertical_rod(Vec3(2.0, 0.21, 0.0), 0.1);
  const SafetyParams params;
  const PlannerConfig config;
  const JointVector start = j2(0.0, 0.0);
  const JointVector goal = j2(1.5, 0.0);
  ASSERT_NEAR(clearance(arm, start, h), 0.06, 1e-9);
  const double target = params.min_distance + config.plan_clearance;
  const PlanResult r = plan_path(arm, h, params, config, {start, goal, target, 5});
  ASSERT_TRUE(r.path.has_value()) << r.failure;
  const double step = config.horizon_spacing / 10.0;
  EXPECT_GE(swept_clearance(arm, *r.path, h, step), params.min_distance);
  for (double s = 0.0; s <= r.path->length(); s += step) {
    const JointVector q = r.path->position(s);
    if ((q - start).norm() > config.escape_radius &&
        (q - goal).norm() > config.escape_radius) {
      EXPECT_GE(clearance(arm, q, h), target) << "s=" << s;
    }
  }
}

TEST(Plan, DeterministicForSeed) {
  const RobotModel arm = planar_2r(1.0, 1.0, 0.05);
  const HumanState h = vertical_rod(tip_at(0.75), 0.1);
  const auto a = plan(arm, j2(0, 0), j2(1.5, 0), h, SafetyParams{}, PlannerConfig{}, 3);
  const auto b = plan(arm, j2(0, 0), j2(1.5, 0), h, SafetyParams{}, PlannerConfig{}, 3);
  ASSERT_TRUE(a && b);
  ASSERT_EQ(a->path.waypoints().size(), b->path.waypoints().size());
  for (std::size_t i = 0; i < a->path.waypoints().size(); ++i) {
    EXPECT_EQ(a->path.waypoints()[i], b->path.waypoints()[i]);
  }
}

TEST(Plan, GoalInsideHumanFails) {
  const RobotModel arm = planar_2r(1.0, 1.0, 0.05);
  const HumanState h = vertical_rod(tip_at(1.5), 0.1);
  PlanRequest req{j2(0, 0), j2(1.5, 0), 0.15, 1};
  const PlanResult r = plan_path(arm, h, SafetyParams{}, PlannerConfig{}, req);
  EXPECT_FALSE(r.path.has_value());
  EXPECT_NE(r.failure.find("goal"), std::string::npos);
}

TEST(CheckFeasible, Boundaries) {
  const RobotModel arm = planar_2r();
  SafetyParams p;
  EXPECT_TRUE(check_feasible(arm, j2(0, 0), vertical_rod({0, 5, 0}, 0.1), p));
  EXPECT_FALSE(check_feasible(arm, j2(0, 0), vertical_rod({1, 0, 0}, 0.1), p));
  p.min_distance = 0.25;
  EXPECT_TRUE(check_feasible(arm, j2(0, 0), vertical_rod({2.25, 0, 0}, 0.0), p));
  EXPECT_TRUE(check_feasible(arm, j2(0, 0), HumanState{}, p));
}

TEST(Horizon, Arithmetic) {
  JointSpec js;
  const RobotModel m({js});
  const Trajectory t = make_trajectory(
      GeometricPath::from_waypoints({JointVector::Zero(1), JointVector::Ones(1)}),
      m, 1);
  PlannerConfig c;
  c.horizon_len = 3;
  c.horizon_spacing = 0.1;
  const auto h = horizon(t, 0.0, c);
  ASSERT_EQ(h.size(), 3u);
  EXPECT_NEAR(h[0].s, 0.1, 1e-15);
  EXPECT_NEAR(h[2].s, 0.3, 1e-15);
  for (const HorizonSample& x : h) {
    EXPECT_EQ(x.q, t.path.position(x.s));
  }
  const auto end = horizon(t, 1.0, c);
  ASSERT_EQ(end.size(), 1u);
  EXPECT_EQ(end[0].q[0], 1.0);
}

TEST(PlannerConfig, Validation) {
  PlannerConfig c;
  c.horizon_len = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PlannerConfig{};
  c.horizon_spacing = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PlannerConfig{};
  c.max_plan_time = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

class DynamicPlannerTest : public ::testing::Test {
 protected:
  DynamicPlannerTest() {
    config_.horizon_len = 5;
    config_.horizon_spacing = 0.1;
  }
  RobotModel arm_ = planar_2r(1.0, 1.0, 0.0);
  SafetyParams params_;
  PlannerConfig config_;
};

TEST_F(DynamicPlannerTest, InitialPlanThenQuietCycle) {
  DynamicPlanner dp(arm_, params_, config_);
  dp.start(j2(0, 0), j2(1.5, 0));
  dp.cycle(0.0, HumanState{}, {});
  ASSERT_TRUE(dp.current());
  EXPECT_EQ(dp.phase(), PlannerPhase::kTracking);
  const auto evs = dp.take_events();
  EXPECT_EQ(named(evs, "plan_started").size(), 1u);
  EXPECT_EQ(named(evs, "plan_done").size(), 1u);
  const auto id = dp.current()->id;
  dp.cycle(0.1, HumanState{}, feedback(*dp.current(), 0.2));
  EXPECT_EQ(dp.current()->id, id);
  EXPECT_TRUE(dp.take_events().empty());
  EXPECT_EQ(dp.q_c(), dp.current()->path.position(0.2));
}

TEST_F(DynamicPlannerTest, InfeasibleSampleGraftsAtPredecessor) {
  DynamicPlanner dp(arm_, params_, config_);
  dp.start(j2(0, 0), j2(1.5, 0));
  dp.cycle(0.0, HumanState{}, {});
  const Trajectory first = *dp.current();
  dp.take_events();
  // Tip passes through the rod at theta = 0.3, i.e. horizon index 2.
  const HumanState h = vertical_rod(tip_at(0.3), 0.0);
  dp.cycle(0.1, h, feedback(first, 0.0, true));
  const auto evs = dp.take_events();
  const auto inf = named(evs, "replan_infeasible");
  ASSERT_EQ(inf.size(), 1u);
  EXPECT_EQ(inf[0].horizon_index, 2);
  const auto hz = horizon(first, 0.0, config_);
  EXPECT_EQ(inf[0].graft_s, hz[1].s);
  // Infeasibility wins over the simultaneous replan request.
  EXPECT_TRUE(named(evs, "replan_beta").empty());
  ASSERT_EQ(named(evs, "plan_done").size(), 1u);
  const Trajectory& merged = *dp.current();
  EXPECT_EQ(merged.graft_s, hz[1].s);
  EXPECT_LT((merged.path.position(hz[1].s) - hz[1].q).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((merged.path.goal() - j2(1.5, 0)).cwiseAbs().maxCoeff(),
            config_.goal_tolerance);
  EXPECT_GE(swept_clearance(arm_, merged.path, h, 0.005, merged.graft_s),
            params_.min_distance);
}

TEST_F(DynamicPlannerTest, InfeasibleFirstSampleGraftsAtCurrent) {
  DynamicPlanner dp(arm_, params_, config_);
  dp.start(j2(0, 0), j2(1.5, 0));
  dp.cycle(0.0, HumanState{}, {});
  const Trajectory first = *dp.current();
  dp.take_events();
  dp.cycle(0.1, vertical_rod(tip_at(0.45), 0.0), feedback(first, 0.37));
  const auto inf = named(dp.take_events(), "replan_infeasible");
  ASSERT_EQ(inf.size(), 1u);
  EXPECT_EQ(inf[0].horizon_index, 0);
  EXPECT_EQ(inf[0].graft_s, 0.37);
}

TEST_F(DynamicPlannerTest, BetaReplanFromCurrent) {
  DynamicPlanner dp(arm_, params_, config_);
  dp.start(j2(0, 0), j2(1.5, 0));
  dp.cycle(0.0, HumanState{}, {});
  const Trajectory first = *dp.current();
  dp.take_events();
  dp.cycle(0.1, HumanState{}, feedback(first, 0.42, true));
  const auto evs = dp.take_events();
  const auto beta = named(evs, "replan_beta");
  ASSERT_EQ(beta.size(), 1u);
  EXPECT_EQ(beta[0].graft_s, 0.42);
  const Trajectory& merged = *dp.current();
  EXPECT_NE(merged.id, first.id);
  EXPECT_EQ(merged.episode, first.episode);
  EXPECT_LT((merged.path.position(0.42) - first.path.position(0.42)).norm(), 1e-9);
  // A stale beta for the old id is ignored.
  dp.cycle(0.2, HumanState{}, {0.5, merged.path.position(0.5), true, first.id,
                               first.episode});
  EXPECT_TRUE(named(dp.take_events(), "replan_beta").empty());
}

TEST_F(DynamicPlannerTest, BetaIgnoredWhenDisabled) {
  config_.beta_enabled = false;
  DynamicPlanner dp(arm_, params_, config_);
  dp.start(j2(0, 0), j2(1.5, 0));
  dp.cycle(0.0, HumanState{}, {});
  const Trajectory first = *dp.current();
  dp.take_events();
  dp.cycle(0.1, HumanState{}, feedback(first, 0.42, true));
  EXPECT_TRUE(dp.take_events().empty());
}

TEST_F(DynamicPlannerTest, DoneAtGoal) {
  DynamicPlanner dp(arm_, params_, config_);
  dp.start(j2(0, 0), j2(1.5, 0));
  dp.cycle(0.0, HumanState{}, {});
  const Trajectory t = *dp.current();
  dp.cycle(1.0, HumanState{}, feedback(t, t.path.length()));
  EXPECT_EQ(dp.phase(), PlannerPhase::kDone);
}

TEST_F(DynamicPlannerTest, FailureBacksOffExponentially) {
  DynamicPlanner dp(arm_, params_, config_);
  dp.start(j2(0, 0), j2(1.5, 0));
  const HumanState h = vertical_rod(tip_at(1.5), 0.1);
  std::vector<double> backoffs;
  for (int k = 0; k <= 80; ++k) {
    dp.cycle(0.1 * k, h, {});
    for (const PlannerEvent& e : named(dp.take_events(), "plan_failed")) {
      backoffs.push_back(e.duration);
    }
  }
  ASSERT_GE(backoffs.size(), 6u);
  EXPECT_NEAR(backoffs[0], 0.1, 1e-12);
  EXPECT_NEAR(backoffs[1], 0.2, 1e-12);
  EXPECT_NEAR(backoffs[2], 0.4, 1e-12);
  EXPECT_NEAR(backoffs[3], 0.8, 1e-12);
  EXPECT_NEAR(backoffs[4], 1.0, 1e-12);
  EXPECT_NEAR(backoffs[5], 1.0, 1e-12);
  EXPECT_FALSE(dp.current());
}

TEST_F(DynamicPlannerTest, GraftRaceRegrafts) {
  config_.plan_latency = 0.3;
  DynamicPlanner dp(arm_, params_, config_);
  dp.start(j2(0, 0), j2(1.5, 0));
  dp.cycle(0.0, HumanState{}, {});
  EXPECT_FALSE(dp.current());
  EXPECT_TRUE(dp.busy(0.1));
  dp.cycle(0.3, HumanState{}, {});
  ASSERT_TRUE(dp.current());
  const Trajectory first = *dp.current();
  dp.take_events();
  dp.cycle(0.4, HumanState{}, feedback(first, 0.2, true));
  EXPECT_EQ(dp.current()->id, first.id);
  // The scaler kept moving while the replan was pending.
  dp.cycle(0.7, HumanState{}, feedback(first, 0.5));
  const auto evs = dp.take_events();
  const auto race = named(evs, "graft_race");
  ASSERT_EQ(race.size(), 1u);
  EXPECT_EQ(race[0].detail, "regraft");
  const Trajectory& merged = *dp.current();
  EXPECT_NE(merged.id, first.id);
  EXPECT_EQ(merged.graft_s, 0.5);
  EXPECT_LT((merged.path.position(0.5) - first.path.position(0.5)).norm(), 1e-9);
  const auto done = named(evs, "plan_done");
  ASSERT_EQ(done.size(), 1u);
  EXPECT_NEAR(done[0].duration, 0.3, 1e-12);
}

}  // namespace
}  // namespace hrc
