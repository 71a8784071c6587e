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

// Simulation orchestrator.
//
// The lockstep engine advances simulated time one scaler tick at a time and
// runs a planner cycle every `ticks_per_cycle` ticks, so every run of a given
// scenario is reproducible bit for bit. Each tick it samples the human,
// optionally cycles the planner with the previous tick's feedback, runs the
// scaler, records the tick, integrates q += qdot * dt and checks the global
// safety invariants.

#ifndef HRC_RUNTIME_H_
#define HRC_RUNTIME_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hrc/human_model.h"
#include "hrc/kinematics.h"
#include "hrc/planner.h"
#include "hrc/safety_ssm.h"
#include "hrc/scaler.h"
#include "hrc/trajectory.h"

namespace hrc {

enum class RunMode { kLockstep, kRealtime };

struct HumanSourceSpec {
  enum class Kind { kNone, kScript, kLive };
  Kind kind = Kind::kNone;
  HumanScript script;
  double rate_hz = 240.0;
  double staleness_timeout = 0.5;  // live sources only
};

struct ScenarioConfig {
  std::string name;
  std::shared_ptr<const RobotModel> robot;
  JointVector q_start;
  // Visited in order; the whole list is traversed `repeat` times.
  std::vector<JointVector> goals;
  int repeat = 1;
  SafetyParams safety;
  PlannerConfig planner;
  ScalerConfig scaler;
  HumanSourceSpec human;
  double duration = 30.0;  // simulated time limit [s]
  RunMode mode = RunMode::kLockstep;

  // Throws ConfigError on inconsistent sizes, limits or rates.
  void validate() const;
  // Scaler ticks per planner cycle; rates must divide evenly.
  int ticks_per_cycle() const;
};

struct LinkRecord {
  bool constrained = false;
  bool has_human = false;
  bool contact = false;
  double separation = 0.0;
  double human_speed = 0.0;
  double v_max = 0.0;
  double coef = 0.0;
  double v_toward = 0.0;  // modified Jacobian row times qdot_cmd
};

struct TickRecord {
  double t = 0.0;
  std::int64_t tick = 0;
  std::uint64_t trajectory_id = 0;
  int goal_index = 0;
  double s = 0.0;
  double sdot = 0.0;
  JointVector q;  // executed configuration at the start of the tick
  JointVector q_nominal;
  JointVector qdot_cmd;
  JointVector qdot_nominal;
  double alpha = 1.0;
  bool beta = false;
  bool beta_raw = false;
  std::string active;
  bool decel_conflict = false;
  bool paused = false;
  std::vector<LinkRecord> links;
  double min_separation = 0.0;  // +inf without a human
  HumanState human;
};

struct EventRecord {
  double t = 0.0;
  std::int64_t tick = 0;
  std::string name;
  std::uint64_t trajectory_id = 0;
  double graft_s = 0.0;
  int horizon_index = -1;
  double duration = 0.0;
  std::string detail;
};

struct TrajectoryRecord {
  double t = 0.0;
  std::int64_t tick = 0;
  std::uint64_t id = 0;
  std::uint64_t episode = 0;
  std::optional<std::uint64_t> parent_id;
  double graft_s = 0.0;
  std::vector<JointVector> waypoints;
  std::vector<double> arc;
  double duration = 0.0;  // nominal, from the time law
};

struct Trace {
  std::string scenario;
  std::size_t dof = 0;
  double tick_period = 0.0;
  std::vector<TickRecord> ticks;
  std::vector<EventRecord> events;
  std::vector<TrajectoryRecord> trajectories;
};

struct Violation {
  double t = 0.0;
  std::int64_t tick = 0;
  std::string kind;  // speed | separation | initial_separation
  std::size_t link = 0;
  std::string message;
};

struct Summary {
  std::string scenario;
  bool goal_reached = false;
  std::optional<double> completion_time;
  double simulated_time = 0.0;
  std::int64_t ticks = 0;
  double min_separation = 0.0;
  // Bins [0, 0.1), ..., [0.9, 1.0) followed by alpha == 1 exactly.
  std::vector<std::int64_t> alpha_histogram;
  std::map<std::string, std::int64_t> replans;  // infeasible, beta, failed, graft_race
  std::int64_t decel_conflicts = 0;
  std::int64_t overruns = 0;
  std::vector<Violation> violations;
  // Sum of the nominal durations of each leg's first plan: the completion
  // time the robot would need without scaling or replanning.
  double nominal_duration = 0.0;
};

struct RunResult {
  Trace trace;
  Summary summary;
};

// Independent per-tick monitor used by the runtime: recomputes each link's
// separation, speed bound and commanded velocity toward the human at q.
std::vector<LinkRecord> monitor_links(const RobotModel& model,
                                      const JointVector& q,
                                      const JointVector& qdot,
                                      const HumanState& human,
                                      const SafetyParams& params,
                                      const ScalerConfig& config);

// Violations at one tick (see Violation::kind).
std::vector<Violation> check_tick(const TickRecord& rec,
                                  const SafetyParams& params);

// Deterministic simulated-time run.
RunResult run_lockstep(const ScenarioConfig& config);

// Dispatches on config.mode. Realtime runs on the wall clock for
// config.duration seconds.
RunResult run_scenario(const ScenarioConfig& config);

// Rebuilds the summary from a trace (used for realtime runs and re-ingested
// traces).
Summary summarize(const Trace& trace, const ScenarioConfig& config);

// Re-runs the scaler on the inputs recorded in the trace and returns the
// alpha of every tick. Paused ticks reproduce their recorded alpha.
std::vector<double> replay_alphas(const Trace& trace,
                                  const ScenarioConfig& config);

// Time-parameterized trajectory rebuilt from its trace record.
Trajectory trajectory_from_record(const TrajectoryRecord& rec,
                                  const RobotModel& model);

}  // namespace hrc

#endif  // HRC_RUNTIME_H_
