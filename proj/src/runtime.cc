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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <utility>

#include "hrc/error.h"
#include "hrc/geometry.h"
#include "hrc/realtime.h"

namespace hrc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSpeedTolerance = 1e-6;
constexpr double kMotionEpsilon = 1e-9;

EventRecord to_record(const PlannerEvent& ev, std::int64_t tick) {
  return {ev.t,        tick,        ev.name,     ev.trajectory_id,
          ev.graft_s,  ev.horizon_index, ev.duration, ev.detail};
}

EventRecord runtime_event(double t, std::int64_t tick, std::string name,
                          std::string detail = "") {
  EventRecord ev;
  ev.t = t;
  ev.tick = tick;
  ev.name = std::move(name);
  ev.detail = std::move(detail);
  return ev;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!robot) throw ConfigError("scenario: robot model missing");
  const auto n = static_cast<Eigen::Index>(robot->dof());
  if (q_start.size() != n) {
    throw ConfigError("scenario: start configuration has " +
                      std::to_string(q_start.size()) + " joints, robot has " +
                      std::to_string(n));
  }
  if (!robot->within_limits(q_start)) {
    throw ConfigError("scenario: start configuration outside joint limits");
  }
  if (goals.empty()) throw ConfigError("scenario: at least one goal required");
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (goals[i].size() != n) {
      throw ConfigError("scenario: goal " + std::to_string(i) +
                        " has the wrong joint count");
    }
    if (!robot->within_limits(goals[i])) {
      throw ConfigError("scenario: goal " + std::to_string(i) +
                        " outside joint limits");
    }
  }
  if (repeat < 1) throw ConfigError("scenario: repeat must be >= 1");
  if (!(duration > 0.0)) throw ConfigError("scenario: duration must be > 0");
  safety.validate();
  planner.validate();
  scaler.validate();
  if (human.kind == HumanSourceSpec::Kind::kScript) {
    human.script.validate();
    if (!(human.rate_hz > 0.0)) {
      throw ConfigError("scenario: human rate must be > 0");
    }
  }
  if (!(human.staleness_timeout > 0.0)) {
    throw ConfigError("scenario: human staleness timeout must be > 0");
  }
  ticks_per_cycle();
}

int ScenarioConfig::ticks_per_cycle() const {
  const double ratio = 1.0 / (scaler.tick_period * planner.cycle_rate);
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw ConfigError(
        "scenario: scaler rate must be an integer multiple of the planner "
        "rate");
  }
  return static_cast<int>(rounded);
}

std::vector<LinkRecord> monitor_links(const RobotModel& model,
                                      const JointVector& q,
                                      const JointVector& qdot,
                                      const HumanState& human,
                                      const SafetyParams& params,
                                      const ScalerConfig& config) {
  const std::size_t n = model.dof();
  std::vector<LinkRecord> out(n);
  const KinematicState fk = forward_kinematics(model, q);
  for (std::size_t i = 0; i < n; ++i) {
    LinkRecord& rec = out[i];
    rec.constrained = !config.ee_only || i + 1 == n;
    if (human.links.empty()) {
      rec.separation = kInf;
      rec.v_max = kInf;
      continue;
    }
    rec.has_human = true;
    const PairDistance pd = min_human_robot_distance(
        std::span<const Capsule>(&fk.capsules[i], 1), human.links);
    const DistanceResult& d = pd.result;
    rec.separation = d.distance;
    const Jacobian jac = point_jacobian(model, fk, i, d.witness_a);
    const Vec3 point_vel =
        jac.topRows<3>() * qdot.head(static_cast<Eigen::Index>(i + 1));
    if (d.degenerate) {
      rec.contact = true;
      rec.v_max = 0.0;
      rec.v_toward = point_vel.norm();
      continue;
    }
    double vh = -d.direction.dot(human.point_velocity(pd.human_index, d.param_b));
    if (human.stale) vh = std::max(0.0, vh);
    rec.human_speed = vh;
    rec.v_max = link_speed_limit(params, {d.distance, vh}, config.tick_period);
    rec.v_toward = d.direction.dot(point_vel);
  }
  return out;
}

std::vector<Violation> check_tick(const TickRecord& rec,
                                  const SafetyParams& params) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < rec.links.size(); ++i) {
    const LinkRecord& l = rec.links[i];
    if (!l.has_human) continue;
    if (rec.tick == 0 && l.separation < params.min_distance) {
      out.push_back({rec.t, rec.tick, "initial_separation", i,
                     "link " + std::to_string(i) + " starts " +
                         format_double(l.separation) + " m from the human, below d_min " +
                         format_double(params.min_distance)});
    }
    if (l.constrained && l.v_toward > l.v_max + kSpeedTolerance) {
      out.push_back({rec.t, rec.tick, "speed", i,
                     "link " + std::to_string(i) + " approaches at " +
                         format_double(l.v_toward) + " m/s, bound " +
                         format_double(l.v_max)});
    }
    if (l.separation < params.min_distance && l.v_toward > kMotionEpsilon) {
      out.push_back({rec.t, rec.tick, "separation", i,
                     "link " + std::to_string(i) + " moves toward the human at " +
                         format_double(l.separation) + " m, below d_min " +
                         format_double(params.min_distance)});
    }
  }
  return out;
}

Trajectory trajectory_from_record(const TrajectoryRecord& rec,
                                  const RobotModel& model) {
  Trajectory t = make_trajectory(GeometricPath::from_waypoints(rec.waypoints),
                                 model, rec.id);
  t.episode = rec.episode;
  t.parent_id = rec.parent_id;
  t.graft_s = rec.graft_s;
  return t;
}

namespace {

TrajectoryRecord record_trajectory(const Trajectory& t, double time,
                                   std::int64_t tick) {
  TrajectoryRecord rec;
  rec.t = time;
  rec.tick = tick;
  rec.id = t.id;
  rec.episode = t.episode;
  rec.parent_id = t.parent_id;
  rec.graft_s = t.graft_s;
  rec.waypoints = t.path.waypoints();
  rec.arc = t.path.arc_coords();
  rec.duration = t.law.duration();
  return rec;
}

class LockstepEngine {
 public:
  explicit LockstepEngine(const ScenarioConfig& config)
      : config_(config),
        model_(*config.robot),
        planner_(model_, config.safety, planner_config(config)),
        scaler_(model_, config.safety, config.scaler),
        shadow_(model_, config.safety, config.scaler),
        q_(config.q_start),
        q_nominal_(config.q_start) {
    if (config.human.kind == HumanSourceSpec::Kind::kScript) {
      source_ = std::make_unique<ScriptedHumanSource>(config.human.script,
                                                      config.human.rate_hz);
    }
    trace_.scenario = config.name;
    trace_.dof = model_.dof();
    trace_.tick_period = config.scaler.tick_period;
    total_goals_ = static_cast<int>(config.goals.size()) * config.repeat;
  }

  RunResult run() {
    const double dt = config_.scaler.tick_period;
    const int tpc = config_.ticks_per_cycle();
    const auto n_ticks =
        static_cast<std::int64_t>(std::floor(config_.duration / dt + 1e-9));
    planner_.start(q_, goal(0));
    PlannerFeedback fb;
    for (std::int64_t k = 0; k <= n_ticks; ++k) {
      const double t = static_cast<double>(k) * dt;
      HumanState human = source_ ? source_->state_at(t) : HumanState{};
      if (!source_) human.timestamp = t;
      if (k % tpc == 0) {
        if (cycle_planner(t, k, human, fb)) break;
      }
      const ScalerOutput out = scaler_.tick(planner_.current(), human, q_);
      const ScalerOutput nom =
          shadow_.tick(planner_.current(), HumanState{}, q_nominal_);
      record_tick(t, k, out, nom, human);
      q_ += out.qdot_cmd * dt;
      q_nominal_ += nom.qdot_cmd * dt;
      fb = {out.s_next, out.q_c_next, out.beta, out.trajectory_id,
            scaler_.state().episode};
    }
    RunResult result;
    result.summary = summarize(trace_, config_);
    result.trace = std::move(trace_);
    return result;
  }

 private:
  static PlannerConfig planner_config(const ScenarioConfig& c) {
    PlannerConfig p = c.planner;
    p.enforce_wall_clock = false;
    return p;
  }

  const JointVector& goal(int index) const {
    return config_.goals[static_cast<std::size_t>(index) % config_.goals.size()];
  }

  // Returns true when every goal has been reached.
  bool cycle_planner(double t, std::int64_t k, const HumanState& human,
                     const PlannerFeedback& fb) {
    planner_.cycle(t, human, fb);
    drain(t, k);
    while (planner_.phase() == PlannerPhase::kDone) {
      trace_.events.push_back(runtime_event(
          t, k, "goal_reached", "goal " + std::to_string(goal_index_)));
      ++goal_index_;
      if (goal_index_ >= total_goals_) {
        trace_.events.push_back(runtime_event(t, k, "run_complete"));
        return true;
      }
      planner_.start(fb.q_c.size() ? fb.q_c : q_, goal(goal_index_));
      planner_.cycle(t, human, fb);
      drain(t, k);
    }
    return false;
  }

  void drain(double t, std::int64_t k) {
    for (const PlannerEvent& ev : planner_.take_events()) {
      trace_.events.push_back(to_record(ev, k));
    }
    const auto cur = planner_.current();
    if (cur && cur->id != last_traj_id_) {
      trace_.trajectories.push_back(record_trajectory(*cur, t, k));
      last_traj_id_ = cur->id;
    }
  }

  void record_tick(double t, std::int64_t k, const ScalerOutput& out,
                   const ScalerOutput& nom, const HumanState& human) {
    TickRecord rec;
    rec.t = t;
    rec.tick = k;
    rec.trajectory_id = out.has_trajectory ? out.trajectory_id : 0;
    rec.goal_index = goal_index_;
    rec.s = out.s;
    rec.sdot = out.sdot;
    rec.q = q_;
    rec.q_nominal = q_nominal_;
    rec.qdot_cmd = out.qdot_cmd;
    rec.qdot_nominal = nom.qdot_cmd;
    rec.alpha = out.alpha;
    rec.beta = out.beta;
    rec.beta_raw = out.beta_raw;
    rec.active = out.active.to_string();
    rec.decel_conflict = out.decel_conflict;
    rec.links = monitor_links(model_, q_, out.qdot_cmd, human, config_.safety,
                              config_.scaler);
    for (std::size_t i = 0; i < rec.links.size(); ++i) {
      rec.links[i].coef = out.links[i].coef;
    }
    rec.min_separation = kInf;
    for (const LinkRecord& l : rec.links) {
      rec.min_separation = std::min(rec.min_separation, l.separation);
    }
    rec.human = human;
    trace_.ticks.push_back(std::move(rec));
  }

  const ScenarioConfig& config_;
  const RobotModel& model_;
  DynamicPlanner planner_;
  Scaler scaler_;
  Scaler shadow_;
  std::unique_ptr<HumanSource> source_;
  JointVector q_;
  JointVector q_nominal_;
  Trace trace_;
  int goal_index_ = 0;
  int total_goals_ = 1;
  std::uint64_t last_traj_id_ = 0;
};

}  // namespace

RunResult run_lockstep(const ScenarioConfig& config) {
  config.validate();
  return LockstepEngine(config).run();
}

RunResult run_scenario(const ScenarioConfig& config) {
  if (config.mode == RunMode::kRealtime) return run_realtime(config);
  return run_lockstep(config);
}

Summary summarize(const Trace& trace, const ScenarioConfig& config) {
  Summary s;
  s.scenario = trace.scenario;
  s.ticks = static_cast<std::int64_t>(trace.ticks.size());
  s.alpha_histogram.assign(11, 0);
  s.min_separation = kInf;
  s.replans = {{"infeasible", 0}, {"beta", 0}, {"failed", 0}, {"graft_race", 0}};
  for (const TickRecord& rec : trace.ticks) {
    s.min_separation = std::min(s.min_separation, rec.min_separation);
    if (rec.alpha >= 1.0) {
      ++s.alpha_histogram[10];
    } else {
      const int bin = std::clamp(static_cast<int>(rec.alpha * 10.0), 0, 9);
      ++s.alpha_histogram[static_cast<std::size_t>(bin)];
    }
    if (rec.decel_conflict) ++s.decel_conflicts;
    for (Violation& v : check_tick(rec, config.safety)) {
      s.violations.push_back(std::move(v));
    }
  }
  if (!trace.ticks.empty()) s.simulated_time = trace.ticks.back().t;
  const int total = static_cast<int>(config.goals.size()) * config.repeat;
  int reached = 0;
  for (const EventRecord& ev : trace.events) {
    if (ev.name == "replan_infeasible") ++s.replans["infeasible"];
    if (ev.name == "replan_beta") ++s.replans["beta"];
    if (ev.name == "plan_failed") ++s.replans["failed"];
    if (ev.name == "graft_race") ++s.replans["graft_race"];
    if (ev.name == "overrun") ++s.overruns;
    if (ev.name == "goal_reached") {
      ++reached;
      if (reached == total) s.completion_time = ev.t;
    }
  }
  s.goal_reached = reached >= total;
  for (const TrajectoryRecord& tr : trace.trajectories) {
    if (!tr.parent_id) s.nominal_duration += tr.duration;
  }
  return s;
}

std::vector<double> replay_alphas(const Trace& trace,
                                  const ScenarioConfig& config) {
  const RobotModel& model = *config.robot;
  std::map<std::uint64_t, std::shared_ptr<const Trajectory>> trajs;
  for (const TrajectoryRecord& rec : trace.trajectories) {
    trajs[rec.id] =
        std::make_shared<const Trajectory>(trajectory_from_record(rec, model));
  }
  Scaler scaler(model, config.safety, config.scaler);
  std::vector<double> out;
  out.reserve(trace.ticks.size());
  const auto n = static_cast<Eigen::Index>(model.dof());
  JointVector prev_qdot = JointVector::Zero(n);
  std::uint64_t prev_id = 0;
  bool prev_beta = false;
  for (const TickRecord& rec : trace.ticks) {
    if (rec.paused) {
      out.push_back(rec.alpha);
      prev_qdot = rec.qdot_cmd;
      continue;
    }
    std::shared_ptr<const Trajectory> traj;
    if (rec.trajectory_id != 0) {
      const auto it = trajs.find(rec.trajectory_id);
      if (it == trajs.end()) {
        throw PreconditionError("replay: trace lacks trajectory " +
                                std::to_string(rec.trajectory_id));
      }
      traj = it->second;
    }
    ScalerState& st = scaler.mutable_state();
    st.s = rec.s;
    st.qdot = prev_qdot;
    st.has_trajectory = static_cast<bool>(traj);
    st.trajectory_id = rec.trajectory_id;
    st.episode = traj ? traj->episode : 0;
    st.beta_latched = prev_id == rec.trajectory_id && prev_beta;
    out.push_back(scaler.tick(traj, rec.human, rec.q).alpha);
    prev_qdot = rec.qdot_cmd;
    prev_id = rec.trajectory_id;
    prev_beta = rec.beta;
  }
  return out;
}

}  // namespace hrc
