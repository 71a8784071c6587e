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

#include "hrc/realtime.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "hrc/error.h"

namespace hrc {
namespace {

using Clock = std::chrono::steady_clock;
constexpr std::size_t kFrameEventBacklog = 256;

Clock::duration seconds(double s) {
  return std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(s));
}

EventRecord make_event(double t, std::string name, std::string detail = "") {
  EventRecord ev;
  ev.t = t;
  ev.name = std::move(name);
  ev.detail = std::move(detail);
  return ev;
}

}  // namespace

RealtimeRunner::RealtimeRunner(ScenarioConfig config, FrameSink sink,
                               bool record_trace)
    : config_(std::move(config)),
      sink_(std::move(sink)),
      record_trace_(record_trace),
      live_(config_.human.staleness_timeout) {
  config_.validate();
  trace_.scenario = config_.name;
  trace_.dof = config_.robot->dof();
  trace_.tick_period = config_.scaler.tick_period;
}

RealtimeRunner::~RealtimeRunner() { stop(); }

double RealtimeRunner::now() const {
  return std::chrono::duration<double>(Clock::now() - t0_).count();
}

void RealtimeRunner::start() {
  if (running_.exchange(true)) return;
  t0_ = Clock::now();
  scaler_thread_ = std::thread(&RealtimeRunner::scaler_loop, this);
  planner_thread_ = std::thread(&RealtimeRunner::planner_loop, this);
  human_thread_ = std::thread(&RealtimeRunner::human_loop, this);
}

void RealtimeRunner::stop() {
  running_ = false;
  for (std::thread* t : {&scaler_thread_, &planner_thread_, &human_thread_}) {
    if (t->joinable()) t->join();
  }
}

void RealtimeRunner::pause() { paused_ = true; }
void RealtimeRunner::resume() { paused_ = false; }

void RealtimeRunner::reset() {
  {
    std::lock_guard<std::mutex> lock(control_mu_);
    goal_override_ = false;
    reset_pending_ = true;
  }
  ++generation_;
}

void RealtimeRunner::set_goal(const JointVector& goal) {
  if (goal.size() != static_cast<Eigen::Index>(config_.robot->dof()) ||
      !config_.robot->within_limits(goal)) {
    throw PreconditionError("set_goal: goal has the wrong size or is outside "
                            "joint limits");
  }
  {
    std::lock_guard<std::mutex> lock(control_mu_);
    goal_override_ = true;
    override_goal_ = goal;
  }
  ++generation_;
}

void RealtimeRunner::push_human(double client_time, std::vector<Capsule> links) {
  std::lock_guard<std::mutex> lock(live_mu_);
  if (client_time <= last_client_time_) {
    ++client_dropped_;
    return;
  }
  last_client_time_ = client_time;
  live_.ingest_live({now(), std::move(links)});
}

std::size_t RealtimeRunner::dropped_poses() const {
  std::lock_guard<std::mutex> lock(live_mu_);
  return client_dropped_ + live_.dropped();
}

void RealtimeRunner::push_event(EventRecord ev) {
  std::lock_guard<std::mutex> lock(trace_mu_);
  ev.tick = tick_count_.load();
  if (record_trace_) trace_.events.push_back(ev);
  frame_events_.push_back(std::move(ev));
  while (frame_events_.size() > kFrameEventBacklog) frame_events_.pop_front();
}

void RealtimeRunner::scaler_loop() {
  const RobotModel& model = *config_.robot;
  const auto n = static_cast<Eigen::Index>(model.dof());
  const double dt = config_.scaler.tick_period;
  Scaler scaler(model, config_.safety, config_.scaler);
  JointVector q = config_.q_start;
  std::uint64_t gen_seen = 0;
  std::uint64_t frame_no = 0;
  auto next = t0_;
  while (running_) {
    next += seconds(dt);
    std::this_thread::sleep_until(next);
    const auto started = Clock::now();
    const double t = now();
    const std::int64_t k = tick_count_.load();

    const std::uint64_t gen = generation_.load();
    if (gen != gen_seen) {
      bool back_to_start = false;
      {
        std::lock_guard<std::mutex> lock(control_mu_);
        back_to_start = reset_pending_;
        reset_pending_ = false;
      }
      if (back_to_start) q = config_.q_start;
      scaler.mutable_state() = ScalerState{};
      scaler.mutable_state().qdot = JointVector::Zero(n);
      gen_seen = gen;
    }
    const auto pub = trajectory_cell_.load();
    std::shared_ptr<const Trajectory> traj;
    if (pub && pub->generation == gen_seen) traj = pub->trajectory;
    const auto human_ptr = human_cell_.load();
    HumanState human = human_ptr ? *human_ptr : HumanState{};

    ScalerOutput out;
    const bool paused = paused_.load();
    if (paused) {
      // Evaluate for display only; the command stays at zero.
      Scaler probe = scaler;
      out = probe.tick(traj, human, q);
      out.qdot_cmd = JointVector::Zero(n);
      out.s_next = out.s;
      out.q_c_next = out.q;
      scaler.mutable_state().qdot = JointVector::Zero(n);
    } else {
      out = scaler.tick(traj, human, q);
    }

    TickRecord rec;
    rec.t = t;
    rec.tick = k;
    rec.trajectory_id = out.has_trajectory ? out.trajectory_id : 0;
    rec.s = out.s;
    rec.sdot = out.sdot;
    rec.q = q;
    rec.q_nominal = q;
    rec.qdot_cmd = out.qdot_cmd;
    rec.qdot_nominal = out.alpha > 0.0 && !paused
                           ? JointVector(out.qdot_cmd / out.alpha)
                           : JointVector::Zero(n);
    rec.alpha = out.alpha;
    rec.beta = out.beta;
    rec.beta_raw = out.beta_raw;
    rec.active = out.active.to_string();
    rec.decel_conflict = out.decel_conflict;
    rec.paused = paused;
    rec.links = monitor_links(model, q, out.qdot_cmd, human, config_.safety,
                              config_.scaler);
    rec.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.links.size(); ++i) {
      rec.links[i].coef = out.links[i].coef;
      rec.min_separation = std::min(rec.min_separation, rec.links[i].separation);
    }
    rec.human = std::move(human);

    q += out.qdot_cmd * dt;
    auto fbv = std::make_shared<Feedback>();
    fbv->fb = {out.s_next, out.q_c_next, out.beta, out.trajectory_id,
               scaler.state().episode};
    fbv->q = q;
    fbv->generation = gen_seen;
    feedback_cell_.store(std::move(fbv));

    Frame frame;
    frame.frame = frame_no++;
    frame.robot_capsules = forward_kinematics(model, rec.q).capsules;
    frame.trajectory = out.has_trajectory ? traj : nullptr;
    frame.finished = finished_.load();
    {
      std::lock_guard<std::mutex> lock(trace_mu_);
      frame.events.assign(frame_events_.begin(), frame_events_.end());
      frame_events_.clear();
      if (record_trace_) trace_.ticks.push_back(rec);
    }
    frame.tick = std::move(rec);
    if (sink_) sink_(frame);
    ++tick_count_;

    const double spent =
        std::chrono::duration<double>(Clock::now() - started).count();
    if (spent > dt) {
      ++overruns_;
      push_event(make_event(t, "overrun", "scaler tick took " +
                                              std::to_string(spent) + " s"));
    }
    if (Clock::now() > next + seconds(dt)) next = Clock::now();
  }
}

void RealtimeRunner::planner_loop() {
  const RobotModel& model = *config_.robot;
  PlannerConfig pc = config_.planner;
  pc.enforce_wall_clock = true;
  pc.plan_latency = 0.0;
  DynamicPlanner planner(model, config_.safety, pc);
  std::vector<JointVector> goals = config_.goals;
  int total = static_cast<int>(goals.size()) * config_.repeat;
  int goal_index = 0;
  std::uint64_t gen_seen = 0;
  std::uint64_t last_id = 0;
  bool need_start = false;
  planner.start(config_.q_start, goals.front());
  auto goal = [&](int i) -> const JointVector& {
    return goals[static_cast<std::size_t>(i) % goals.size()];
  };
  auto drain = [&](double t) {
    for (const PlannerEvent& ev : planner.take_events()) {
      push_event({ev.t, 0, ev.name, ev.trajectory_id, ev.graft_s,
                  ev.horizon_index, ev.duration, ev.detail});
    }
    const auto cur = planner.current();
    if (cur && cur->id != last_id) {
      last_id = cur->id;
      if (record_trace_) {
        TrajectoryRecord rec;
        rec.t = t;
        rec.tick = tick_count_.load();
        rec.id = cur->id;
        rec.episode = cur->episode;
        rec.parent_id = cur->parent_id;
        rec.graft_s = cur->graft_s;
        rec.waypoints = cur->path.waypoints();
        rec.arc = cur->path.arc_coords();
        rec.duration = cur->law.duration();
        std::lock_guard<std::mutex> lock(trace_mu_);
        trace_.trajectories.push_back(std::move(rec));
      }
      auto pub = std::make_shared<Published>();
      pub->trajectory = cur;
      pub->generation = gen_seen;
      trajectory_cell_.store(std::move(pub));
    }
  };

  const double period = 1.0 / pc.cycle_rate;
  auto next = t0_;
  while (running_) {
    std::this_thread::sleep_until(next);
    next += seconds(period);
    if (Clock::now() > next) next = Clock::now();
    const double t = now();

    const std::uint64_t gen = generation_.load();
    if (gen != gen_seen) {
      std::lock_guard<std::mutex> lock(control_mu_);
      if (goal_override_) {
        goals = {override_goal_};
        total = 1;
        goal_override_ = false;
        push_event(make_event(t, "set_goal"));
      } else {
        goals = config_.goals;
        total = static_cast<int>(goals.size()) * config_.repeat;
        push_event(make_event(t, "reset"));
      }
      goal_index = 0;
      gen_seen = gen;
      need_start = true;
      finished_ = false;
    }
    const auto fbc = feedback_cell_.load();
    if (need_start) {
      // Wait until the scaler has stopped under the new generation.
      if (!fbc || fbc->generation != gen_seen) continue;
      planner.start(fbc->q, goal(0));
      need_start = false;
    }
    if (finished_) continue;
    PlannerFeedback fb;
    if (fbc && fbc->generation == gen_seen) fb = fbc->fb;
    const auto human_ptr = human_cell_.load();
    const HumanState human = human_ptr ? *human_ptr : HumanState{};
    planner.cycle(t, human, fb);
    drain(t);
    while (planner.phase() == PlannerPhase::kDone) {
      push_event(make_event(t, "goal_reached",
                            "goal " + std::to_string(goal_index)));
      ++goal_index;
      if (goal_index >= total) {
        push_event(make_event(t, "run_complete"));
        finished_ = true;
        break;
      }
      planner.start(fb.q_c.size() ? fb.q_c : fbc->q, goal(goal_index));
      planner.cycle(t, human, fb);
      drain(t);
    }
  }
}

void RealtimeRunner::human_loop() {
  std::unique_ptr<ScriptedHumanSource> script;
  if (config_.human.kind == HumanSourceSpec::Kind::kScript) {
    script = std::make_unique<ScriptedHumanSource>(config_.human.script,
                                                   config_.human.rate_hz);
  }
  const double period = 1.0 / config_.human.rate_hz;
  auto next = t0_;
  while (running_) {
    const double t = now();
    std::shared_ptr<HumanState> state;
    if (script) {
      state = std::make_shared<HumanState>(script->state_at(t));
    } else {
      std::lock_guard<std::mutex> lock(live_mu_);
      state = std::make_shared<HumanState>(live_.state_at(t));
    }
    human_cell_.store(std::move(state));
    next += seconds(period);
    std::this_thread::sleep_until(next);
    if (Clock::now() > next + seconds(period)) next = Clock::now();
  }
}

Trace RealtimeRunner::take_trace() {
  stop();
  std::lock_guard<std::mutex> lock(trace_mu_);
  return std::move(trace_);
}

RunResult run_realtime(const ScenarioConfig& config) {
  RealtimeRunner runner(config);
  runner.start();
  while (!runner.finished() && runner.now() < config.duration) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  RunResult result;
  result.trace = runner.take_trace();
  result.summary = summarize(result.trace, config);
  return result;
}

}  // namespace hrc
