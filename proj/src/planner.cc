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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "hrc/error.h"
#include "hrc/geometry.h"

namespace hrc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBisection = 8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Upper bound on the distance from joint j's axis to any point of the links
// it moves. Rotations preserve the chained offsets' lengths, so summing them
// bounds the reach for every configuration.
std::vector<double> reach_bounds(const RobotModel& model) {
  const std::size_t n = model.dof();
  std::vector<double> reach(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double chain = 0.0;
    double best = 0.0;
    for (std::size_t i = j; i < n; ++i) {
      if (i > j) chain += model.joint(i).origin.translation().norm();
      const Capsule& c = model.joint(i).capsule;
      best = std::max(best, chain + std::max(c.axis.a.norm(), c.axis.b.norm()));
    }
    reach[j] = best;
  }
  return reach;
}

struct Node {
  JointVector q;
  int parent = -1;
};

class PathValidator {
 public:
  PathValidator(const RobotModel& model, const HumanState& human,
                const PlannerConfig& config, double d_min, double target,
                const JointVector& start, const JointVector& goal)
      : model_(model),
        human_(human),
        config_(config),
        reach_(reach_bounds(model)),
        d_min_(d_min),
        target_(target),
        start_(start),
        goal_(goal) {
    start_clearance_ = clearance(model_, start_, human_);
    goal_clearance_ = clearance(model_, goal_, human_);
  }

  double start_clearance() const { return start_clearance_; }
  double goal_clearance() const { return goal_clearance_; }

  double required(const JointVector& q) const {
    if ((q - start_).norm() <= config_.escape_radius ||
        (q - goal_).norm() <= config_.escape_radius) {
      return d_min_;
    }
    return std::max(target_, d_min_);
  }

  bool valid(const JointVector& q) const {
    return model_.within_limits(q) &&
           clearance(model_, q, human_) >= required(q);
  }

  // a is assumed valid.
  bool edge(const JointVector& a, const JointVector& b) const {
    const double len = (b - a).norm();
    if (len == 0.0) return true;
    if (human_.links.empty()) {
      return model_.within_limits(b);
    }
    const int steps =
        std::max(1, static_cast<int>(std::ceil(len / config_.horizon_spacing)));
    JointVector prev = a;
    double prev_c = clearance(model_, a, human_);
    for (int k = 1; k <= steps; ++k) {
      const JointVector cur = a + (b - a) * (static_cast<double>(k) / steps);
      if (!model_.within_limits(cur)) return false;
      const double cur_c = clearance(model_, cur, human_);
      if (cur_c < required(cur)) return false;
      if (!certify(prev, prev_c, cur, cur_c, 0)) return false;
      prev = cur;
      prev_c = cur_c;
    }
    return true;
  }

 private:
  double motion_bound(const JointVector& a, const JointVector& b) const {
    double bound = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      bound += reach_[static_cast<std::size_t>(j)] * std::abs(b[j] - a[j]);
    }
    return bound;
  }

  bool certify(const JointVector& a, double ca, const JointVector& b,
               double cb, int depth) const {
    const double req = std::max(required(a), required(b));
    if (0.5 * (ca + cb - motion_bound(a, b)) >= req) return true;
    if (depth >= kMaxBisection) return false;
    const JointVector mid = 0.5 * (a + b);
    const double cm = clearance(model_, mid, human_);
    if (cm < req) return false;
    return certify(a, ca, mid, cm, depth + 1) &&
           certify(mid, cm, b, cb, depth + 1);
  }

  const RobotModel& model_;
  const HumanState& human_;
  const PlannerConfig& config_;
  std::vector<double> reach_;
  double d_min_;
  double target_;
  JointVector start_;
  JointVector goal_;
  double start_clearance_ = kInf;
  double goal_clearance_ = kInf;
};

int nearest(const std::vector<Node>& tree, const JointVector& q) {
  int best = 0;
  double best_d = kInf;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const double d = (tree[i].q - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

enum class Extend { kTrapped, kAdvanced, kReached };

Extend extend(std::vector<Node>& tree, const JointVector& target, double step,
              const PathValidator& validator) {
  const int near = nearest(tree, target);
  const JointVector from = tree[static_cast<std::size_t>(near)].q;
  const JointVector delta = target - from;
  const double dist = delta.norm();
  const bool reaches = dist <= step;
  JointVector q_new = reaches ? target : JointVector(from + delta * (step / dist));
  if (!validator.valid(q_new) || !validator.edge(from, q_new)) {
    return Extend::kTrapped;
  }
  tree.push_back({std::move(q_new), near});
  return reaches ? Extend::kReached : Extend::kAdvanced;
}

Extend connect(std::vector<Node>& tree, const JointVector& target, double step,
               const PathValidator& validator) {
  Extend status = Extend::kAdvanced;
  while (status == Extend::kAdvanced) {
    status = extend(tree, target, step, validator);
  }
  return status;
}

std::vector<JointVector> trace_back(const std::vector<Node>& tree, int idx) {
  std::vector<JointVector> out;
  while (idx >= 0) {
    out.push_back(tree[static_cast<std::size_t>(idx)].q);
    idx = tree[static_cast<std::size_t>(idx)].parent;
  }
  return out;
}

std::vector<JointVector> shortcut(std::vector<JointVector> path,
                                  const PathValidator& validator,
                                  std::mt19937_64& rng, int iterations) {
  // Greedy pass: jump to the farthest directly reachable waypoint.
  std::vector<JointVector> out = {path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t j = path.size() - 1;
    while (j > i + 1 && !validator.edge(path[i], path[j])) --j;
    out.push_back(path[j]);
    i = j;
  }
  for (int it = 0; it < iterations && out.size() > 2; ++it) {
    std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (a > b) std::swap(a, b);
    if (b < a + 2) continue;
    if (validator.edge(out[a], out[b])) {
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(a) + 1,
                out.begin() + static_cast<std::ptrdiff_t>(b));
    }
  }
  return out;
}

}  // namespace

void PlannerConfig::validate() const {
  if (horizon_len < 1) throw ConfigError("planner: horizon_len must be >= 1");
  if (!(horizon_spacing > 0.0)) {
    throw ConfigError("planner: horizon_spacing must be > 0");
  }
  if (!(rrt_step > 0.0)) throw ConfigError("planner: rrt_step must be > 0");
  if (!(max_plan_time > 0.0)) {
    throw ConfigError("planner: max_plan_time must be > 0");
  }
  if (max_iterations < 1) throw ConfigError("planner: max_iterations must be >= 1");
  if (!(goal_tolerance > 0.0)) {
    throw ConfigError("planner: goal_tolerance must be > 0");
  }
  if (!(cycle_rate > 0.0)) throw ConfigError("planner: cycle_rate must be > 0");
  if (plan_clearance < 0.0 || beta_clearance < 0.0 || escape_radius < 0.0 ||
      plan_latency < 0.0 || shortcut_iterations < 0) {
    throw ConfigError("planner: margins, radii and latency must be >= 0");
  }
}

double clearance(const RobotModel& model, const JointVector& q,
                 const HumanState& human) {
  if (human.links.empty()) return kInf;
  const KinematicState fk = forward_kinematics(model, q);
  return min_human_robot_distance(fk.capsules, human.links).result.distance;
}

bool check_feasible(const RobotModel& model, const JointVector& q,
                    const HumanState& human, const SafetyParams& params) {
  return clearance(model, q, human) >= params.min_distance;
}

PlanResult plan_path(const RobotModel& model, const HumanState& human,
                     const SafetyParams& params, const PlannerConfig& config,
                     const PlanRequest& request) {
  PlanResult result;
  if (!model.within_limits(request.start) || !model.within_limits(request.goal)) {
    result.failure = "start or goal outside joint limits";
    return result;
  }
  if ((request.goal - request.start).norm() <= 1e-12) {
    result.path = GeometricPath::from_waypoints({request.start});
    result.direct = true;
    return result;
  }
  const PathValidator validator(model, human, config, params.min_distance,
                                std::max(request.target_clearance,
                                         params.min_distance),
                                request.start, request.goal);
  if (validator.start_clearance() < params.min_distance) {
    result.failure = "start configuration closer than d_min to the human";
    return result;
  }
  if (validator.goal_clearance() < params.min_distance) {
    result.failure = "goal configuration closer than d_min to the human";
    return result;
  }
  if (validator.edge(request.start, request.goal)) {
    result.path = GeometricPath::from_waypoints({request.start, request.goal});
    result.direct = true;
    return result;
  }

  std::mt19937_64 rng(request.seed);
  const auto n = request.start.size();
  std::vector<std::uniform_real_distribution<double>> dists;
  for (Eigen::Index j = 0; j < n; ++j) {
    dists.emplace_back(model.q_min()[j], model.q_max()[j]);
  }
  std::vector<Node> start_tree = {{request.start, -1}};
  std::vector<Node> goal_tree = {{request.goal, -1}};
  std::vector<Node>* ta = &start_tree;
  std::vector<Node>* tb = &goal_tree;
  const double step = config.rrt_step;
  const auto t0 = std::chrono::steady_clock::now();

  for (int it = 0; it < config.max_iterations; ++it) {
    result.iterations = it + 1;
    if (config.enforce_wall_clock && (it & 15) == 0) {
      const std::chrono::duration<double> spent =
          std::chrono::steady_clock::now() - t0;
      if (spent.count() > config.max_plan_time) {
        result.failure = "wall-clock budget exhausted";
        return result;
      }
    }
    JointVector q_rand(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      q_rand[j] = dists[static_cast<std::size_t>(j)](rng);
    }
    if (extend(*ta, q_rand, step, validator) != Extend::kTrapped) {
      const JointVector q_new = ta->back().q;
      if (connect(*tb, q_new, step, validator) == Extend::kReached) {
        std::vector<JointVector> from_start =
            trace_back(start_tree, static_cast<int>(start_tree.size()) - 1);
        std::vector<JointVector> to_goal =
            trace_back(goal_tree, static_cast<int>(goal_tree.size()) - 1);
        std::reverse(from_start.begin(), from_start.end());
        // Both branches end at q_new; drop the duplicate.
        from_start.insert(from_start.end(), to_goal.begin() + 1, to_goal.end());
        std::vector<JointVector> path =
            shortcut(std::move(from_start), validator, rng,
                     config.shortcut_iterations);
        result.path = GeometricPath::from_waypoints(std::move(path));
        return result;
      }
    }
    std::swap(ta, tb);
  }
  result.failure = "iteration budget exhausted";
  return result;
}

std::optional<Trajectory> plan(const RobotModel& model,
                               const JointVector& q_start,
                               const JointVector& q_goal,
                               const HumanState& human,
                               const SafetyParams& params,
                               const PlannerConfig& config, std::uint64_t id) {
  PlanRequest req{q_start, q_goal,
                  params.min_distance + config.plan_clearance,
                  splitmix64(config.rng_seed ^ id)};
  PlanResult res = plan_path(model, human, params, config, req);
  if (!res.path) return std::nullopt;
  return make_trajectory(std::move(*res.path), model, id);
}

std::vector<HorizonSample> horizon(const Trajectory& traj, double s_c,
                                   const PlannerConfig& config) {
  std::vector<HorizonSample> out;
  const double len = traj.path.length();
  for (int k = 1; k <= config.horizon_len; ++k) {
    const double s = s_c + k * config.horizon_spacing;
    if (s >= len) {
      out.push_back({len, traj.path.position(len)});
      break;
    }
    out.push_back({s, traj.path.position(s)});
  }
  return out;
}

const char* phase_name(PlannerPhase phase) {
  switch (phase) {
    case PlannerPhase::kPlanning:
      return "planning";
    case PlannerPhase::kTracking:
      return "tracking";
    case PlannerPhase::kReplanning:
      return "replanning";
    case PlannerPhase::kDone:
      return "done";
  }
  return "unknown";
}

DynamicPlanner::DynamicPlanner(const RobotModel& model, SafetyParams params,
                               PlannerConfig config)
    : model_(model), params_(params), config_(config) {
  params_.validate();
  config_.validate();
}

void DynamicPlanner::start(const JointVector& q, const JointVector& goal) {
  if (!model_.within_limits(q) || !model_.within_limits(goal)) {
    throw PreconditionError("planner: start or goal outside joint limits");
  }
  q_c_ = q;
  goal_ = goal;
  phase_ = PlannerPhase::kPlanning;
  pending_.reset();
  backoff_ = 0.0;
  retry_at_ = 0.0;
}

std::uint64_t DynamicPlanner::next_seed() {
  return splitmix64(config_.rng_seed ^ splitmix64(++plan_calls_));
}

std::vector<PlannerEvent> DynamicPlanner::take_events() {
  std::vector<PlannerEvent> out;
  out.swap(events_);
  return out;
}

void DynamicPlanner::note_failure(double t, const std::string& why) {
  backoff_ = backoff_ == 0.0 ? 1.0 / config_.cycle_rate
                             : std::min(2.0 * backoff_, 1.0);
  retry_at_ = t + backoff_;
  PlannerEvent ev;
  ev.t = t;
  ev.name = "plan_failed";
  ev.duration = backoff_;
  ev.detail = why;
  emit(std::move(ev));
  if (phase_ == PlannerPhase::kReplanning) phase_ = PlannerPhase::kTracking;
}

void DynamicPlanner::publish(double t, Trajectory traj,
                             const PlannerFeedback& fb) {
  const bool merged = traj.parent_id.has_value() && current_ &&
                      traj.episode == current_->episode;
  if (merged && fb.trajectory_id != 0 && fb.s_c > traj.graft_s + 1e-9) {
    // The scaler moved past the graft point while we were planning.
    const auto& wps = traj.path.waypoints();
    const auto& arc = traj.path.arc_coords();
    std::size_t k = 0;
    while (k < wps.size() && arc[k] <= traj.graft_s + 1e-12) ++k;
    const JointVector q_now = current_->path.position(fb.s_c);
    bool regrafted = false;
    if (k < wps.size()) {
      const PathValidator validator(model_, last_human_, config_,
                                    params_.min_distance, params_.min_distance,
                                    q_now, wps.back());
      if (validator.start_clearance() >= params_.min_distance &&
          validator.edge(q_now, wps[k])) {
        std::vector<JointVector> fresh_wps = {q_now};
        fresh_wps.insert(fresh_wps.end(), wps.begin() + static_cast<std::ptrdiff_t>(k),
                         wps.end());
        Trajectory fresh = make_trajectory(
            GeometricPath::from_waypoints(std::move(fresh_wps)), model_, traj.id);
        traj = merge(*current_, fresh, fb.s_c, model_);
        regrafted = true;
      }
    }
    PlannerEvent ev;
    ev.t = t;
    ev.name = "graft_race";
    ev.trajectory_id = traj.id;
    ev.graft_s = fb.s_c;
    ev.detail = regrafted ? "regraft" : "discarded";
    emit(std::move(ev));
    if (!regrafted) {
      phase_ = PlannerPhase::kTracking;
      return;
    }
  }
  const double started = pending_ ? pending_started_ : t;
  current_ = std::make_shared<const Trajectory>(std::move(traj));
  ++published_;
  phase_ = PlannerPhase::kTracking;
  backoff_ = 0.0;
  retry_at_ = 0.0;
  PlannerEvent ev;
  ev.t = t;
  ev.name = "plan_done";
  ev.trajectory_id = current_->id;
  ev.graft_s = current_->graft_s;
  ev.duration = t - started;
  ev.detail = pending_reason_;
  emit(std::move(ev));
}

std::optional<Trajectory> DynamicPlanner::replan(double t, double graft_s,
                                                 const HumanState& human,
                                                 double target_clearance,
                                                 const std::string& reason,
                                                 int horizon_index) {
  (void)horizon_index;
  if (!current_) return std::nullopt;
  const JointVector q_rp = current_->path.position(graft_s);
  emit({t, "plan_started", 0, graft_s, horizon_index, 0.0, reason});
  PlanRequest req{q_rp, goal_, target_clearance, next_seed()};
  PlanResult res = plan_path(model_, human, params_, config_, req);
  if (!res.path) {
    note_failure(t, reason + ": " + res.failure);
    return std::nullopt;
  }
  Trajectory fresh = make_trajectory(std::move(*res.path), model_, next_id_++);
  Trajectory merged = merge(*current_, fresh, graft_s, model_);
  schedule(t, merged, reason);
  return merged;
}

void DynamicPlanner::schedule(double t, Trajectory traj,
                              const std::string& reason) {
  pending_reason_ = reason;
  if (config_.plan_latency > 0.0) {
    pending_ = std::move(traj);
    pending_started_ = t;
    pending_ready_ = t + config_.plan_latency;
    phase_ = current_ ? PlannerPhase::kReplanning : PlannerPhase::kPlanning;
    return;
  }
  publish(t, std::move(traj), last_fb_);
}

void DynamicPlanner::cycle(double t, const HumanState& human,
                           const PlannerFeedback& fb) {
  last_fb_ = fb;
  last_human_ = human;
  if (fb.q_c.size() == static_cast<Eigen::Index>(model_.dof())) q_c_ = fb.q_c;

  if (pending_) {
    if (t + 1e-12 < pending_ready_) return;
    Trajectory ready = std::move(*pending_);
    publish(t, std::move(ready), fb);
    pending_.reset();
    return;
  }
  if (phase_ == PlannerPhase::kDone) return;

  const bool fb_current = current_ && fb.trajectory_id != 0 &&
                          fb.episode == current_->episode;

  if (phase_ == PlannerPhase::kPlanning || !current_) {
    if (t < retry_at_) return;
    emit({t, "plan_started", 0, 0.0, -1, 0.0, "initial"});
    PlanRequest req{q_c_, goal_, params_.min_distance + config_.plan_clearance,
                    next_seed()};
    PlanResult res = plan_path(model_, human, params_, config_, req);
    if (!res.path) {
      note_failure(t, "initial: " + res.failure);
      return;
    }
    // A fresh plan starts a new episode, so the scaler restarts at s = 0.
    schedule(t, make_trajectory(std::move(*res.path), model_, next_id_++),
             "initial");
    return;
  }

  if (!fb_current) return;
  const double len = current_->path.length();
  if (fb.trajectory_id == current_->id && fb.s_c >= len - 1e-9 &&
      (fb.q_c - goal_).cwiseAbs().maxCoeff() <= config_.goal_tolerance) {
    phase_ = PlannerPhase::kDone;
    emit({t, "done", current_->id, fb.s_c, -1, 0.0, ""});
    return;
  }
  if (t < retry_at_) return;

  const std::vector<HorizonSample> h = horizon(*current_, fb.s_c, config_);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!check_feasible(model_, h[i].q, human, params_)) {
      const double graft = i == 0 ? fb.s_c : h[i - 1].s;
      PlannerEvent ev{t, "replan_infeasible", current_->id, graft,
                      static_cast<int>(i), 0.0, ""};
      emit(std::move(ev));
      replan(t, graft, human, params_.min_distance + config_.plan_clearance,
             "infeasible", static_cast<int>(i));
      return;
    }
  }
  if (fb.beta && config_.beta_enabled && fb.trajectory_id == current_->id) {
    emit({t, "replan_beta", current_->id, fb.s_c, -1, 0.0, ""});
    replan(t, fb.s_c, human, params_.min_distance + config_.beta_clearance,
           "beta", -1);
  }
}

}  // namespace hrc
