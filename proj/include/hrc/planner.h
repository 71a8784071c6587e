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

// Trajectory planning layer.
//
// The planner produces maximum-speed trajectories that keep every robot link
// at least d_min away from the human snapshot taken at call time, then keeps
// them feasible: each cycle it checks a horizon of upcoming configurations,
// replans from the last feasible sample when one is infeasible, and replans
// from the current configuration when the scaler requests it.

#ifndef HRC_PLANNER_H_
#define HRC_PLANNER_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hrc/human_model.h"
#include "hrc/kinematics.h"
#include "hrc/safety_ssm.h"
#include "hrc/trajectory.h"

namespace hrc {

struct PlannerConfig {
  int horizon_len = 20;           // configurations checked per cycle
  double horizon_spacing = 0.05;  // abscissa step between them [rad]
  // Tree extension length; each edge is still checked at horizon_spacing.
  double rrt_step = 0.3;  // [rad]
  std::uint64_t rng_seed = 1;
  double max_plan_time = 1.0;     // wall-clock budget, enforced if requested
  bool enforce_wall_clock = false;
  int max_iterations = 4000;      // deterministic budget per plan attempt
  double goal_tolerance = 1e-3;   // per joint [rad]
  double cycle_rate = 10.0;       // [Hz]
  // Extra clearance over d_min demanded from new paths, and from paths
  // planned on a replan request from the scaler.
  double plan_clearance = 0.20;
  double beta_clearance = 0.30;
  // Within this joint-space radius of the start and goal, paths only need
  // d_min.
  double escape_radius = 0.6;
  int shortcut_iterations = 60;
  // Simulated planning time in lockstep mode [s].
  double plan_latency = 0.0;
  bool beta_enabled = true;

  void validate() const;
};

// Minimum surface distance between the robot at q and the human, +inf when
// the human has no links.
double clearance(const RobotModel& model, const JointVector& q,
                 const HumanState& human);

// True iff every robot link is at least d_min from every human link.
bool check_feasible(const RobotModel& model, const JointVector& q,
                    const HumanState& human, const SafetyParams& params);

struct PlanRequest {
  JointVector start;
  JointVector goal;
  double target_clearance = 0.0;  // surface distance demanded along the path
  std::uint64_t seed = 0;
};

struct PlanResult {
  std::optional<GeometricPath> path;
  int iterations = 0;
  bool direct = false;
  std::string failure;
};

// Bidirectional RRT (RRT-Connect) in joint space with a direct connection
// attempt first and a shortcut pass. Edges are validated at horizon_spacing
// and certified between samples with a reach-based Lipschitz bound, so the
// continuous path keeps the demanded clearance.
PlanResult plan_path(const RobotModel& model, const HumanState& human,
                     const SafetyParams& params, const PlannerConfig& config,
                     const PlanRequest& request);

// Convenience wrapper: plans with d_min + plan_clearance and time
// parameterizes the result.
std::optional<Trajectory> plan(const RobotModel& model,
                               const JointVector& q_start,
                               const JointVector& q_goal,
                               const HumanState& human,
                               const SafetyParams& params,
                               const PlannerConfig& config, std::uint64_t id);

struct HorizonSample {
  double s = 0.0;
  JointVector q;
};

// Samples at s_c + k * spacing for k = 1..n, truncated at the path end
// (which is included once).
std::vector<HorizonSample> horizon(const Trajectory& traj, double s_c,
                                   const PlannerConfig& config);

enum class PlannerPhase { kPlanning, kTracking, kReplanning, kDone };
const char* phase_name(PlannerPhase phase);

struct PlannerEvent {
  double t = 0.0;
  std::string name;  // plan_started, plan_done, replan_infeasible, ...
  std::uint64_t trajectory_id = 0;
  double graft_s = 0.0;
  int horizon_index = -1;
  double duration = 0.0;
  std::string detail;
};

// Scaler feedback read by the planner each cycle.
struct PlannerFeedback {
  double s_c = 0.0;
  JointVector q_c;
  bool beta = false;
  std::uint64_t trajectory_id = 0;
  std::uint64_t episode = 0;
};

class DynamicPlanner {
 public:
  DynamicPlanner(const RobotModel& model, SafetyParams params,
                 PlannerConfig config);

  // Starts a new planning episode toward `goal` from `q`.
  void start(const JointVector& q, const JointVector& goal);

  // One iteration of the monitoring loop at time t.
  void cycle(double t, const HumanState& human, const PlannerFeedback& fb);

  // Replan from `graft_s` on the current trajectory. Returns the merged
  // trajectory when planning succeeded (it may be published later when a
  // planning latency is simulated).
  std::optional<Trajectory> replan(double t, double graft_s,
                                   const HumanState& human,
                                   double target_clearance,
                                   const std::string& reason,
                                   int horizon_index);

  std::shared_ptr<const Trajectory> current() const { return current_; }
  PlannerPhase phase() const { return phase_; }
  const JointVector& goal() const { return goal_; }
  const JointVector& q_c() const { return q_c_; }
  bool busy(double t) const { return pending_ && t < pending_ready_; }
  std::vector<PlannerEvent> take_events();
  const PlannerConfig& config() const { return config_; }

  // Count of published trajectories so far.
  std::uint64_t published() const { return published_; }

 private:
  void publish(double t, Trajectory traj, const PlannerFeedback& fb);
  void schedule(double t, Trajectory traj, const std::string& reason);
  void emit(PlannerEvent ev) { events_.push_back(std::move(ev)); }
  std::uint64_t next_seed();
  void note_failure(double t, const std::string& why);

  const RobotModel& model_;
  SafetyParams params_;
  PlannerConfig config_;
  std::shared_ptr<const Trajectory> current_;
  PlannerPhase phase_ = PlannerPhase::kPlanning;
  JointVector goal_;
  JointVector q_c_;
  std::uint64_t next_id_ = 1;
  std::uint64_t plan_calls_ = 0;
  std::uint64_t published_ = 0;
  std::vector<PlannerEvent> events_;

  std::optional<Trajectory> pending_;
  double pending_ready_ = 0.0;
  double pending_started_ = 0.0;
  std::string pending_reason_;

  double backoff_ = 0.0;
  double retry_at_ = 0.0;

  PlannerFeedback last_fb_;
  HumanState last_human_;
};

}  // namespace hrc

#endif  // HRC_PLANNER_H_
