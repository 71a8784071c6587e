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

// Trajectory scaling layer.
//
// Each tick maximizes the path speed scale alpha in [0, 1] subject to
//   J_r,i(q) q'(s) sdot alpha <= V_max,i                 (per constrained link)
//   qdot_min <= q'(s) sdot alpha <= qdot_max
//   qddot_min <= (q'(s) sdot alpha - qdot) / T <= qddot_max
// Every constraint is linear in the scalar alpha, so the optimum is the
// smallest upper bound. The lower acceleration bounds are the only ones that
// can conflict with it; they are relaxed (harder braking) and reported.

#ifndef HRC_SCALER_H_
#define HRC_SCALER_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hrc/human_model.h"
#include "hrc/kinematics.h"
#include "hrc/safety_ssm.h"
#include "hrc/trajectory.h"

namespace hrc {

struct ScalerConfig {
  double tick_period = 0.02;  // control period, also the acceleration divisor
  double alpha_min = 0.2;     // replan-request threshold
  bool ee_only = false;       // constrain only the last link
  // The latched replan request releases once alpha exceeds
  // alpha_min + beta_release_margin on the same trajectory.
  double beta_release_margin = 0.05;

  void validate() const;
};

enum class BoundKind {
  kUnitCap,
  kSafety,
  kContact,
  kJointVelocity,
  kJointAcceleration,
};

const char* bound_kind_name(BoundKind kind);

// coef * alpha <= rhs. `index` is the link or joint the bound came from.
struct AlphaBound {
  double coef = 0.0;
  double rhs = 0.0;
  BoundKind kind = BoundKind::kUnitCap;
  std::size_t index = 0;
};

struct ActiveConstraint {
  BoundKind kind = BoundKind::kUnitCap;
  std::size_t index = 0;

  std::string to_string() const;
  friend bool operator==(const ActiveConstraint&,
                         const ActiveConstraint&) = default;
};

struct AlphaSolution {
  double alpha = 1.0;
  ActiveConstraint active;
  // A lower acceleration bound exceeded the chosen alpha (or a zero-speed
  // row demanded motion); the command brakes harder than qddot_min allows.
  bool decel_conflict = false;
};

AlphaSolution solve_alpha(std::span<const AlphaBound> bounds);

// Replan-request step rule.
inline bool beta_step(double alpha, double alpha_min) {
  return alpha <= alpha_min;
}

struct LinkSafety {
  bool constrained = false;
  bool has_human = false;
  bool contact = false;        // axes touch, direction undefined
  double separation = 0.0;     // surface distance to the nearest human link
  std::size_t human_index = 0;
  Vec3 direction = Vec3::Zero();  // unit, from the link toward the human
  Vec3 witness = Vec3::Zero();    // closest point on the link
  double human_speed = 0.0;       // v_h toward this link
  double v_max = 0.0;             // speed bound toward the human
  Eigen::RowVectorXd jr;          // modified Jacobian row at the witness
  double coef = 0.0;              // jr * q' * sdot
};

struct ConstraintSet {
  std::vector<AlphaBound> bounds;
  std::vector<LinkSafety> links;
};

// Evaluates every link against the human and assembles all alpha bounds.
// `qdot_actual` is the joint velocity currently executed.
ConstraintSet build_constraints(const RobotModel& model, const JointVector& q,
                                const JointVector& q_prime, double sdot,
                                const JointVector& qdot_actual,
                                const HumanState& human,
                                const SafetyParams& params,
                                const ScalerConfig& config);

struct ScalerOutput {
  double alpha = 1.0;
  bool beta = false;      // latched replan request sent to the planner
  bool beta_raw = false;  // beta_step(alpha, alpha_min)
  JointVector q;          // configuration at the start of the tick
  JointVector qdot_cmd;
  JointVector q_c_next;
  double s = 0.0;
  double s_next = 0.0;
  double sdot = 0.0;
  std::uint64_t trajectory_id = 0;
  bool has_trajectory = false;
  bool exhausted = false;
  std::vector<LinkSafety> links;
  ActiveConstraint active;
  bool decel_conflict = false;
};

struct ScalerState {
  double s = 0.0;
  JointVector qdot;
  std::uint64_t trajectory_id = 0;
  std::uint64_t episode = 0;
  bool has_trajectory = false;
  bool beta_latched = false;
};

class Scaler {
 public:
  Scaler(const RobotModel& model, SafetyParams params, ScalerConfig config);

  // One control tick. `traj` may be null (nothing to execute yet), in which
  // case the robot is held at `hold_q`.
  ScalerOutput tick(const std::shared_ptr<const Trajectory>& traj,
                    const HumanState& human, const JointVector& hold_q);

  const ScalerState& state() const { return state_; }
  ScalerState& mutable_state() { return state_; }
  const ScalerConfig& config() const { return config_; }
  const SafetyParams& params() const { return params_; }
  const RobotModel& model() const { return model_; }

 private:
  const RobotModel& model_;
  SafetyParams params_;
  ScalerConfig config_;
  ScalerState state_;
};

}  // namespace hrc

#endif  // HRC_SCALER_H_
