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

#include "hrc/scaler.h"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>

#include "hrc/error.h"
#include "hrc/geometry.h"

namespace hrc {
namespace {

// Steps landing this close to a segment boundary snap onto it.
constexpr double kSnapTolerance = 1e-12;
constexpr double kAccelerationSlack = 1e-12;

LinkSafety evaluate_link(const RobotModel& model, const KinematicState& fk,
                         std::size_t link, const HumanState& human,
                         const SafetyParams& params, double dt) {
  LinkSafety ls;
  ls.jr = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(model.dof()));
  if (human.links.empty()) return ls;
  ls.has_human = true;
  const PairDistance nearest = min_human_robot_distance(
      std::span<const Capsule>(&fk.capsules[link], 1), human.links);
  const DistanceResult& d = nearest.result;
  ls.separation = d.distance;
  ls.human_index = nearest.human_index;
  ls.witness = d.witness_a;
  if (d.degenerate) {
    ls.contact = true;
    ls.v_max = 0.0;
    return ls;
  }
  ls.direction = d.direction;
  const Vec3 human_vel = human.point_velocity(nearest.human_index, d.param_b);
  ls.human_speed = -ls.direction.dot(human_vel);
  if (human.stale) ls.human_speed = std::max(0.0, ls.human_speed);
  ls.v_max = link_speed_limit(params, {ls.separation, ls.human_speed}, dt);
  ls.jr = modified_jacobian_at(model, fk, link, d.witness_a, ls.direction);
  return ls;
}

}  // namespace

void ScalerConfig::validate() const {
  if (!(tick_period > 0.0)) throw ConfigError("scaler: tick_period must be > 0");
  if (!(alpha_min > 0.0 && alpha_min < 1.0)) {
    throw ConfigError("scaler: alpha_min must lie in (0, 1)");
  }
  if (!(beta_release_margin >= 0.0)) {
    throw ConfigError("scaler: beta_release_margin must be >= 0");
  }
}

const char* bound_kind_name(BoundKind kind) {
  switch (kind) {
    case BoundKind::kUnitCap:
      return "unit";
    case BoundKind::kSafety:
      return "safety";
    case BoundKind::kContact:
      return "contact";
    case BoundKind::kJointVelocity:
      return "joint_velocity";
    case BoundKind::kJointAcceleration:
      return "joint_acceleration";
  }
  return "unknown";
}

std::string ActiveConstraint::to_string() const {
  if (kind == BoundKind::kUnitCap) return "unit";
  return std::string(bound_kind_name(kind)) + ":" + std::to_string(index);
}

AlphaSolution solve_alpha(std::span<const AlphaBound> bounds) {
  AlphaSolution sol;
  double upper = 1.0;
  double lower = 0.0;
  bool infeasible_row = false;
  for (const AlphaBound& b : bounds) {
    if (b.coef > 0.0) {
      const double ub = b.rhs / b.coef;
      if (ub < upper) {
        upper = ub;
        sol.active = {b.kind, b.index};
      }
    } else if (b.coef < 0.0) {
      lower = std::max(lower, b.rhs / b.coef);
    } else if (b.rhs < 0.0) {
      infeasible_row = true;
    }
  }
  sol.alpha = std::clamp(upper, 0.0, 1.0);
  sol.decel_conflict = infeasible_row || lower > sol.alpha || upper < 0.0;
  return sol;
}

ConstraintSet build_constraints(const RobotModel& model, const JointVector& q,
                                const JointVector& q_prime, double sdot,
                                const JointVector& qdot_actual,
                                const HumanState& human,
                                const SafetyParams& params,
                                const ScalerConfig& config) {
  if (std::abs(q_prime.norm() - 1.0) > 1e-6 && q_prime.norm() != 0.0) {
    throw PreconditionError("build_constraints: tangent must be unit length");
  }
  if (!(sdot >= 0.0)) {
    throw PreconditionError("build_constraints: sdot must be >= 0");
  }
  ConstraintSet cs;
  const std::size_t n = model.dof();
  const KinematicState fk = forward_kinematics(model, q);
  cs.links.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LinkSafety ls = evaluate_link(model, fk, i, human, params, config.tick_period);
    ls.constrained = !config.ee_only || i + 1 == n;
    ls.coef = ls.jr.dot(q_prime) * sdot;
    if (ls.constrained && ls.has_human) {
      if (ls.contact) {
        cs.bounds.push_back({1.0, 0.0, BoundKind::kContact, i});
      } else {
        cs.bounds.push_back({ls.coef, ls.v_max, BoundKind::kSafety, i});
      }
    }
    cs.links.push_back(std::move(ls));
  }
  const double T = config.tick_period;
  for (std::size_t j = 0; j < n; ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    const double c = q_prime[k] * sdot;
    cs.bounds.push_back({c, model.qdot_max()[k], BoundKind::kJointVelocity, j});
    cs.bounds.push_back(
        {-c, -model.qdot_min()[k], BoundKind::kJointVelocity, j});
    // The nominal law already respects the acceleration limit; the slack
    // keeps rounding in the previous command from scaling it below one.
    const double v = qdot_actual[k];
    const double slack = kAccelerationSlack * std::max(1.0, std::abs(v));
    cs.bounds.push_back({c, v + T * model.qddot_max()[k] + slack,
                         BoundKind::kJointAcceleration, j});
    cs.bounds.push_back({-c, -(v + T * model.qddot_min()[k]) + slack,
                         BoundKind::kJointAcceleration, j});
  }
  return cs;
}

Scaler::Scaler(const RobotModel& model, SafetyParams params,
               ScalerConfig config)
    : model_(model), params_(params), config_(config) {
  params_.validate();
  config_.validate();
  state_.qdot = JointVector::Zero(static_cast<Eigen::Index>(model_.dof()));
}

ScalerOutput Scaler::tick(const std::shared_ptr<const Trajectory>& traj,
                          const HumanState& human, const JointVector& hold_q) {
  const auto n = static_cast<Eigen::Index>(model_.dof());
  const double dt = config_.tick_period;
  ScalerOutput out;

  if (traj) {
    if (!state_.has_trajectory || traj->id != state_.trajectory_id) {
      // A merged successor keeps the abscissa; anything else restarts.
      if (!state_.has_trajectory || traj->episode != state_.episode) {
        state_.s = 0.0;
      }
      state_.s = std::clamp(state_.s, 0.0, traj->path.length());
      state_.trajectory_id = traj->id;
      state_.episode = traj->episode;
      state_.has_trajectory = true;
      state_.beta_latched = false;
    }
  }

  out.has_trajectory = static_cast<bool>(traj);
  out.trajectory_id = state_.trajectory_id;
  out.s = state_.s;
  const bool exhausted = !traj || state_.s >= traj->path.length();
  if (exhausted) {
    out.q = traj ? traj->path.position(state_.s) : hold_q;
    const JointVector zero = JointVector::Zero(n);
    ConstraintSet cs = build_constraints(model_, out.q, zero, 0.0, state_.qdot,
                                         human, params_, config_);
    out.links = std::move(cs.links);
    out.exhausted = true;
    out.alpha = 1.0;
    out.qdot_cmd = zero;
    out.q_c_next = out.q;
    out.s_next = state_.s;
    state_.beta_latched = false;
    state_.qdot = zero;
    return out;
  }

  const Trajectory& tr = *traj;
  out.q = tr.path.position(state_.s);
  const JointVector tangent = tr.path.tangent(state_.s);
  out.sdot = tr.law.step_speed(state_.s, dt);
  ConstraintSet cs = build_constraints(model_, out.q, tangent, out.sdot,
                                       state_.qdot, human, params_, config_);
  const AlphaSolution sol = solve_alpha(cs.bounds);
  out.alpha = sol.alpha;
  out.active = sol.active;
  out.decel_conflict = sol.decel_conflict;
  out.links = std::move(cs.links);

  out.qdot_cmd.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.qdot_cmd[j] = std::clamp(tangent[j] * out.sdot * out.alpha,
                                 model_.qdot_min()[j], model_.qdot_max()[j]);
  }

  double s_next = state_.s + out.sdot * out.alpha * dt;
  const double boundary = tr.law.segment_end(state_.s);
  if (std::abs(s_next - boundary) <= kSnapTolerance * std::max(1.0, boundary)) {
    s_next = boundary;
  }
  s_next = std::min(s_next, tr.path.length());
  out.s_next = s_next;
  out.q_c_next = tr.path.position(s_next);

  out.beta_raw = beta_step(out.alpha, config_.alpha_min);
  state_.beta_latched =
      out.beta_raw ||
      (state_.beta_latched &&
       out.alpha <= config_.alpha_min + config_.beta_release_margin);
  out.beta = state_.beta_latched;

  state_.s = s_next;
  state_.qdot = out.qdot_cmd;
  return out;
}

}  // namespace hrc
