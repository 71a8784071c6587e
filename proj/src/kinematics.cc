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

#include "hrc/kinematics.h"

#include <cmath>
#include <string>
#include <utility>

#include "hrc/error.h"

namespace hrc {
namespace {

void require(bool ok, std::size_t joint, const char* what) {
  if (!ok) {
    throw ConfigError("robot joint " + std::to_string(joint) + ": " + what);
  }
}

}  // namespace

RobotModel::RobotModel(std::vector<JointSpec> joints, std::string name,
                       Eigen::Isometry3d base)
    : joints_(std::move(joints)), name_(std::move(name)), base_(base) {
  if (joints_.empty()) throw ConfigError("robot model has no joints");
  const auto n = static_cast<Eigen::Index>(joints_.size());
  q_min_.resize(n);
  q_max_.resize(n);
  qdot_min_.resize(n);
  qdot_max_.resize(n);
  qddot_min_.resize(n);
  qddot_max_.resize(n);
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    JointSpec& j = joints_[i];
    const double axis_norm = j.axis.norm();
    require(std::isfinite(axis_norm) && axis_norm > 1e-9, i,
            "axis must be a nonzero finite vector");
    j.axis /= axis_norm;
    require(j.q_min < j.q_max, i, "q_min must be below q_max");
    require(j.qdot_min < 0.0 && j.qdot_max > 0.0, i,
            "velocity limits must satisfy qdot_min < 0 < qdot_max");
    require(j.qddot_min < 0.0 && j.qddot_max > 0.0, i,
            "acceleration limits must satisfy qddot_min < 0 < qddot_max");
    require(j.capsule.radius >= 0.0, i, "capsule radius must be >= 0");
    require(j.capsule.axis.a.allFinite() && j.capsule.axis.b.allFinite() &&
                j.origin.matrix().allFinite(),
            i, "non-finite geometry");
    const auto k = static_cast<Eigen::Index>(i);
    q_min_[k] = j.q_min;
    q_max_[k] = j.q_max;
    qdot_min_[k] = j.qdot_min;
    qdot_max_[k] = j.qdot_max;
    qddot_min_[k] = j.qddot_min;
    qddot_max_[k] = j.qddot_max;
  }
}

bool RobotModel::within_limits(const JointVector& q, double tolerance) const {
  if (q.size() != static_cast<Eigen::Index>(dof()) || !q.allFinite()) {
    return false;
  }
  return ((q.array() >= q_min_.array() - tolerance) &&
          (q.array() <= q_max_.array() + tolerance))
      .all();
}

KinematicState forward_kinematics(const RobotModel& model,
                                  const JointVector& q) {
  if (q.size() != static_cast<Eigen::Index>(model.dof())) {
    throw PreconditionError("forward_kinematics: configuration has " +
                            std::to_string(q.size()) + " entries, model has " +
                            std::to_string(model.dof()) + " joints");
  }
  KinematicState state;
  state.frames.reserve(model.dof());
  state.capsules.reserve(model.dof());
  Eigen::Isometry3d pose = model.base();
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const JointSpec& j = model.joint(i);
    pose = pose * j.origin *
           Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis);
    state.frames.push_back(pose);
    state.capsules.push_back(
        {{pose * j.capsule.axis.a, pose * j.capsule.axis.b}, j.capsule.radius});
  }
  return state;
}

Jacobian point_jacobian(const RobotModel& model, const KinematicState& state,
                        std::size_t link, const Vec3& point) {
  if (link >= model.dof()) {
    throw PreconditionError("link index " + std::to_string(link) +
                            " out of range for " + std::to_string(model.dof()) +
                            "-joint model");
  }
  Jacobian jac(6, static_cast<Eigen::Index>(link + 1));
  for (std::size_t k = 0; k <= link; ++k) {
    const Eigen::Isometry3d& frame = state.frames[k];
    const Vec3 z = frame.linear() * model.joint(k).axis;
    const Vec3 origin = frame.translation();
    const auto col = static_cast<Eigen::Index>(k);
    jac.block<3, 1>(0, col) = z.cross(point - origin);
    jac.block<3, 1>(3, col) = z;
  }
  return jac;
}

LinkJacobian link_jacobian(const RobotModel& model, const JointVector& q,
                           std::size_t link) {
  if (link >= model.dof()) {
    throw PreconditionError("link index " + std::to_string(link) +
                            " out of range for " + std::to_string(model.dof()) +
                            "-joint model");
  }
  const KinematicState state = forward_kinematics(model, q);
  return {link,
          point_jacobian(model, state, link, state.capsules[link].axis.b)};
}

Eigen::RowVectorXd modified_jacobian_at(const RobotModel& model,
                                        const KinematicState& state,
                                        std::size_t link, const Vec3& point,
                                        const Vec3& toward_human) {
  if (std::abs(toward_human.norm() - 1.0) > 1e-6) {
    throw PreconditionError("modified_jacobian: direction is not a unit vector");
  }
  const Jacobian jac = point_jacobian(model, state, link, point);
  Eigen::RowVectorXd row =
      Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(model.dof()));
  row.head(jac.cols()) = toward_human.transpose() * jac.topRows<3>();
  return row;
}

Eigen::RowVectorXd modified_jacobian(const RobotModel& model,
                                     const JointVector& q, std::size_t link,
                                     const Vec3& toward_human) {
  if (link >= model.dof()) {
    throw PreconditionError("link index " + std::to_string(link) +
                            " out of range for " + std::to_string(model.dof()) +
                            "-joint model");
  }
  const KinematicState state = forward_kinematics(model, q);
  return modified_jacobian_at(model, state, link, state.capsules[link].axis.b,
                              toward_human);
}

}  // namespace hrc
