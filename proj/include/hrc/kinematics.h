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

// Serial revolute chains: forward kinematics, per-link Jacobians and the
// scalar "velocity toward the human" row used by the scaler.
//
// Link indices are zero-based. Link i is rigidly attached to the frame of
// joint i and moves with joints 0..i, so its Jacobian has i + 1 columns.

#ifndef HRC_KINEMATICS_H_
#define HRC_KINEMATICS_H_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "hrc/geometry.h"

namespace hrc {

using JointVector = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

struct JointSpec {
  // Fixed transform from the previous joint frame (or the base) to this
  // joint's frame at q = 0. The joint rotates about `axis` after it.
  Eigen::Isometry3d origin = Eigen::Isometry3d::Identity();
  Vec3 axis = Vec3::UnitZ();
  double q_min = -2.0 * 3.141592653589793;
  double q_max = 2.0 * 3.141592653589793;
  double qdot_min = -1.0;
  double qdot_max = 1.0;
  double qddot_min = -1.0;
  double qddot_max = 1.0;
  // Link capsule in the joint frame. `capsule.axis.b` is the distal end and
  // serves as the link's reference point for link_jacobian().
  Capsule capsule;
};

class RobotModel {
 public:
  // Throws ConfigError when a limit or axis is malformed.
  explicit RobotModel(std::vector<JointSpec> joints, std::string name = "",
                      Eigen::Isometry3d base = Eigen::Isometry3d::Identity());

  std::size_t dof() const { return joints_.size(); }
  const std::string& name() const { return name_; }
  const JointSpec& joint(std::size_t i) const { return joints_.at(i); }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const Eigen::Isometry3d& base() const { return base_; }

  const JointVector& q_min() const { return q_min_; }
  const JointVector& q_max() const { return q_max_; }
  const JointVector& qdot_min() const { return qdot_min_; }
  const JointVector& qdot_max() const { return qdot_max_; }
  const JointVector& qddot_min() const { return qddot_min_; }
  const JointVector& qddot_max() const { return qddot_max_; }

  bool within_limits(const JointVector& q, double tolerance = 1e-9) const;

 private:
  std::vector<JointSpec> joints_;
  std::string name_;
  Eigen::Isometry3d base_;
  JointVector q_min_, q_max_, qdot_min_, qdot_max_, qddot_min_, qddot_max_;
};

struct KinematicState {
  std::vector<Eigen::Isometry3d> frames;  // world pose of each joint frame
  std::vector<Capsule> capsules;          // world-frame link capsules
};

KinematicState forward_kinematics(const RobotModel& model, const JointVector& q);

struct LinkJacobian {
  std::size_t link_index = 0;
  Jacobian matrix;  // 6 x (link_index + 1): linear rows then angular rows
};

// Geometric Jacobian of the point `point` (world frame) rigidly attached to
// link `link`, from an already computed kinematic state.
Jacobian point_jacobian(const RobotModel& model, const KinematicState& state,
                        std::size_t link, const Vec3& point);

// Jacobian of the link's distal capsule endpoint. Throws PreconditionError
// when `link` >= dof.
LinkJacobian link_jacobian(const RobotModel& model, const JointVector& q,
                           std::size_t link);

// n^T [J_link 0]: a 1 x dof row giving the velocity of the link's reference
// point along `toward_human`. Only the linear rows contribute; the trailing
// dof - link - 1 entries are structural zeros. Throws PreconditionError if
// `toward_human` is not unit length within 1e-6.
Eigen::RowVectorXd modified_jacobian(const RobotModel& model,
                                     const JointVector& q, std::size_t link,
                                     const Vec3& toward_human);

// Same row evaluated at an arbitrary point on the link.
Eigen::RowVectorXd modified_jacobian_at(const RobotModel& model,
                                        const KinematicState& state,
                                        std::size_t link, const Vec3& point,
                                        const Vec3& toward_human);

}  // namespace hrc

#endif  // HRC_KINEMATICS_H_
