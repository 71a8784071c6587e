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

#include "hrc/robot_presets.h"

#include <vector>

namespace hrc {
namespace {

JointSpec revolute(const Vec3& offset, const Vec3& axis, const Vec3& cap_a,
                   const Vec3& cap_b, double radius) {
  JointSpec j;
  j.origin = Eigen::Isometry3d::Identity();
  j.origin.translation() = offset;
  j.axis = axis;
  j.capsule = {{cap_a, cap_b}, radius};
  return j;
}

}  // namespace

RobotModel planar_2r(double l1, double l2, double radius) {
  std::vector<JointSpec> joints = {
      revolute(Vec3::Zero(), Vec3::UnitZ(), Vec3::Zero(), {l1, 0, 0}, radius),
      revolute({l1, 0, 0}, Vec3::UnitZ(), Vec3::Zero(), {l2, 0, 0}, radius),
  };
  return RobotModel(std::move(joints), "planar2r");
}

RobotModel prbt6() {
  // Shoulder and elbow pitch axes are opposed so that the reference pose
  // {1.57, -0.4, 1.17, 0, 1.57, 0} holds the forearm level and the flange
  // pointing down.
  std::vector<JointSpec> joints = {
      revolute({0, 0, 0.35}, Vec3::UnitZ(), {0, 0, -0.30}, {0, 0, 0}, 0.08),
      revolute({0, 0, 0}, -Vec3::UnitY(), {0, 0, 0}, {0, 0, 0.35}, 0.06),
      revolute({0, 0, 0.35}, Vec3::UnitY(), {0, 0, 0}, {0, 0, 0.307}, 0.05),
      revolute({0, 0, 0.307}, Vec3::UnitZ(), {0, 0, 0}, {0, 0, 0.0}, 0.045),
      revolute({0, 0, 0}, Vec3::UnitY(), {0, 0, 0}, {0, 0, 0.084}, 0.04),
      revolute({0, 0, 0.084}, Vec3::UnitZ(), {0, 0, 0}, {0, 0, 0.10}, 0.03),
  };
  const double q_lim[6] = {2.97, 2.09, 2.35, 2.97, 2.48, 3.12};
  const double v_lim[6] = {1.0, 1.0, 1.0, 1.5, 1.5, 1.5};
  for (std::size_t i = 0; i < joints.size(); ++i) {
    joints[i].q_min = -q_lim[i];
    joints[i].q_max = q_lim[i];
    joints[i].qdot_min = -v_lim[i];
    joints[i].qdot_max = v_lim[i];
    joints[i].qddot_min = -3.0;
    joints[i].qddot_max = 3.0;
  }
  return RobotModel(std::move(joints), "prbt6");
}

std::optional<RobotModel> robot_preset(std::string_view name) {
  if (name == "planar2r") return planar_2r();
  if (name == "prbt6") return prbt6();
  return std::nullopt;
}

}  // namespace hrc
