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

// Randomized inputs shared by the unit and acceptance tests.

#ifndef HRC_TESTS_FIXTURES_H_
#define HRC_TESTS_FIXTURES_H_

#include <random>
#include <vector>

#include "hrc/kinematics.h"

namespace hrc::fixture {

inline Vec3 random_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Vec3(u(rng), u(rng), u(rng));
}

// Serial chain with random offsets, axes and capsules.
inline RobotModel random_model(std::mt19937_64& rng, int dof) {
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  std::uniform_real_distribution<double> rad(0.0, 0.1);
  std::vector<JointSpec> joints;
  for (int i = 0; i < dof; ++i) {
    JointSpec j;
    j.origin = Eigen::Isometry3d::Identity();
    j.origin.translation() = random_vec(rng, -0.4, 0.4);
    j.origin.rotate(Eigen::AngleAxisd(ang(rng), random_vec(rng, -1, 1).normalized()));
    j.axis = random_vec(rng, -1, 1);
    j.capsule = {{random_vec(rng, -0.2, 0.2), random_vec(rng, -0.4, 0.4)}, rad(rng)};
    joints.push_back(j);
  }
  return RobotModel(std::move(joints), "random");
}

inline JointVector random_q(std::mt19937_64& rng, const RobotModel& model) {
  JointVector q(static_cast<Eigen::Index>(model.dof()));
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    std::uniform_real_distribution<double> u(model.q_min()[k], model.q_max()[k]);
    q[k] = u(rng);
  }
  return q;
}

}  // namespace hrc::fixture

#endif  // HRC_TESTS_FIXTURES_H_
