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

#ifndef HRC_ROBOT_PRESETS_H_
#define HRC_ROBOT_PRESETS_H_

#include <optional>
#include <string_view>

#include "hrc/kinematics.h"

namespace hrc {

// Planar 2R arm in the xy-plane, both joints about +z. Link i is a capsule
// of length l_i along the local x axis.
RobotModel planar_2r(double l1 = 1.0, double l2 = 1.0, double radius = 0.0);

// 6-DoF industrial arm with PRBT-like proportions: base yaw, shoulder and
// elbow pitch, forearm roll, wrist pitch, flange roll. At q = 0 the arm
// points straight up.
RobotModel prbt6();

// Looks up "planar2r" or "prbt6".
std::optional<RobotModel> robot_preset(std::string_view name);

}  // namespace hrc

#endif  // HRC_ROBOT_PRESETS_H_
