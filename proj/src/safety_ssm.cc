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

#include "hrc/safety_ssm.h"

#include <algorithm>
#include <cmath>

#include "hrc/error.h"

namespace hrc {

void SafetyParams::validate() const {
  const double fields[] = {stopping_time,     reaction_time,
                           intrusion_distance, human_uncertainty,
                           robot_uncertainty, max_deceleration, min_distance};
  for (double v : fields) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("safety parameters must be finite and nonnegative");
    }
  }
  if (stopping_time + reaction_time <= 0.0) {
    throw ConfigError("safety parameters: T_s + T_r must be positive");
  }
}

double human_term(const SafetyParams& p, double human_speed) {
  return human_speed * (p.stopping_time + p.reaction_time);
}

double reaction_term(const SafetyParams& p, double robot_speed) {
  return robot_speed * p.reaction_time;
}

double stopping_term(const SafetyParams& p, double robot_speed) {
  return robot_speed * p.stopping_time +
         p.max_deceleration * p.stopping_time * p.stopping_time / 2.0;
}

double protective_distance(const SafetyParams& p, double human_speed,
                           double robot_speed) {
  return human_term(p, human_speed) + reaction_term(p, robot_speed) +
         stopping_term(p, robot_speed) + p.intrusion_distance +
         p.human_uncertainty + p.robot_uncertainty;
}

double raw_speed_limit(const SafetyParams& p, const SsmInputs& in) {
  const double horizon = p.stopping_time + p.reaction_time;
  if (horizon == 0.0) {
    throw ConfigError("safety parameters: T_s + T_r must be positive");
  }
  return (in.separation - in.human_speed * horizon - p.intrusion_distance -
          p.human_uncertainty - p.robot_uncertainty) /
             horizon -
         p.max_deceleration * p.stopping_time * p.stopping_time /
             (2.0 * horizon);
}

double max_robot_speed(const SafetyParams& p, const SsmInputs& in) {
  return std::max(0.0, raw_speed_limit(p, in));
}

double floor_speed_limit(const SafetyParams& p, double separation, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("floor_speed_limit: dt must be > 0");
  return std::max(0.0, (separation - p.min_distance) / dt);
}

double link_speed_limit(const SafetyParams& p, const SsmInputs& in, double dt) {
  return std::min(max_robot_speed(p, in),
                  floor_speed_limit(p, in.separation, dt));
}

}  // namespace hrc
