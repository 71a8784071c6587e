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

// ISO/TS 15066 speed and separation monitoring.
//
// The protective separation distance is
//   S_p = S_h + S_r + S_s + C + Z_d + Z_r
// with S_h = v_h (T_s + T_r), S_r = v_r T_r, S_s = v_r T_s + a_max T_s^2 / 2.
// Solving for v_r at the measured separation gives the largest robot speed
// toward the human that keeps the measured separation protective.

#ifndef HRC_SAFETY_SSM_H_
#define HRC_SAFETY_SSM_H_

namespace hrc {

struct SafetyParams {
  double stopping_time = 0.3;       // T_s [s]
  double reaction_time = 0.1;       // T_r [s]
  double intrusion_distance = 0.05; // C [m]
  double human_uncertainty = 0.05;  // Z_d [m]
  double robot_uncertainty = 0.01;  // Z_r [m]
  double max_deceleration = 2.0;    // a_max [m/s^2]
  double min_distance = 0.05;       // d_min [m]

  // Throws ConfigError on a negative entry or T_s + T_r == 0.
  void validate() const;
};

struct SsmInputs {
  double separation = 0.0;  // measured S_p(t0) [m]
  double human_speed = 0.0; // v_h toward the robot [m/s], > 0 approaching
};

// Human contribution S_h; negative when the human recedes.
double human_term(const SafetyParams& p, double human_speed);
// Reaction contribution S_r.
double reaction_term(const SafetyParams& p, double robot_speed);
// Stopping contribution S_s.
double stopping_term(const SafetyParams& p, double robot_speed);
// Sum of all terms for a given robot speed, i.e. the protective distance.
double protective_distance(const SafetyParams& p, double human_speed,
                           double robot_speed);

// Unclamped speed bound; negative when the separation is already below the
// protective distance of a stopped robot. Throws ConfigError if
// T_s + T_r == 0.
double raw_speed_limit(const SafetyParams& p, const SsmInputs& in);

// max(0, raw_speed_limit).
double max_robot_speed(const SafetyParams& p, const SsmInputs& in);

// Approach speed that keeps the separation at or above d_min over one
// control period: max(0, (separation - d_min) / dt).
double floor_speed_limit(const SafetyParams& p, double separation, double dt);

// Bound applied to a link: the smaller of the two limits above.
double link_speed_limit(const SafetyParams& p, const SsmInputs& in, double dt);

}  // namespace hrc

#endif  // HRC_SAFETY_SSM_H_
