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

// Path-velocity decomposed joint trajectories.
//
// A GeometricPath is a polyline in joint space parameterized by its joint
// space arc length s. A TimeLaw gives the nominal (maximum) path speed
// sdot(s) as a rest-to-rest trapezoid on every polyline segment, so the
// commanded joint velocity is qdot = q'(s) * sdot * alpha.

#ifndef HRC_TRAJECTORY_H_
#define HRC_TRAJECTORY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hrc/kinematics.h"

namespace hrc {

class GeometricPath {
 public:
  // Consecutive waypoints closer than 1e-12 are merged. Throws
  // PreconditionError on an empty list, mixed sizes or non-finite entries.
  static GeometricPath from_waypoints(std::vector<JointVector> waypoints);

  const std::vector<JointVector>& waypoints() const { return waypoints_; }
  const std::vector<double>& arc_coords() const { return arc_; }
  double length() const { return arc_.back(); }
  std::size_t dof() const {
    return static_cast<std::size_t>(waypoints_.front().size());
  }
  std::size_t segment_count() const { return waypoints_.size() - 1; }
  const JointVector& start() const { return waypoints_.front(); }
  const JointVector& goal() const { return waypoints_.back(); }

  // Index of the segment holding s; the last segment for s == length().
  std::size_t segment_index(double s) const;
  // s is clamped to [0, length()].
  JointVector position(double s) const;
  // Unit tangent of the active segment; zero for a zero-length path.
  JointVector tangent(double s) const;

 private:
  std::vector<JointVector> waypoints_;
  std::vector<double> arc_;
};

// Trapezoid on one path segment, starting and ending at rest.
struct SegmentProfile {
  double s_begin = 0.0;
  double length = 0.0;
  double peak_speed = 0.0;  // cruise speed, or the triangle apex
  double accel = 0.0;       // path acceleration used on both ramps
};

class TimeLaw {
 public:
  TimeLaw() = default;
  explicit TimeLaw(std::vector<SegmentProfile> segments);

  const std::vector<SegmentProfile>& segments() const { return segments_; }

  // Nominal speed profile value at s.
  double sdot(double s) const;

  // Speed for one control step of length dt starting at s. On the ramps the
  // speed is evaluated at the step midpoint so that consecutive steps change
  // speed by exactly accel * dt, and the step never runs past the end of the
  // active segment. Returns 0 at the end of the path.
  double step_speed(double s, double dt) const;

  // End abscissa of the segment holding s.
  double segment_end(double s) const;

  // Total nominal duration of the continuous-time profile.
  double duration() const;

 private:
  std::size_t index(double s) const;
  std::vector<SegmentProfile> segments_;
};

// Per-segment trapezoids: cruise = min_j vlim_j / |q'_j| and
// accel = min_j alim_j / |q'_j| using the model's joint boxes.
TimeLaw time_parameterize(const GeometricPath& path, const RobotModel& model);

struct Trajectory {
  GeometricPath path;
  TimeLaw law;
  std::uint64_t id = 0;
  // Trajectories derived from one another by merging share an episode and
  // agree on the abscissa up to their graft points.
  std::uint64_t episode = 0;
  // Set when this trajectory was produced by merging into `parent_id`; the
  // two share their abscissa up to the graft point.
  std::optional<std::uint64_t> parent_id;
  double graft_s = 0.0;
};

Trajectory make_trajectory(GeometricPath path, const RobotModel& model,
                           std::uint64_t id);

struct TrajectorySample {
  JointVector q;
  JointVector q_prime;
  double sdot = 0.0;
};

// Throws PreconditionError when s is outside [0, length] by more than 1e-9.
TrajectorySample sample(const Trajectory& traj, double s);

// Replaces old beyond s_graft with fresh. Throws PreconditionError when
// fresh does not start at old's configuration at s_graft (1e-6 per joint)
// or s_graft lies off the path.
Trajectory merge(const Trajectory& old, const Trajectory& fresh, double s_graft,
                 const RobotModel& model);

}  // namespace hrc

#endif  // HRC_TRAJECTORY_H_
