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

#include "hrc/trajectory.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "hrc/error.h"

namespace hrc {
namespace {

constexpr double kDuplicateTolerance = 1e-12;
constexpr double kRangeTolerance = 1e-9;

// Largest v with |q'_j| * v <= limit_j for all j, evaluated in floating
// point exactly as the scaler will evaluate it.
double cruise_speed(const JointVector& tangent, const RobotModel& model) {
  double v = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < tangent.size(); ++j) {
    const double c = tangent[j];
    if (c == 0.0) continue;
    const double limit = c > 0.0 ? model.qdot_max()[j] : -model.qdot_min()[j];
    v = std::min(v, limit / std::abs(c));
  }
  for (Eigen::Index j = 0; j < tangent.size(); ++j) {
    const double c = tangent[j];
    if (c == 0.0) continue;
    const double limit = c > 0.0 ? model.qdot_max()[j] : -model.qdot_min()[j];
    while (std::abs(c) * v > limit) v = std::nextafter(v, 0.0);
  }
  return v;
}

double path_accel(const JointVector& tangent, const RobotModel& model) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < tangent.size(); ++j) {
    const double c = std::abs(tangent[j]);
    if (c == 0.0) continue;
    const double limit =
        std::min(model.qddot_max()[j], -model.qddot_min()[j]);
    a = std::min(a, limit / c);
  }
  return a;
}

}  // namespace

GeometricPath GeometricPath::from_waypoints(std::vector<JointVector> waypoints) {
  if (waypoints.empty()) {
    throw PreconditionError("path needs at least one waypoint");
  }
  const Eigen::Index n = waypoints.front().size();
  GeometricPath path;
  path.waypoints_.reserve(waypoints.size());
  path.arc_.reserve(waypoints.size());
  for (JointVector& w : waypoints) {
    if (w.size() != n || n == 0) {
      throw PreconditionError("path waypoints must share a nonzero dimension");
    }
    if (!w.allFinite()) {
      throw PreconditionError("path waypoint has non-finite entries");
    }
    if (path.waypoints_.empty()) {
      path.arc_.push_back(0.0);
      path.waypoints_.push_back(std::move(w));
      continue;
    }
    const double step = (w - path.waypoints_.back()).norm();
    if (step <= kDuplicateTolerance) continue;
    path.arc_.push_back(path.arc_.back() + step);
    path.waypoints_.push_back(std::move(w));
  }
  return path;
}

std::size_t GeometricPath::segment_index(double s) const {
  if (waypoints_.size() < 2) return 0;
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
      0, std::distance(arc_.begin(), it) - 1));
  return std::min(idx, segment_count() - 1);
}

JointVector GeometricPath::position(double s) const {
  if (waypoints_.size() < 2) return waypoints_.front();
  s = std::clamp(s, 0.0, length());
  const std::size_t k = segment_index(s);
  const double seg_len = arc_[k + 1] - arc_[k];
  const double u = (s - arc_[k]) / seg_len;
  if (u >= 1.0) return waypoints_[k + 1];
  return waypoints_[k] + u * (waypoints_[k + 1] - waypoints_[k]);
}

JointVector GeometricPath::tangent(double s) const {
  if (waypoints_.size() < 2) {
    return JointVector::Zero(waypoints_.front().size());
  }
  const std::size_t k = segment_index(std::clamp(s, 0.0, length()));
  return (waypoints_[k + 1] - waypoints_[k]) / (arc_[k + 1] - arc_[k]);
}

TimeLaw::TimeLaw(std::vector<SegmentProfile> segments)
    : segments_(std::move(segments)) {}

std::size_t TimeLaw::index(double s) const {
  const auto it = std::upper_bound(
      segments_.begin(), segments_.end(), s,
      [](double v, const SegmentProfile& seg) { return v < seg.s_begin; });
  if (it == segments_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(segments_.begin(), it) - 1);
}

double TimeLaw::sdot(double s) const {
  if (segments_.empty()) return 0.0;
  const SegmentProfile& seg = segments_[index(s)];
  const double x = std::clamp(s - seg.s_begin, 0.0, seg.length);
  const double ramp_up = std::sqrt(2.0 * seg.accel * x);
  const double ramp_down = std::sqrt(2.0 * seg.accel * (seg.length - x));
  return std::min({seg.peak_speed, ramp_up, ramp_down});
}

double TimeLaw::step_speed(double s, double dt) const {
  if (segments_.empty() || dt <= 0.0) return 0.0;
  const SegmentProfile& seg = segments_[index(s)];
  const double x = std::clamp(s - seg.s_begin, 0.0, seg.length);
  const double remaining = seg.length - x;
  if (remaining <= 0.0) return 0.0;
  const double a = seg.accel;
  const double adt = a * dt;
  // v solves v^2 -/+ a dt v = 2 a (distance) at the step midpoint.
  const double up = 0.5 * (adt + std::sqrt(adt * adt + 8.0 * a * x));
  const double down = 0.5 * (-adt + std::sqrt(adt * adt + 8.0 * a * remaining));
  return std::min({seg.peak_speed, up, down, remaining / dt});
}

double TimeLaw::segment_end(double s) const {
  if (segments_.empty()) return 0.0;
  const SegmentProfile& seg = segments_[index(s)];
  return seg.s_begin + seg.length;
}

double TimeLaw::duration() const {
  double total = 0.0;
  for (const SegmentProfile& seg : segments_) {
    const double v = seg.peak_speed;
    const double a = seg.accel;
    if (std::isinf(a)) {
      total += seg.length / v;
    } else if (v * v / a >= seg.length) {
      total += 2.0 * std::sqrt(seg.length / a);
    } else {
      total += seg.length / v + v / a;
    }
  }
  return total;
}

TimeLaw time_parameterize(const GeometricPath& path, const RobotModel& model) {
  if (path.dof() != model.dof()) {
    throw PreconditionError("time_parameterize: path has " +
                            std::to_string(path.dof()) + " joints, model has " +
                            std::to_string(model.dof()));
  }
  std::vector<SegmentProfile> segments;
  segments.reserve(path.segment_count());
  const auto& wp = path.waypoints();
  const auto& arc = path.arc_coords();
  for (std::size_t k = 0; k + 1 < wp.size(); ++k) {
    const double len = arc[k + 1] - arc[k];
    const JointVector tangent = (wp[k + 1] - wp[k]) / len;
    const double cruise = cruise_speed(tangent, model);
    const double accel = path_accel(tangent, model);
    const double apex = std::sqrt(accel * len);
    segments.push_back({arc[k], len, std::min(cruise, apex), accel});
  }
  return TimeLaw(std::move(segments));
}

Trajectory make_trajectory(GeometricPath path, const RobotModel& model,
                           std::uint64_t id) {
  Trajectory traj;
  traj.law = time_parameterize(path, model);
  traj.path = std::move(path);
  traj.id = id;
  traj.episode = id;
  return traj;
}

TrajectorySample sample(const Trajectory& traj, double s) {
  const double len = traj.path.length();
  if (!(s >= -kRangeTolerance && s <= len + kRangeTolerance)) {
    throw PreconditionError("sample: abscissa " + std::to_string(s) +
                            " outside [0, " + std::to_string(len) + "]");
  }
  s = std::clamp(s, 0.0, len);
  return {traj.path.position(s), traj.path.tangent(s), traj.law.sdot(s)};
}

Trajectory merge(const Trajectory& old, const Trajectory& fresh, double s_graft,
                 const RobotModel& model) {
  const double len = old.path.length();
  if (!(s_graft >= -kRangeTolerance && s_graft <= len + kRangeTolerance)) {
    throw PreconditionError("merge: graft abscissa off the old path");
  }
  s_graft = std::clamp(s_graft, 0.0, len);
  const JointVector graft_q = old.path.position(s_graft);
  if ((fresh.path.start() - graft_q).cwiseAbs().maxCoeff() > 1e-6) {
    throw PreconditionError(
        "merge: new trajectory does not start at the graft configuration");
  }
  std::vector<JointVector> waypoints;
  const auto& old_wp = old.path.waypoints();
  const auto& old_arc = old.path.arc_coords();
  for (std::size_t k = 0; k < old_wp.size(); ++k) {
    if (old_arc[k] >= s_graft - kDuplicateTolerance) break;
    waypoints.push_back(old_wp[k]);
  }
  for (const JointVector& w : fresh.path.waypoints()) waypoints.push_back(w);
  Trajectory out =
      make_trajectory(GeometricPath::from_waypoints(std::move(waypoints)),
                      model, fresh.id);
  out.parent_id = old.id;
  out.episode = old.episode;
  out.graft_s = s_graft;
  return out;
}

}  // namespace hrc
