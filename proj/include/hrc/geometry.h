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

#ifndef HRC_GEOMETRY_H_
#define HRC_GEOMETRY_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace hrc {

using Vec3 = Eigen::Vector3d;

// Axis distances below this are treated as contact: the separating direction
// is undefined and DistanceResult::degenerate is set.
inline constexpr double kContactTolerance = 1e-9;

struct Segment {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();

  Vec3 point_at(double t) const { return a + t * (b - a); }
};

struct Capsule {
  Segment axis;
  double radius = 0.0;
};

// Result of a closest-point query between two segments or capsules.
//
// `distance` is surface-to-surface (negative on interpenetration) and
// `axis_distance` is the distance between the underlying segments. When
// `degenerate` is true the axes touch and `direction` is the zero vector.
struct DistanceResult {
  double distance = 0.0;
  double axis_distance = 0.0;
  Vec3 direction = Vec3::Zero();
  Vec3 witness_a = Vec3::Zero();
  Vec3 witness_b = Vec3::Zero();
  double param_a = 0.0;  // witness_a = a.a + param_a * (a.b - a.a)
  double param_b = 0.0;
  bool degenerate = false;
};

// Global minimum distance between two segments (radii zero).
DistanceResult segment_distance(const Segment& s1, const Segment& s2);

// Surface distance between two capsules; direction points from c1 to c2.
DistanceResult capsule_distance(const Capsule& c1, const Capsule& c2);

struct PairDistance {
  std::size_t link_index = 0;
  std::size_t human_index = 0;
  DistanceResult result;
};

// Closest (robot link, human link) pair. Ties resolve to the lowest
// (link_index, human_index). Throws ConfigError if either list is empty.
PairDistance min_human_robot_distance(std::span<const Capsule> robot_links,
                                      std::span<const Capsule> human_links);

}  // namespace hrc

#endif  // HRC_GEOMETRY_H_
