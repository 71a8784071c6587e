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

#include "hrc/geometry.h"

#include <algorithm>

#include "hrc/error.h"

namespace hrc {
namespace {

// Squared lengths below this make a segment a point.
constexpr double kPointEpsilon = 1e-18;
// Relative threshold on the Gram determinant for the parallel branch.
constexpr double kParallelEpsilon = 1e-12;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

DistanceResult segment_distance(const Segment& s1, const Segment& s2) {
  const Vec3 d1 = s1.b - s1.a;
  const Vec3 d2 = s2.b - s2.a;
  const Vec3 r = s1.a - s2.a;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);

  double s = 0.0;
  double t = 0.0;
  if (a <= kPointEpsilon && e <= kPointEpsilon) {
    // both points
  } else if (a <= kPointEpsilon) {
    t = clamp01(f / e);
  } else {
    const double c = d1.dot(r);
    if (e <= kPointEpsilon) {
      s = clamp01(-c / a);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      // Parallel axes: start from s = 0 so the smallest s1 parameter wins.
      s = denom > kParallelEpsilon * a * e ? clamp01((b * f - c * e) / denom)
                                           : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = clamp01(-c / a);
      } else if (t > 1.0) {
        t = 1.0;
        s = clamp01((b - c) / a);
      }
    }
  }

  DistanceResult out;
  out.param_a = s;
  out.param_b = t;
  out.witness_a = s1.a + s * d1;
  out.witness_b = s2.a + t * d2;
  const Vec3 diff = out.witness_b - out.witness_a;
  out.axis_distance = diff.norm();
  out.distance = out.axis_distance;
  if (out.axis_distance < kContactTolerance) {
    out.degenerate = true;
  } else {
    out.direction = diff / out.axis_distance;
  }
  return out;
}

DistanceResult capsule_distance(const Capsule& c1, const Capsule& c2) {
  DistanceResult out = segment_distance(c1.axis, c2.axis);
  out.distance = out.axis_distance - c1.radius - c2.radius;
  return out;
}

PairDistance min_human_robot_distance(std::span<const Capsule> robot_links,
                                      std::span<const Capsule> human_links) {
  if (robot_links.empty() || human_links.empty()) {
    throw ConfigError(
        "min_human_robot_distance: robot and human link lists must be "
        "nonempty");
  }
  PairDistance best;
  bool have = false;
  for (std::size_t i = 0; i < robot_links.size(); ++i) {
    for (std::size_t j = 0; j < human_links.size(); ++j) {
      DistanceResult d = capsule_distance(robot_links[i], human_links[j]);
      if (!have || d.distance < best.result.distance) {
        best = {i, j, d};
        have = true;
      }
    }
  }
  return best;
}

}  // namespace hrc
