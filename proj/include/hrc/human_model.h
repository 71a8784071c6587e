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

// Human state sources: scripted keyframe motion and a live pose stream.

#ifndef HRC_HUMAN_MODEL_H_
#define HRC_HUMAN_MODEL_H_

#include <array>
#include <cstddef>
#include <deque>
#include <memory>
#include <vector>

#include "hrc/geometry.h"

namespace hrc {

// Velocities of a capsule's two axis endpoints.
struct LinkVelocity {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
};

struct HumanState {
  double timestamp = 0.0;
  std::vector<Capsule> links;
  std::vector<LinkVelocity> velocities;  // one per link
  bool stale = false;  // live stream timed out; pose held, velocity zeroed

  // Velocity of the axis point at parameter u in [0, 1] of link j.
  Vec3 point_velocity(std::size_t j, double u) const {
    return velocities[j].a + u * (velocities[j].b - velocities[j].a);
  }
  Vec3 link_velocity(std::size_t j) const { return point_velocity(j, 0.5); }
};

struct HumanKeyframe {
  double time = 0.0;
  std::vector<Capsule> links;
};

struct HumanScript {
  std::vector<HumanKeyframe> keyframes;
  bool loop = false;

  // Throws ConfigError unless keyframe times strictly increase, t >= 0 and
  // every keyframe has the same link count.
  void validate() const;
  std::size_t link_count() const {
    return keyframes.empty() ? 0 : keyframes.front().links.size();
  }
};

// Linear interpolation of capsule endpoints; velocity is the derivative of
// the interpolant. Before the first keyframe the first pose is held; after
// the last one the last pose is held with zero velocity unless looping, in
// which case time wraps with period (last - first).
HumanState sample_script(const HumanScript& script, double t);

// Backward difference of successive samples with a median over the last
// three difference quotients, applied per coordinate.
class VelocityEstimator {
 public:
  // Returns the filtered velocity after adding a sample.
  Vec3 update(double t, const Vec3& p);
  void reset() { history_.clear(); have_last_ = false; }

 private:
  std::deque<Vec3> history_;
  Vec3 last_p_ = Vec3::Zero();
  double last_t_ = 0.0;
  bool have_last_ = false;
};

struct LiveUpdate {
  double timestamp = 0.0;
  std::vector<Capsule> links;
};

// Human state fed by timestamped pose updates (operator UI, tracking).
class LiveHumanSource {
 public:
  explicit LiveHumanSource(double staleness_timeout = 0.5)
      : staleness_timeout_(staleness_timeout) {}

  // Applies an update and returns the resulting state. Updates whose
  // timestamp does not exceed the last accepted one, or whose link count
  // differs from the first accepted update, are dropped and counted; the
  // previous state is returned unchanged.
  HumanState ingest_live(const LiveUpdate& update);

  // Latest state as seen at time `now`. If no update arrived for longer than
  // the staleness timeout, the last pose is held with zero velocity and
  // `stale` is set.
  HumanState state_at(double now) const;

  bool has_state() const { return has_state_; }
  std::size_t dropped() const { return dropped_; }
  double staleness_timeout() const { return staleness_timeout_; }
  void reset();

 private:
  double staleness_timeout_;
  HumanState state_;
  bool has_state_ = false;
  std::size_t dropped_ = 0;
  std::vector<std::array<VelocityEstimator, 2>> estimators_;
};

// Polymorphic source used by the simulator.
class HumanSource {
 public:
  virtual ~HumanSource() = default;
  virtual HumanState state_at(double t) = 0;
};

// Script sampled with sample-and-hold at `rate_hz`, as a tracking system
// running at that rate would deliver it.
class ScriptedHumanSource : public HumanSource {
 public:
  ScriptedHumanSource(HumanScript script, double rate_hz);
  HumanState state_at(double t) override;

 private:
  HumanScript script_;
  double rate_hz_;
};

}  // namespace hrc

#endif  // HRC_HUMAN_MODEL_H_
