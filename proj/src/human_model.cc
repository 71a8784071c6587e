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

#include "hrc/human_model.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "hrc/error.h"

namespace hrc {
namespace {

Vec3 median3(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 out;
  for (int k = 0; k < 3; ++k) {
    out[k] = std::max(std::min(a[k], b[k]), std::min(std::max(a[k], b[k]), c[k]));
  }
  return out;
}

HumanState hold(const std::vector<Capsule>& links, double t) {
  HumanState s;
  s.timestamp = t;
  s.links = links;
  s.velocities.assign(links.size(), LinkVelocity{});
  return s;
}

}  // namespace

void HumanScript::validate() const {
  for (std::size_t k = 0; k < keyframes.size(); ++k) {
    const HumanKeyframe& kf = keyframes[k];
    if (!std::isfinite(kf.time) || kf.time < 0.0) {
      throw ConfigError("human script keyframe " + std::to_string(k) +
                        ": time must be finite and >= 0");
    }
    if (k > 0 && kf.time <= keyframes[k - 1].time) {
      throw ConfigError("human script keyframe " + std::to_string(k) +
                        ": times must strictly increase");
    }
    if (kf.links.size() != keyframes.front().links.size()) {
      throw ConfigError("human script keyframe " + std::to_string(k) +
                        ": link count differs from the first keyframe");
    }
    for (const Capsule& c : kf.links) {
      if (c.radius < 0.0 || !c.axis.a.allFinite() || !c.axis.b.allFinite()) {
        throw ConfigError("human script keyframe " + std::to_string(k) +
                          ": invalid capsule");
      }
    }
  }
}

HumanState sample_script(const HumanScript& script, double t) {
  const auto& kfs = script.keyframes;
  if (kfs.empty()) return hold({}, t);
  if (kfs.size() == 1 || t <= kfs.front().time) {
    return hold(kfs.front().links, t);
  }
  double local = t;
  if (t >= kfs.back().time) {
    if (!script.loop) return hold(kfs.back().links, t);
    const double period = kfs.back().time - kfs.front().time;
    local = kfs.front().time + std::fmod(t - kfs.front().time, period);
  }
  const auto it = std::upper_bound(
      kfs.begin(), kfs.end(), local,
      [](double v, const HumanKeyframe& kf) { return v < kf.time; });
  const auto k = static_cast<std::size_t>(std::distance(kfs.begin(), it) - 1);
  const HumanKeyframe& k0 = kfs[k];
  const HumanKeyframe& k1 = kfs[k + 1];
  const double span = k1.time - k0.time;
  const double u = (local - k0.time) / span;

  HumanState s;
  s.timestamp = t;
  s.links.reserve(k0.links.size());
  s.velocities.reserve(k0.links.size());
  for (std::size_t j = 0; j < k0.links.size(); ++j) {
    const Capsule& c0 = k0.links[j];
    const Capsule& c1 = k1.links[j];
    Capsule c;
    c.axis.a = c0.axis.a + u * (c1.axis.a - c0.axis.a);
    c.axis.b = c0.axis.b + u * (c1.axis.b - c0.axis.b);
    c.radius = c0.radius + u * (c1.radius - c0.radius);
    s.links.push_back(c);
    s.velocities.push_back({(c1.axis.a - c0.axis.a) / span,
                            (c1.axis.b - c0.axis.b) / span});
  }
  return s;
}

Vec3 VelocityEstimator::update(double t, const Vec3& p) {
  if (have_last_ && t > last_t_) {
    history_.push_back((p - last_p_) / (t - last_t_));
    if (history_.size() > 3) history_.pop_front();
  }
  last_p_ = p;
  last_t_ = t;
  have_last_ = true;
  if (history_.empty()) return Vec3::Zero();
  if (history_.size() < 3) return history_.back();
  return median3(history_[0], history_[1], history_[2]);
}

HumanState LiveHumanSource::ingest_live(const LiveUpdate& update) {
  const bool out_of_order = has_state_ && update.timestamp <= state_.timestamp;
  const bool wrong_shape =
      has_state_ && update.links.size() != state_.links.size();
  bool malformed = !std::isfinite(update.timestamp);
  for (const Capsule& c : update.links) {
    if (!c.axis.a.allFinite() || !c.axis.b.allFinite() ||
        !std::isfinite(c.radius) || c.radius < 0.0) {
      malformed = true;
    }
  }
  if (out_of_order || wrong_shape || malformed) {
    ++dropped_;
    return state_;
  }
  if (!has_state_) {
    estimators_.assign(update.links.size(), {});
  }
  state_.timestamp = update.timestamp;
  state_.links = update.links;
  state_.velocities.resize(update.links.size());
  state_.stale = false;
  for (std::size_t j = 0; j < update.links.size(); ++j) {
    state_.velocities[j].a =
        estimators_[j][0].update(update.timestamp, update.links[j].axis.a);
    state_.velocities[j].b =
        estimators_[j][1].update(update.timestamp, update.links[j].axis.b);
  }
  has_state_ = true;
  return state_;
}

HumanState LiveHumanSource::state_at(double now) const {
  if (!has_state_) return hold({}, now);
  if (now - state_.timestamp > staleness_timeout_) {
    HumanState held = hold(state_.links, state_.timestamp);
    held.stale = true;
    return held;
  }
  return state_;
}

void LiveHumanSource::reset() {
  state_ = HumanState{};
  has_state_ = false;
  dropped_ = 0;
  estimators_.clear();
}

ScriptedHumanSource::ScriptedHumanSource(HumanScript script, double rate_hz)
    : script_(std::move(script)), rate_hz_(rate_hz) {
  script_.validate();
  if (!(rate_hz_ > 0.0)) throw ConfigError("human source rate must be > 0");
}

HumanState ScriptedHumanSource::state_at(double t) {
  const double sample_t = std::floor(t * rate_hz_ + 1e-9) / rate_hz_;
  return sample_script(script_, std::max(0.0, sample_t));
}

}  // namespace hrc
