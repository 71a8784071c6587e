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

// Free-running mode: the planner, the scaler and the human source run as
// three periodic threads on the wall clock. They share three single-writer
// cells (trajectory snapshot, human state, scaler feedback); none of them
// waits on another's computation.

#ifndef HRC_REALTIME_H_
#define HRC_REALTIME_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "hrc/runtime.h"

namespace hrc {

// Latest-value cell with a single writer. Readers get a snapshot pointer and
// never observe a partially written value.
template <typename T>
class Cell {
 public:
  void store(std::shared_ptr<const T> v) {
    std::lock_guard<std::mutex> lock(mu_);
    value_ = std::move(v);
  }
  std::shared_ptr<const T> load() const {
    std::lock_guard<std::mutex> lock(mu_);
    return value_;
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const T> value_;
};

// One outbound state snapshot, built by the scaler thread after a tick.
struct Frame {
  std::uint64_t frame = 0;
  TickRecord tick;
  std::vector<Capsule> robot_capsules;
  // Trajectory the tick executed (null before the first plan).
  std::shared_ptr<const Trajectory> trajectory;
  std::vector<EventRecord> events;  // planner/runtime events since the last frame
  bool finished = false;
};

class RealtimeRunner {
 public:
  using FrameSink = std::function<void(const Frame&)>;

  // Human poses come from config.human (script) or push_human (live).
  RealtimeRunner(ScenarioConfig config, FrameSink sink = {},
                 bool record_trace = true);
  ~RealtimeRunner();
  RealtimeRunner(const RealtimeRunner&) = delete;
  RealtimeRunner& operator=(const RealtimeRunner&) = delete;

  void start();
  void stop();

  void pause();
  void resume();
  // Robot back to the start configuration, goal sequence restarted.
  void reset();
  // Replaces the goal sequence with a single goal reached from the current
  // configuration.
  void set_goal(const JointVector& goal);
  // Live human pose, stamped with the runner clock on arrival. Poses whose
  // client timestamp does not increase are dropped.
  void push_human(double client_time, std::vector<Capsule> links);

  double now() const;
  bool finished() const { return finished_.load(); }
  bool paused() const { return paused_.load(); }
  std::size_t dropped_poses() const;
  std::int64_t overruns() const { return overruns_.load(); }
  std::int64_t ticks() const { return tick_count_.load(); }

  // Stops the runner (if needed) and returns the recorded trace.
  Trace take_trace();
  const ScenarioConfig& config() const { return config_; }

 private:
  struct Feedback {
    PlannerFeedback fb;
    JointVector q;
    std::uint64_t generation = 0;
  };
  struct Published {
    std::shared_ptr<const Trajectory> trajectory;
    std::uint64_t generation = 0;
  };

  void scaler_loop();
  void planner_loop();
  void human_loop();
  void push_event(EventRecord ev);

  ScenarioConfig config_;
  FrameSink sink_;
  bool record_trace_;
  std::chrono::steady_clock::time_point t0_;

  Cell<Published> trajectory_cell_;
  Cell<HumanState> human_cell_;
  Cell<Feedback> feedback_cell_;

  std::atomic<bool> running_{false};
  std::atomic<bool> paused_{false};
  std::atomic<bool> finished_{false};
  std::atomic<std::uint64_t> generation_{0};
  std::atomic<std::int64_t> overruns_{0};
  std::atomic<std::int64_t> tick_count_{0};

  // Pending control for the planner thread, guarded by control_mu_.
  std::mutex control_mu_;
  bool goal_override_ = false;
  bool reset_pending_ = false;
  JointVector override_goal_;

  mutable std::mutex live_mu_;
  LiveHumanSource live_;
  double last_client_time_ = -1.0;
  std::size_t client_dropped_ = 0;

  std::mutex trace_mu_;
  Trace trace_;
  std::deque<EventRecord> frame_events_;

  std::thread scaler_thread_;
  std::thread planner_thread_;
  std::thread human_thread_;
};

// Runs the scenario on the wall clock for config.duration seconds or until
// every goal is reached.
RunResult run_realtime(const ScenarioConfig& config);

}  // namespace hrc

#endif  // HRC_REALTIME_H_
