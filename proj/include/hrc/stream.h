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

// WebSocket stream for the operator UI.
//
// One client session at a time. The server sends a "hello" message on
// connect and then one "frame" per scaler tick; frames pass through a
// drop-oldest queue of depth 8 so a slow client never stalls the scaler.
// Inbound messages are human poses and scenario controls. The message
// layout is documented in docs/stream_protocol.md.

#ifndef HRC_STREAM_H_
#define HRC_STREAM_H_

#include <atomic>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "hrc/realtime.h"

namespace hrc {

inline constexpr const char* kStreamSchema = "hrc.stream/1";
inline constexpr std::size_t kFrameQueueDepth = 8;

// Bounded FIFO that discards its oldest element when full.
template <typename T>
class DropOldestQueue {
 public:
  explicit DropOldestQueue(std::size_t depth) : depth_(depth) {}

  // Returns true if an older element was discarded to make room.
  bool push(T value) {
    std::lock_guard<std::mutex> lock(mu_);
    bool dropped = false;
    if (items_.size() >= depth_) {
      items_.pop_front();
      ++dropped_;
      dropped = true;
    }
    items_.push_back(std::move(value));
    return dropped;
  }
  std::optional<T> try_pop() {
    std::lock_guard<std::mutex> lock(mu_);
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return items_.size();
  }
  std::size_t dropped() const {
    std::lock_guard<std::mutex> lock(mu_);
    return dropped_;
  }

 private:
  mutable std::mutex mu_;
  std::deque<T> items_;
  std::size_t depth_;
  std::size_t dropped_ = 0;
};

class MalformedMessage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HumanPoseMessage {
  double client_time = 0.0;
  std::vector<Capsule> links;
};

struct ControlMessage {
  enum class Command { kPause, kResume, kReset, kSetGoal };
  Command command = Command::kPause;
  JointVector goal;  // kSetGoal only
};

using InboundMessage = std::variant<HumanPoseMessage, ControlMessage>;

// Throws MalformedMessage.
InboundMessage parse_inbound(std::string_view text);

struct StreamStats {
  std::size_t dropped_frames = 0;
  std::size_t malformed_messages = 0;
  std::size_t dropped_poses = 0;
  std::int64_t overruns = 0;
};

nlohmann::json hello_message(const ScenarioConfig& config);
nlohmann::json frame_message(const Frame& frame, const StreamStats& stats,
                             const SafetyParams& params);

class StreamServer {
 public:
  // Binds immediately; port 0 picks a free port. Throws std::system_error
  // when the port is busy.
  StreamServer(ScenarioConfig config, unsigned short port,
               const std::string& address = "127.0.0.1");
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  unsigned short port() const;
  // Starts the runner and serves until stop() (or SIGINT/SIGTERM when
  // handle_signals is set).
  void run(bool handle_signals = false);
  void stop();

  std::size_t malformed_messages() const { return malformed_.load(); }
  std::size_t dropped_frames() const { return frames_.dropped(); }
  RealtimeRunner& runner() { return *runner_; }

 private:
  class Impl;
  friend class Impl;

  ScenarioConfig config_;
  std::unique_ptr<RealtimeRunner> runner_;
  DropOldestQueue<Frame> frames_{kFrameQueueDepth};
  std::atomic<std::size_t> malformed_{0};
  std::unique_ptr<Impl> impl_;
};

}  // namespace hrc

#endif  // HRC_STREAM_H_
