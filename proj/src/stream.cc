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

#include "hrc/stream.h"

#include <cmath>
#include <csignal>
#include <set>
#include <system_error>
#include <utility>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "hrc/error.h"

namespace hrc {
namespace {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

json capsule(const Capsule& c) {
  return {{"a", vec(c.axis.a)}, {"b", vec(c.axis.b)}, {"radius", c.radius}};
}

void only_keys(const json& j, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw MalformedMessage("unknown key \"" + key + "\"");
  }
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw MalformedMessage(std::string("missing \"") + key + "\"");
  return *it;
}

double finite_number(const json& j, const char* what) {
  if (!j.is_number() || !std::isfinite(j.get<double>())) {
    throw MalformedMessage(std::string(what) + " must be a finite number");
  }
  return j.get<double>();
}

Vec3 point(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw MalformedMessage("points must be arrays of 3 numbers");
  }
  return {finite_number(j[0], "coordinate"), finite_number(j[1], "coordinate"),
          finite_number(j[2], "coordinate")};
}

}  // namespace

InboundMessage parse_inbound(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error&) {
    throw MalformedMessage("not valid JSON");
  }
  if (!j.is_object()) throw MalformedMessage("expected an object");
  const json& type = field(j, "type");
  if (type == "human_pose") {
    only_keys(j, {"type", "t", "links"});
    HumanPoseMessage msg;
    msg.client_time = finite_number(field(j, "t"), "t");
    const json& links = field(j, "links");
    if (!links.is_array() || links.empty()) {
      throw MalformedMessage("links must be a non-empty array");
    }
    for (const json& l : links) {
      if (!l.is_object()) throw MalformedMessage("links must be objects");
      only_keys(l, {"a", "b", "radius"});
      Capsule c;
      c.axis.a = point(field(l, "a"));
      c.axis.b = point(field(l, "b"));
      c.radius = finite_number(field(l, "radius"), "radius");
      if (c.radius < 0.0) throw MalformedMessage("radius must be >= 0");
      msg.links.push_back(c);
    }
    return msg;
  }
  if (type == "control") {
    only_keys(j, {"type", "command", "goal"});
    const json& cmd = field(j, "command");
    ControlMessage msg;
    if (cmd == "pause") {
      msg.command = ControlMessage::Command::kPause;
    } else if (cmd == "resume") {
      msg.command = ControlMessage::Command::kResume;
    } else if (cmd == "reset") {
      msg.command = ControlMessage::Command::kReset;
    } else if (cmd == "set_goal") {
      msg.command = ControlMessage::Command::kSetGoal;
      const json& goal = field(j, "goal");
      if (!goal.is_array() || goal.empty()) {
        throw MalformedMessage("goal must be a non-empty array");
      }
      msg.goal.resize(static_cast<Eigen::Index>(goal.size()));
      for (std::size_t i = 0; i < goal.size(); ++i) {
        msg.goal[static_cast<Eigen::Index>(i)] = finite_number(goal[i], "goal");
      }
    } else {
      throw MalformedMessage("unknown command");
    }
    if (msg.command != ControlMessage::Command::kSetGoal && j.contains("goal")) {
      throw MalformedMessage("goal is only valid with set_goal");
    }
    return msg;
  }
  throw MalformedMessage("unknown message type");
}

json hello_message(const ScenarioConfig& c) {
  const RobotModel& m = *c.robot;
  json goals = json::array();
  for (const JointVector& g : c.goals) goals.push_back(vec(g));
  return {{"type", "hello"},
          {"schema", kStreamSchema},
          {"scenario", c.name},
          {"robot", m.name()},
          {"dof", m.dof()},
          {"q_min", vec(m.q_min())},
          {"q_max", vec(m.q_max())},
          {"q_start", vec(c.q_start)},
          {"goals", goals},
          {"tick_period", c.scaler.tick_period},
          {"planner_rate", c.planner.cycle_rate},
          {"d_min", c.safety.min_distance},
          {"alpha_min", c.scaler.alpha_min}};
}

json frame_message(const Frame& f, const StreamStats& stats,
                   const SafetyParams& params) {
  const TickRecord& r = f.tick;
  json links = json::array();
  for (const LinkRecord& l : r.links) {
    links.push_back({{"separation", num(l.separation)},
                     {"v_max", num(l.v_max)},
                     {"v_toward", num(l.v_toward)},
                     {"coef", num(l.coef)},
                     {"constrained", l.constrained},
                     {"contact", l.contact}});
  }
  json robot = json::array();
  for (const Capsule& c : f.robot_capsules) robot.push_back(capsule(c));
  json human = json::array();
  for (const Capsule& c : r.human.links) human.push_back(capsule(c));
  json traj = nullptr;
  if (f.trajectory) {
    json wp = json::array();
    for (const JointVector& q : f.trajectory->path.waypoints()) wp.push_back(vec(q));
    traj = {{"id", f.trajectory->id}, {"waypoints", wp}};
  }
  json events = json::array();
  for (const EventRecord& e : f.events) {
    events.push_back({{"t", e.t},
                      {"name", e.name},
                      {"trajectory_id", e.trajectory_id},
                      {"detail", e.detail}});
  }
  return {{"type", "frame"},
          {"schema", kStreamSchema},
          {"frame", f.frame},
          {"t", r.t},
          {"tick", r.tick},
          {"trajectory_id", r.trajectory_id},
          {"q", vec(r.q)},
          {"qdot_cmd", vec(r.qdot_cmd)},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"beta_raw", r.beta_raw},
          {"active", r.active},
          {"decel_conflict", r.decel_conflict},
          {"paused", r.paused},
          {"finished", f.finished},
          {"min_separation", num(r.min_separation)},
          {"d_min", params.min_distance},
          {"links", links},
          {"robot_capsules", robot},
          {"human", {{"stale", r.human.stale}, {"capsules", human}}},
          {"trajectory", traj},
          {"events", events},
          {"stats",
           {{"dropped_frames", stats.dropped_frames},
            {"malformed_messages", stats.malformed_messages},
            {"dropped_poses", stats.dropped_poses},
            {"overruns", stats.overruns}}}};
}

class StreamServer::Impl {
 public:
  class Session : public std::enable_shared_from_this<Session> {
   public:
    Session(Impl& impl, tcp::socket socket)
        : impl_(impl), ws_(std::move(socket)) {}

    void start() {
      ws_.set_option(
          websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
        if (ec) {
          self->impl_.closed(self.get());
          return;
        }
        self->open_ = true;
        self->outbox_.push_back(hello_message(self->impl_.owner_.config_).dump());
        self->read();
        self->pump();
      });
    }

    void send(std::string text) {
      outbox_.push_back(std::move(text));
      pump();
    }

    void pump() {
      if (!open_ || writing_) return;
      if (!outbox_.empty()) {
        pending_ = std::move(outbox_.front());
        outbox_.pop_front();
      } else if (auto frame = impl_.owner_.frames_.try_pop()) {
        pending_ = frame_message(*frame, impl_.stats(),
                                 impl_.owner_.config_.safety)
                       .dump();
      } else {
        return;
      }
      writing_ = true;
      ws_.text(true);
      ws_.async_write(net::buffer(pending_),
                      [self = shared_from_this()](beast::error_code ec,
                                                  std::size_t) {
                        self->writing_ = false;
                        if (ec) {
                          self->impl_.closed(self.get());
                          return;
                        }
                        self->pump();
                      });
    }

    void close() {
      open_ = false;
      beast::error_code ec;
      beast::get_lowest_layer(ws_).socket().close(ec);
    }

   private:
    void read() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec,
                                                          std::size_t) {
        if (ec) {
          self->impl_.closed(self.get());
          return;
        }
        std::string text = beast::buffers_to_string(self->buffer_.data());
        self->buffer_.consume(self->buffer_.size());
        self->impl_.handle(*self, text);
        self->read();
      });
    }

    Impl& impl_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    std::string pending_;
    bool open_ = false;
    bool writing_ = false;
  };

  Impl(StreamServer& owner, const std::string& address, unsigned short port)
      : owner_(owner), acceptor_(ioc_) {
    const tcp::endpoint ep(net::ip::make_address(address), port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  }

  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      if (session_) {
        // Single-session service: extra clients are turned away.
        beast::error_code ignored;
        socket.close(ignored);
      } else {
        while (owner_.frames_.try_pop()) {
        }
        session_ = std::make_shared<Session>(*this, std::move(socket));
        session_->start();
      }
      accept();
    });
  }

  void notify() {
    net::post(ioc_, [this] {
      if (session_) session_->pump();
    });
  }

  void closed(Session* s) {
    if (session_.get() == s) {
      session_->close();
      session_.reset();
    }
  }

  void handle(Session& s, const std::string& text) {
    RealtimeRunner& runner = *owner_.runner_;
    InboundMessage msg;
    try {
      msg = parse_inbound(text);
    } catch (const MalformedMessage& e) {
      ++owner_.malformed_;
      s.send(json{{"type", "error"}, {"schema", kStreamSchema}, {"message", e.what()}}
                 .dump());
      return;
    }
    if (const auto* pose = std::get_if<HumanPoseMessage>(&msg)) {
      runner.push_human(pose->client_time, pose->links);
      return;
    }
    const auto& ctl = std::get<ControlMessage>(msg);
    const char* name = "pause";
    try {
      switch (ctl.command) {
        case ControlMessage::Command::kPause:
          runner.pause();
          break;
        case ControlMessage::Command::kResume:
          name = "resume";
          runner.resume();
          break;
        case ControlMessage::Command::kReset:
          name = "reset";
          runner.reset();
          break;
        case ControlMessage::Command::kSetGoal:
          name = "set_goal";
          runner.set_goal(ctl.goal);
          break;
      }
    } catch (const std::exception& e) {
      s.send(json{{"type", "rejected"},
                  {"schema", kStreamSchema},
                  {"command", name},
                  {"reason", e.what()}}
                 .dump());
      return;
    }
    s.send(json{{"type", "ack"}, {"schema", kStreamSchema}, {"command", name}}.dump());
  }

  StreamStats stats() const {
    StreamStats st;
    st.dropped_frames = owner_.frames_.dropped();
    st.malformed_messages = owner_.malformed_.load();
    st.dropped_poses = owner_.runner_->dropped_poses();
    st.overruns = owner_.runner_->overruns();
    return st;
  }

  void shutdown() {
    net::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      if (session_) {
        session_->close();
        session_.reset();
      }
      ioc_.stop();
    });
  }

  StreamServer& owner_;
  net::io_context ioc_;
  tcp::acceptor acceptor_;
  std::shared_ptr<Session> session_;
};

StreamServer::StreamServer(ScenarioConfig config, unsigned short port,
                           const std::string& address)
    : config_(std::move(config)) {
  if (config_.human.kind == HumanSourceSpec::Kind::kScript) {
    throw ConfigError("serve: the scenario must use a live human source");
  }
  config_.human.kind = HumanSourceSpec::Kind::kLive;
  config_.mode = RunMode::kRealtime;
  config_.validate();
  try {
    impl_ = std::make_unique<Impl>(*this, address, port);
  } catch (const boost::system::system_error& e) {
    throw std::system_error(e.code().value(), std::generic_category(),
                            "stream: cannot listen on " + address + ":" +
                                std::to_string(port));
  }
  runner_ = std::make_unique<RealtimeRunner>(
      config_,
      [this](const Frame& f) {
        frames_.push(f);
        impl_->notify();
      },
      /*record_trace=*/false);
}

StreamServer::~StreamServer() {
  if (runner_) runner_->stop();
}

unsigned short StreamServer::port() const {
  return impl_->acceptor_.local_endpoint().port();
}

void StreamServer::run(bool handle_signals) {
  net::signal_set signals(impl_->ioc_);
  if (handle_signals) {
    signals.add(SIGINT);
    signals.add(SIGTERM);
    signals.async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }
  runner_->start();
  impl_->accept();
  impl_->ioc_.run();
  runner_->stop();
}

void StreamServer::stop() { impl_->shutdown(); }

}  // namespace hrc
