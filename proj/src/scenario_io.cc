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

#include "hrc/scenario_io.h"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "hrc/robot_presets.h"
#include "hrc/trace_io.h"

namespace hrc {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw SchemaError(path, "expected an array of 3 numbers");
  }
  return {as_number(j[0], index_path(path, 0)),
          as_number(j[1], index_path(path, 1)),
          as_number(j[2], index_path(path, 2))};
}

JointVector as_joints(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    throw SchemaError(path, "expected a non-empty array of numbers");
  }
  JointVector q(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    q[static_cast<Eigen::Index>(i)] = as_number(j[i], index_path(path, i));
  }
  return q;
}

// Object accessor that remembers which keys were consumed so that leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw SchemaError(path_.empty() ? "(root)" : path_, "expected an object");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) throw SchemaError(join(path_, key), "required field missing");
    return *v;
  }
  std::string path(const std::string& key) const { return join(path_, key); }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, path(key));
  }
  void positive(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      out = as_number(*v, path(key));
      if (!(out > 0.0)) throw SchemaError(path(key), "must be > 0");
    }
  }
  void non_negative(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      out = as_number(*v, path(key));
      if (!(out >= 0.0)) throw SchemaError(path(key), "must be >= 0");
    }
  }
  void integer(const std::string& key, int& out, int min) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) {
        throw SchemaError(path(key), "expected an integer");
      }
      const auto value = v->get<std::int64_t>();
      if (value < min || value > std::numeric_limits<int>::max()) {
        throw SchemaError(path(key), "must be >= " + std::to_string(min));
      }
      out = static_cast<int>(value);
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw SchemaError(path(key), "expected a boolean");
      out = v->get<bool>();
    }
  }
  std::optional<std::string> string(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw SchemaError(path(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw SchemaError(path(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::shared_ptr<const RobotModel> parse_robot(const json& j) {
  Section sec(j, "robot");
  const auto preset = sec.string("preset");
  if (!preset) throw SchemaError("robot.preset", "required field missing");
  if (*preset == "planar2r") {
    double l1 = 1.0;
    double l2 = 1.0;
    double radius = 0.0;
    if (const json* lengths = sec.find("link_lengths")) {
      if (!lengths->is_array() || lengths->size() != 2) {
        throw SchemaError("robot.link_lengths", "expected an array of 2 numbers");
      }
      l1 = as_number((*lengths)[0], "robot.link_lengths[0]");
      l2 = as_number((*lengths)[1], "robot.link_lengths[1]");
      if (!(l1 > 0.0 && l2 > 0.0)) {
        throw SchemaError("robot.link_lengths", "lengths must be > 0");
      }
    }
    sec.non_negative("radius", radius);
    sec.finish();
    return std::make_shared<const RobotModel>(planar_2r(l1, l2, radius));
  }
  sec.finish();
  auto model = robot_preset(*preset);
  if (!model) {
    throw SchemaError("robot.preset", "unknown preset \"" + *preset +
                                          "\" (expected planar2r or prbt6)");
  }
  return std::make_shared<const RobotModel>(std::move(*model));
}

void parse_safety(const json& j, SafetyParams& p) {
  Section sec(j, "safety_params");
  sec.non_negative("stopping_time", p.stopping_time);
  sec.non_negative("reaction_time", p.reaction_time);
  sec.non_negative("intrusion_distance", p.intrusion_distance);
  sec.non_negative("human_uncertainty", p.human_uncertainty);
  sec.non_negative("robot_uncertainty", p.robot_uncertainty);
  sec.non_negative("max_deceleration", p.max_deceleration);
  sec.non_negative("min_distance", p.min_distance);
  sec.finish();
}

void parse_planner(const json& j, PlannerConfig& p) {
  Section sec(j, "planner");
  sec.positive("rate_hz", p.cycle_rate);
  sec.integer("horizon_len", p.horizon_len, 1);
  sec.positive("horizon_spacing", p.horizon_spacing);
  sec.positive("rrt_step", p.rrt_step);
  sec.positive("max_plan_time", p.max_plan_time);
  sec.integer("max_iterations", p.max_iterations, 1);
  sec.positive("goal_tolerance", p.goal_tolerance);
  sec.non_negative("plan_clearance", p.plan_clearance);
  sec.non_negative("beta_clearance", p.beta_clearance);
  sec.non_negative("escape_radius", p.escape_radius);
  sec.integer("shortcut_iterations", p.shortcut_iterations, 0);
  sec.non_negative("plan_latency", p.plan_latency);
  sec.boolean("beta_enabled", p.beta_enabled);
  sec.finish();
}

void parse_scaler(const json& j, ScalerConfig& c) {
  Section sec(j, "scaler");
  double rate = 1.0 / c.tick_period;
  sec.positive("rate_hz", rate);
  c.tick_period = 1.0 / rate;
  sec.number("alpha_min", c.alpha_min);
  if (!(c.alpha_min >= 0.0 && c.alpha_min < 1.0)) {
    throw SchemaError("scaler.alpha_min", "must lie in [0, 1)");
  }
  sec.boolean("ee_only", c.ee_only);
  sec.non_negative("beta_release_margin", c.beta_release_margin);
  sec.finish();
}

Capsule parse_capsule(const json& j, const std::string& path) {
  Section sec(j, path);
  Capsule c;
  c.axis.a = as_vec3(sec.require("a"), sec.path("a"));
  c.axis.b = as_vec3(sec.require("b"), sec.path("b"));
  c.radius = as_number(sec.require("radius"), sec.path("radius"));
  if (!(c.radius >= 0.0)) throw SchemaError(sec.path("radius"), "must be >= 0");
  sec.finish();
  return c;
}

HumanScript load_recording(const std::string& file, const std::filesystem::path& base_dir) {
  std::filesystem::path path(file);
  if (path.is_relative()) path = base_dir / path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("human.trace", "cannot open " + path.string());
  try {
    return human_script_from_trace(read_trace(in).trace);
  } catch (const CorruptTraceError& e) {
    throw SchemaError("human.trace", path.string() + ": " + e.what());
  }
}

void parse_human(const json& j, HumanSourceSpec& h, const std::filesystem::path& base_dir) {
  Section sec(j, "human");
  const std::string source = sec.string("source").value_or("none");
  const std::optional<std::string> recording = sec.string("trace");
  if (recording.has_value() != (source == "trace")) {
    throw SchemaError("human.trace", "required with, and only with, source \"trace\"");
  }
  if (source == "none") {
    h.kind = HumanSourceSpec::Kind::kNone;
  } else if (source == "script") {
    h.kind = HumanSourceSpec::Kind::kScript;
  } else if (source == "live") {
    h.kind = HumanSourceSpec::Kind::kLive;
  } else if (source == "trace") {
    if (sec.find("keyframes")) {
      throw SchemaError("human.keyframes", "not allowed with source \"trace\"");
    }
    h.kind = HumanSourceSpec::Kind::kScript;
    h.script = load_recording(*recording, base_dir);
  } else {
    throw SchemaError("human.source", "expected none, script, live or trace");
  }
  sec.positive("rate_hz", h.rate_hz);
  sec.positive("staleness_timeout", h.staleness_timeout);
  sec.boolean("loop", h.script.loop);
  if (const json* frames = sec.find("keyframes")) {
    if (!frames->is_array()) {
      throw SchemaError("human.keyframes", "expected an array");
    }
    for (std::size_t i = 0; i < frames->size(); ++i) {
      const std::string path = index_path("human.keyframes", i);
      Section kf((*frames)[i], path);
      HumanKeyframe frame;
      frame.time = as_number(kf.require("t"), kf.path("t"));
      const json& links = kf.require("links");
      if (!links.is_array() || links.empty()) {
        throw SchemaError(kf.path("links"), "expected a non-empty array");
      }
      for (std::size_t k = 0; k < links.size(); ++k) {
        frame.links.push_back(parse_capsule(links[k], index_path(kf.path("links"), k)));
      }
      kf.finish();
      h.script.keyframes.push_back(std::move(frame));
    }
  }
  if (h.kind == HumanSourceSpec::Kind::kScript && h.script.keyframes.empty()) {
    throw SchemaError("human.keyframes", "a script needs at least one keyframe");
  }
  sec.finish();
}

std::string line_column(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json capsule_json(const Capsule& c) {
  return {{"a", vec_json(c.axis.a)}, {"b", vec_json(c.axis.b)}, {"radius", c.radius}};
}

}  // namespace

ScenarioConfig scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
  Section root(doc, "");
  ScenarioConfig c;
  if (const json* v = root.find("schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != kScenarioSchemaVersion) {
      throw SchemaError("schema_version", "unsupported version (expected " +
                                              std::to_string(kScenarioSchemaVersion) + ")");
    }
  }
  c.name = root.string("name").value_or("scenario");
  c.robot = parse_robot(root.require("robot"));
  c.q_start = as_joints(root.require("start"), "start");
  const json& goals = root.require("goals");
  if (!goals.is_array() || goals.empty()) {
    throw SchemaError("goals", "expected a non-empty array of configurations");
  }
  for (std::size_t i = 0; i < goals.size(); ++i) {
    c.goals.push_back(as_joints(goals[i], index_path("goals", i)));
  }
  root.integer("repeat", c.repeat, 1);
  if (const json* v = root.find("seed")) {
    if (!v->is_number_unsigned()) {
      throw SchemaError("seed", "expected a non-negative integer");
    }
    c.planner.rng_seed = v->get<std::uint64_t>();
  }
  if (const auto mode = root.string("mode")) {
    if (*mode == "lockstep") {
      c.mode = RunMode::kLockstep;
    } else if (*mode == "realtime") {
      c.mode = RunMode::kRealtime;
    } else {
      throw SchemaError("mode", "expected lockstep or realtime");
    }
  }
  root.positive("duration", c.duration);
  if (const json* v = root.find("safety_params")) parse_safety(*v, c.safety);
  if (const json* v = root.find("planner")) parse_planner(*v, c.planner);
  if (const json* v = root.find("scaler")) parse_scaler(*v, c.scaler);
  if (const json* v = root.find("human")) parse_human(*v, c.human, base_dir);
  root.finish();
  try {
    c.validate();
  } catch (const SchemaError&) {
    throw;
  } catch (const ConfigError& e) {
    throw SchemaError("(scenario)", e.what());
  }
  return c;
}

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(line_column(text, e.byte), "JSON syntax error");
  }
  return scenario_from_json(doc, base_dir);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str(), path.parent_path());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.where(),
                      std::string(e.what()).substr(e.where().size() + 2));
  }
}

json scenario_to_json(const ScenarioConfig& c) {
  json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  doc["name"] = c.name;
  const RobotModel& m = *c.robot;
  json robot = {{"preset", m.name()}};
  if (m.name() == "planar2r") {
    const double l1 = m.joint(1).origin.translation().x();
    const double l2 = m.joint(1).capsule.axis.b.x();
    robot["link_lengths"] = {l1, l2};
    robot["radius"] = m.joint(0).capsule.radius;
  }
  doc["robot"] = robot;
  doc["start"] = vec_json(c.q_start);
  doc["goals"] = json::array();
  for (const JointVector& g : c.goals) doc["goals"].push_back(vec_json(g));
  doc["repeat"] = c.repeat;
  doc["seed"] = c.planner.rng_seed;
  doc["mode"] = c.mode == RunMode::kRealtime ? "realtime" : "lockstep";
  doc["duration"] = c.duration;
  const SafetyParams& s = c.safety;
  doc["safety_params"] = {{"stopping_time", s.stopping_time},
                          {"reaction_time", s.reaction_time},
                          {"intrusion_distance", s.intrusion_distance},
                          {"human_uncertainty", s.human_uncertainty},
                          {"robot_uncertainty", s.robot_uncertainty},
                          {"max_deceleration", s.max_deceleration},
                          {"min_distance", s.min_distance}};
  const PlannerConfig& p = c.planner;
  doc["planner"] = {{"rate_hz", p.cycle_rate},
                    {"horizon_len", p.horizon_len},
                    {"horizon_spacing", p.horizon_spacing},
                    {"rrt_step", p.rrt_step},
                    {"max_plan_time", p.max_plan_time},
                    {"max_iterations", p.max_iterations},
                    {"goal_tolerance", p.goal_tolerance},
                    {"plan_clearance", p.plan_clearance},
                    {"beta_clearance", p.beta_clearance},
                    {"escape_radius", p.escape_radius},
                    {"shortcut_iterations", p.shortcut_iterations},
                    {"plan_latency", p.plan_latency},
                    {"beta_enabled", p.beta_enabled}};
  doc["scaler"] = {{"rate_hz", 1.0 / c.scaler.tick_period},
                   {"alpha_min", c.scaler.alpha_min},
                   {"ee_only", c.scaler.ee_only},
                   {"beta_release_margin", c.scaler.beta_release_margin}};
  json human;
  switch (c.human.kind) {
    case HumanSourceSpec::Kind::kNone: human["source"] = "none"; break;
    case HumanSourceSpec::Kind::kScript: human["source"] = "script"; break;
    case HumanSourceSpec::Kind::kLive: human["source"] = "live"; break;
  }
  human["rate_hz"] = c.human.rate_hz;
  human["staleness_timeout"] = c.human.staleness_timeout;
  if (c.human.kind == HumanSourceSpec::Kind::kScript) {
    human["loop"] = c.human.script.loop;
    json frames = json::array();
    for (const HumanKeyframe& kf : c.human.script.keyframes) {
      json links = json::array();
      for (const Capsule& cap : kf.links) links.push_back(capsule_json(cap));
      frames.push_back({{"t", kf.time}, {"links", links}});
    }
    human["keyframes"] = frames;
  }
  doc["human"] = human;
  return doc;
}

}  // namespace hrc
