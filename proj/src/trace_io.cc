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

#include "hrc/trace_io.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hrc {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

json capsule(const Capsule& c) {
  return {{"a", vec(c.axis.a)}, {"b", vec(c.axis.b)}, {"radius", c.radius}};
}

// Reading helpers; every failure carries the record's line.
[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw CorruptTraceError(path + ": " + what);
}

const json& at(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) bad(path + "." + key, "missing");
  return *it;
}

double get_num(const json& j, const char* key, const std::string& path) {
  const json& v = at(j, key, path);
  if (v.is_null()) return kInf;
  if (!v.is_number()) bad(path + "." + key, "expected a number");
  return v.get<double>();
}

template <typename Int>
Int get_int(const json& j, const char* key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_number_integer()) bad(path + "." + key, "expected an integer");
  return v.get<Int>();
}

bool get_bool(const json& j, const char* key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_boolean()) bad(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_str(const json& j, const char* key, const std::string& path) {
  const json& v = at(j, key, path);
  if (!v.is_string()) bad(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Eigen::VectorXd get_vec(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].is_null()) {
      out[static_cast<Eigen::Index>(i)] = kInf;
    } else if (v[i].is_number()) {
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    } else {
      bad(path, "expected numbers");
    }
  }
  return out;
}

Eigen::VectorXd get_vec(const json& j, const char* key, const std::string& path) {
  return get_vec(at(j, key, path), path + "." + key);
}

Vec3 get_vec3(const json& j, const char* key, const std::string& path) {
  const Eigen::VectorXd v = get_vec(j, key, path);
  if (v.size() != 3) bad(path + "." + key, "expected 3 numbers");
  return v;
}

Capsule get_capsule(const json& j, const std::string& path) {
  Capsule c;
  c.axis.a = get_vec3(j, "a", path);
  c.axis.b = get_vec3(j, "b", path);
  c.radius = get_num(j, "radius", path);
  return c;
}

json trajectory_to_json(const TrajectoryRecord& r) {
  json wp = json::array();
  for (const JointVector& q : r.waypoints) wp.push_back(vec(q));
  json arc = json::array();
  for (double s : r.arc) arc.push_back(s);
  return {{"type", "trajectory"},
          {"t", r.t},
          {"tick", r.tick},
          {"id", r.id},
          {"episode", r.episode},
          {"parent_id", r.parent_id ? json(*r.parent_id) : json(nullptr)},
          {"graft_s", r.graft_s},
          {"waypoints", wp},
          {"arc", arc},
          {"duration", r.duration}};
}

TrajectoryRecord trajectory_from_json(const json& j, const std::string& p) {
  TrajectoryRecord r;
  r.t = get_num(j, "t", p);
  r.tick = get_int<std::int64_t>(j, "tick", p);
  r.id = get_int<std::uint64_t>(j, "id", p);
  r.episode = get_int<std::uint64_t>(j, "episode", p);
  const json& parent = at(j, "parent_id", p);
  if (!parent.is_null()) r.parent_id = get_int<std::uint64_t>(j, "parent_id", p);
  r.graft_s = get_num(j, "graft_s", p);
  const json& wp = at(j, "waypoints", p);
  if (!wp.is_array()) bad(p + ".waypoints", "expected an array");
  for (std::size_t i = 0; i < wp.size(); ++i) {
    r.waypoints.push_back(get_vec(wp[i], p + ".waypoints"));
  }
  const Eigen::VectorXd arc = get_vec(j, "arc", p);
  r.arc.assign(arc.data(), arc.data() + arc.size());
  r.duration = get_num(j, "duration", p);
  return r;
}

EventRecord event_from_json(const json& j, const std::string& p) {
  EventRecord e;
  e.t = get_num(j, "t", p);
  e.tick = get_int<std::int64_t>(j, "tick", p);
  e.name = get_str(j, "name", p);
  e.trajectory_id = get_int<std::uint64_t>(j, "trajectory_id", p);
  e.graft_s = get_num(j, "graft_s", p);
  e.horizon_index = get_int<int>(j, "horizon_index", p);
  e.duration = get_num(j, "duration", p);
  e.detail = get_str(j, "detail", p);
  return e;
}

TickRecord tick_from_json(const json& j, const std::string& p) {
  TickRecord r;
  r.t = get_num(j, "t", p);
  r.tick = get_int<std::int64_t>(j, "tick", p);
  r.trajectory_id = get_int<std::uint64_t>(j, "trajectory_id", p);
  r.goal_index = get_int<int>(j, "goal_index", p);
  r.s = get_num(j, "s", p);
  r.sdot = get_num(j, "sdot", p);
  r.q = get_vec(j, "q", p);
  r.q_nominal = get_vec(j, "q_nominal", p);
  r.qdot_cmd = get_vec(j, "qdot_cmd", p);
  r.qdot_nominal = get_vec(j, "qdot_nominal", p);
  r.alpha = get_num(j, "alpha", p);
  r.beta = get_bool(j, "beta", p);
  r.beta_raw = get_bool(j, "beta_raw", p);
  r.active = get_str(j, "active", p);
  r.decel_conflict = get_bool(j, "decel_conflict", p);
  r.paused = get_bool(j, "paused", p);
  r.min_separation = get_num(j, "min_separation", p);
  const json& links = at(j, "links", p);
  if (!links.is_array()) bad(p + ".links", "expected an array");
  for (const json& l : links) {
    const std::string lp = p + ".links[]";
    LinkRecord lr;
    lr.constrained = get_bool(l, "constrained", lp);
    lr.has_human = get_bool(l, "has_human", lp);
    lr.contact = get_bool(l, "contact", lp);
    lr.separation = get_num(l, "separation", lp);
    lr.human_speed = get_num(l, "human_speed", lp);
    lr.v_max = get_num(l, "v_max", lp);
    lr.coef = get_num(l, "coef", lp);
    lr.v_toward = get_num(l, "v_toward", lp);
    r.links.push_back(lr);
  }
  const json& h = at(j, "human", p);
  const std::string hp = p + ".human";
  r.human.timestamp = get_num(h, "timestamp", hp);
  r.human.stale = get_bool(h, "stale", hp);
  const json& hl = at(h, "links", hp);
  const json& hv = at(h, "velocities", hp);
  if (!hl.is_array() || !hv.is_array() || hl.size() != hv.size()) {
    bad(hp, "links and velocities must be arrays of equal length");
  }
  for (std::size_t i = 0; i < hl.size(); ++i) {
    r.human.links.push_back(get_capsule(hl[i], hp + ".links[]"));
    r.human.velocities.push_back({get_vec3(hv[i], "a", hp + ".velocities[]"),
                                  get_vec3(hv[i], "b", hp + ".velocities[]")});
  }
  return r;
}

}  // namespace

json tick_to_json(const TickRecord& r) {
  json links = json::array();
  for (const LinkRecord& l : r.links) {
    links.push_back({{"constrained", l.constrained},
                     {"has_human", l.has_human},
                     {"contact", l.contact},
                     {"separation", num(l.separation)},
                     {"human_speed", num(l.human_speed)},
                     {"v_max", num(l.v_max)},
                     {"coef", num(l.coef)},
                     {"v_toward", num(l.v_toward)}});
  }
  json hl = json::array();
  json hv = json::array();
  for (std::size_t i = 0; i < r.human.links.size(); ++i) {
    hl.push_back(capsule(r.human.links[i]));
    hv.push_back({{"a", vec(r.human.velocities[i].a)},
                  {"b", vec(r.human.velocities[i].b)}});
  }
  return {{"type", "tick"},
          {"t", r.t},
          {"tick", r.tick},
          {"trajectory_id", r.trajectory_id},
          {"goal_index", r.goal_index},
          {"s", r.s},
          {"sdot", r.sdot},
          {"q", vec(r.q)},
          {"q_nominal", vec(r.q_nominal)},
          {"qdot_cmd", vec(r.qdot_cmd)},
          {"qdot_nominal", vec(r.qdot_nominal)},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"beta_raw", r.beta_raw},
          {"active", r.active},
          {"decel_conflict", r.decel_conflict},
          {"paused", r.paused},
          {"min_separation", num(r.min_separation)},
          {"links", links},
          {"human",
           {{"timestamp", r.human.timestamp},
            {"stale", r.human.stale},
            {"links", hl},
            {"velocities", hv}}}};
}

json event_to_json(const EventRecord& e) {
  return {{"type", "event"},
          {"t", e.t},
          {"tick", e.tick},
          {"name", e.name},
          {"trajectory_id", e.trajectory_id},
          {"graft_s", e.graft_s},
          {"horizon_index", e.horizon_index},
          {"duration", e.duration},
          {"detail", e.detail}};
}

void write_trace(std::ostream& out, const Trace& trace, const json* scenario) {
  json header = {{"type", "header"},
                 {"format", kTraceFormat},
                 {"scenario", trace.scenario},
                 {"dof", trace.dof},
                 {"tick_period", trace.tick_period}};
  if (scenario) header["config"] = *scenario;
  out << header.dump() << '\n';
  std::size_t ti = 0;
  std::size_t ei = 0;
  for (const TickRecord& tick : trace.ticks) {
    while (ti < trace.trajectories.size() &&
           trace.trajectories[ti].tick <= tick.tick) {
      out << trajectory_to_json(trace.trajectories[ti++]).dump() << '\n';
    }
    while (ei < trace.events.size() && trace.events[ei].tick <= tick.tick) {
      out << event_to_json(trace.events[ei++]).dump() << '\n';
    }
    out << tick_to_json(tick).dump() << '\n';
  }
  while (ti < trace.trajectories.size()) {
    out << trajectory_to_json(trace.trajectories[ti++]).dump() << '\n';
  }
  while (ei < trace.events.size()) {
    out << event_to_json(trace.events[ei++]).dump() << '\n';
  }
}

TraceFile read_trace(std::istream& in) {
  TraceFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw CorruptTraceError(where + ": not valid JSON");
    }
    if (!j.is_object()) throw CorruptTraceError(where + ": expected an object");
    try {
      const std::string type = get_str(j, "type", where);
      if (!have_header) {
        if (type != "header" || get_str(j, "format", where) != kTraceFormat) {
          throw CorruptTraceError(where + ": expected a " +
                                  std::string(kTraceFormat) + " header");
        }
        file.trace.scenario = get_str(j, "scenario", where);
        file.trace.dof = get_int<std::size_t>(j, "dof", where);
        file.trace.tick_period = get_num(j, "tick_period", where);
        if (const auto it = j.find("config"); it != j.end()) file.scenario = *it;
        have_header = true;
      } else if (type == "tick") {
        file.trace.ticks.push_back(tick_from_json(j, where));
        const TickRecord& r = file.trace.ticks.back();
        const auto n = static_cast<Eigen::Index>(file.trace.dof);
        if (r.q.size() != n || r.q_nominal.size() != n ||
            r.qdot_cmd.size() != n || r.qdot_nominal.size() != n ||
            r.links.size() != file.trace.dof) {
          throw CorruptTraceError(where + ": joint count differs from header");
        }
      } else if (type == "event") {
        file.trace.events.push_back(event_from_json(j, where));
      } else if (type == "trajectory") {
        file.trace.trajectories.push_back(trajectory_from_json(j, where));
      } else {
        throw CorruptTraceError(where + ": unknown record type \"" + type + "\"");
      }
    } catch (const json::exception& e) {
      throw CorruptTraceError(where + ": " + e.what());
    }
  }
  if (!have_header) throw CorruptTraceError("trace is empty");
  return file;
}

HumanScript human_script_from_trace(const Trace& trace) {
  HumanScript script;
  for (const TickRecord& r : trace.ticks) {
    if (r.human.links.empty()) continue;
    if (!script.keyframes.empty()) {
      if (r.human.links.size() != script.keyframes.front().links.size()) {
        throw CorruptTraceError("tick " + std::to_string(r.tick) +
                                ": human link count changed");
      }
      if (r.human.timestamp <= script.keyframes.back().time) continue;
    }
    script.keyframes.push_back({r.human.timestamp, r.human.links});
  }
  if (script.keyframes.empty()) throw CorruptTraceError("trace records no human");
  return script;
}

json summary_to_json(const Summary& s) {
  json violations = json::array();
  for (const Violation& v : s.violations) {
    violations.push_back({{"t", v.t},
                          {"tick", v.tick},
                          {"kind", v.kind},
                          {"link", v.link},
                          {"message", v.message}});
  }
  json out = {{"scenario", s.scenario},
              {"goal_reached", s.goal_reached},
              {"completion_time",
               s.completion_time ? json(*s.completion_time) : json(nullptr)},
              {"nominal_duration", s.nominal_duration},
              {"completion_delta", s.completion_time
                                       ? json(*s.completion_time - s.nominal_duration)
                                       : json(nullptr)},
              {"simulated_time", s.simulated_time},
              {"ticks", s.ticks},
              {"min_separation", num(s.min_separation)},
              {"alpha_histogram", s.alpha_histogram},
              {"replans", s.replans},
              {"decel_conflicts", s.decel_conflicts},
              {"overruns", s.overruns},
              {"violation_count", s.violations.size()},
              {"violations", violations}};
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<CsvTable> export_tables(const Trace& trace) {
  const std::size_t n = trace.dof;
  CsvTable ab{"alpha_beta",
              {"t", "alpha", "beta", "beta_raw", "trajectory_id", "s", "sdot",
               "paused", "decel_conflict"},
              {}};
  CsvTable sep{"separation", {"t", "min_separation"}, {}};
  CsvTable exe{"joints_executed", {"t"}, {}};
  CsvTable nom{"joints_nominal", {"t"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string k = std::to_string(i);
    sep.columns.insert(sep.columns.end(), {"separation_" + k, "v_max_" + k,
                                           "v_toward_" + k, "coef_" + k});
  }
  for (CsvTable* t : {&exe, &nom}) {
    for (std::size_t i = 0; i < n; ++i) t->columns.push_back("q_" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) t->columns.push_back("qdot_" + std::to_string(i));
  }
  for (const TickRecord& r : trace.ticks) {
    ab.rows.push_back({r.t, r.alpha, r.beta ? 1.0 : 0.0, r.beta_raw ? 1.0 : 0.0,
                       static_cast<double>(r.trajectory_id), r.s, r.sdot,
                       r.paused ? 1.0 : 0.0, r.decel_conflict ? 1.0 : 0.0});
    std::vector<double> srow = {r.t, r.min_separation};
    for (const LinkRecord& l : r.links) {
      srow.insert(srow.end(), {l.separation, l.v_max, l.v_toward, l.coef});
    }
    sep.rows.push_back(std::move(srow));
    std::vector<double> erow = {r.t};
    std::vector<double> nrow = {r.t};
    for (Eigen::Index i = 0; i < r.q.size(); ++i) {
      erow.push_back(r.q[i]);
      nrow.push_back(r.q_nominal[i]);
    }
    for (Eigen::Index i = 0; i < r.q.size(); ++i) {
      erow.push_back(r.qdot_cmd[i]);
      nrow.push_back(r.qdot_nominal[i]);
    }
    exe.rows.push_back(std::move(erow));
    nom.rows.push_back(std::move(nrow));
  }
  return {ab, sep, exe, nom};
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_number(row[i]);
    }
    out << '\n';
  }
}

CsvTable read_csv(std::istream& in, std::string name) {
  CsvTable table;
  table.name = std::move(name);
  std::string line;
  if (!std::getline(in, line)) throw CorruptTraceError("csv: missing header");
  std::stringstream hs(line);
  for (std::string col; std::getline(hs, col, ',');) table.columns.push_back(col);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw CorruptTraceError("csv line " + std::to_string(line_no) +
                                ": bad number \"" + cell + "\"");
      }
      row.push_back(v);
    }
    if (row.size() != table.columns.size()) {
      throw CorruptTraceError("csv line " + std::to_string(line_no) +
                              ": expected " + std::to_string(table.columns.size()) +
                              " cells");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace hrc
