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

// Trace and report files.
//
// A trace is line-delimited JSON: a header line followed by trajectory,
// event and tick records in time order. Infinite values (separations and
// speed bounds without a human) are written as null. CSV tables carry the
// plotted signal families with shortest round-trip number formatting.

#ifndef HRC_TRACE_IO_H_
#define HRC_TRACE_IO_H_

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "hrc/runtime.h"

namespace hrc {

inline constexpr const char* kTraceFormat = "hrc.trace/1";

class CorruptTraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceFile {
  Trace trace;
  // Scenario document embedded in the header, when the writer had one.
  std::optional<nlohmann::json> scenario;
};

void write_trace(std::ostream& out, const Trace& trace,
                 const nlohmann::json* scenario = nullptr);
// Throws CorruptTraceError naming the offending line.
TraceFile read_trace(std::istream& in);

// Human capsules recorded on each tick, keyed by their sample timestamp. Throws
// CorruptTraceError if no tick carries a human or the link count changes.
HumanScript human_script_from_trace(const Trace& trace);

nlohmann::json tick_to_json(const TickRecord& rec);
nlohmann::json event_to_json(const EventRecord& ev);
nlohmann::json summary_to_json(const Summary& summary);

struct CsvTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// alpha_beta, separation, joints_executed and joints_nominal, all sharing
// the tick timestamps in column "t".
std::vector<CsvTable> export_tables(const Trace& trace);
void write_csv(std::ostream& out, const CsvTable& table);
// Throws CorruptTraceError on malformed input.
CsvTable read_csv(std::istream& in, std::string name = "");

// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

}  // namespace hrc

#endif  // HRC_TRACE_IO_H_
