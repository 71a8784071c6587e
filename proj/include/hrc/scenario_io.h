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

// Scenario files: JSON documents describing the robot, safety parameters,
// planner and scaler settings, the human source and the goal sequence. The
// schema is shipped as schema/scenario.schema.json; the loader enforces the
// same rules and reports the offending field path.

#ifndef HRC_SCENARIO_IO_H_
#define HRC_SCENARIO_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hrc/error.h"
#include "hrc/runtime.h"

namespace hrc {

inline constexpr int kScenarioSchemaVersion = 1;

// Malformed scenario document. `where` is a JSON field path such as
// "planner.horizon_len", or "line 12, column 4" for syntax errors.
class SchemaError : public ConfigError {
 public:
  SchemaError(std::string where, const std::string& what)
      : ConfigError(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// Relative paths inside the document (human.trace) resolve against base_dir.
ScenarioConfig parse_scenario(std::string_view text,
                              const std::filesystem::path& base_dir = {});
ScenarioConfig scenario_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});
// Throws SchemaError when the file cannot be read or parsed.
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Inverse of scenario_from_json for the preset robots.
nlohmann::json scenario_to_json(const ScenarioConfig& config);

}  // namespace hrc

#endif  // HRC_SCENARIO_IO_H_
