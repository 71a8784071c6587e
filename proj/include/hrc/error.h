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

#ifndef HRC_ERROR_H_
#define HRC_ERROR_H_

#include <stdexcept>
#include <string>

namespace hrc {

// Misconfigured model, scenario or parameter set.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated operation precondition (index out of range, bad argument).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hrc

#endif  // HRC_ERROR_H_
