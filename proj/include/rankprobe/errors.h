// Copyright 2026 The rankprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RANKPROBE_ERRORS_H_
#define RANKPROBE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rankprobe {

// Bad parameters or preconditions at an API boundary.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A query algorithm misbehaved inside the cell-probe simulator (probed out of
// range, never answered). Always indicates a buggy structure.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A footprint ran out of words before the replayed queries finished.
class CorruptFootprint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An encoding record that cannot be decoded consistently.
class CorruptEncoding : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The request is well formed but exceeds what the lab is willing to compute
// (brute force beyond 2^20 arrays, events too rare for the trial budget).
class Refusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rankprobe

#endif  // RANKPROBE_ERRORS_H_
