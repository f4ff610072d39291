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

#ifndef RANKPROBE_RANDOM_H_
#define RANKPROBE_RANDOM_H_

#include <cstdint>
#include <random>

namespace rankprobe {

// All randomness in the lab goes through this generator. The standard
// distributions are implementation-defined, so bounded draws use Lemire's
// multiply-shift on the raw engine output to stay identical across toolchains.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t Next() { return engine_(); }

  // Uniform in [0, bound). bound must be nonzero.
  uint64_t Uniform(uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    uint64_t low = static_cast<uint64_t>(m);
    if (low < bound) {
      const uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * bound;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1).
  double UnitDouble() { return (engine_() >> 11) * 0x1.0p-53; }

  // Independent child stream, for per-worker partitioning.
  SeededRng Fork(uint64_t stream) const {
    return SeededRng(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace rankprobe

#endif  // RANKPROBE_RANDOM_H_
