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

// Iterated cell publishing against a fixed structure instance.
//
// Round i starts from P_i published bits, sets k_i = ceil(gamma * P_i), and
// publishes every cell that Q0 (for k_i blocks) still pays for. Average
// probes are taken over all queries q in [1, n] on the same array.

#ifndef RANKPROBE_ELIMINATION_H_
#define RANKPROBE_ELIMINATION_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rankprobe/bit_array.h"
#include "rankprobe/cell_probe.h"
#include "rankprobe/rank_structures.h"

namespace rankprobe {

// Monte-Carlo estimate of Pr[Probes(q) meets Probes(Q0)] over fresh uniform
// arrays and uniform q in [1, n]. Cells at `published_addresses` are published
// from each fresh instance, so they are free and never count as probes.
// Each array serves `queries_per_array` consecutive trials.
double OverlapProbability(const StructureFamily& family, const QueryBlocks& blocks,
                          const std::vector<uint64_t>& published_addresses,
                          uint64_t trials, uint64_t seed,
                          uint64_t queries_per_array = 1);

// The same probability for one instance, exact over q in [1, n].
double InstanceOverlap(const StructureLayout& layout, const QueryBlocks& blocks);

// Mean charged probes over q in [1, n].
double AverageProbes(const StructureLayout& layout);

struct RoundStats {
  uint64_t index = 0;
  uint64_t published_bits = 0;  // P_i
  uint64_t blocks = 0;          // k_i
  double overlap_prob = 0.0;
  double avg_before = 0.0;
  double avg_after = 0.0;
  uint64_t cells_published = 0;
  uint64_t published_after = 0;  // P_{i+1}
};

struct EliminationOptions {
  double gamma = 4.0;
  double saturation_fraction = 0.1;
  double quiet_probes = 0.01;
  uint64_t max_rounds = 64;
};

enum class Termination { kQuiet, kSaturated, kBlocksExceedN, kMaxRounds };

std::string TerminationName(Termination t);

// ceil(gamma * p).
uint64_t BlocksFor(double gamma, uint64_t p);

// Publishes Probes(Q0) for k = BlocksFor(gamma, P). Throws Refusal when
// k exceeds n.
RoundStats EliminateRound(StructureLayout& layout, uint64_t index,
                          const EliminationOptions& options);

struct EliminationTrajectory {
  uint64_t n = 0;
  uint64_t seed = 0;
  uint64_t initial_bits = 0;  // P_0
  uint64_t saturation_bits = 0;
  std::vector<RoundStats> rounds;
  Termination termination = Termination::kMaxRounds;
  // Rounds run before the published length first reached saturation_bits;
  // zero when P_0 already does, empty when it never did.
  std::optional<uint64_t> rounds_to_saturation;
};

// The first P_0 = max(r, 1) bits of the redundancy region's cells (zero
// padded) form the published base. r defaults to the instance's redundancy.
EliminationTrajectory RunElimination(const StructureFamily& family, uint64_t n,
                                     std::optional<uint64_t> r,
                                     const EliminationOptions& options, uint64_t seed);

// Same, on a given instance; its published bits are replaced by the base.
EliminationTrajectory RunEliminationOn(StructureLayout layout,
                                       std::optional<uint64_t> r,
                                       const EliminationOptions& options);

// Columns i,P_i,k_i,overlap_prob,avg_before,avg_after,cells_published.
void WriteTrajectoryCsv(std::ostream& out, const EliminationTrajectory& trajectory);

}  // namespace rankprobe

#endif  // RANKPROBE_ELIMINATION_H_
