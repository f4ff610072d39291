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

#include "rankprobe/elimination.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "rankprobe/errors.h"
#include "rankprobe/random.h"

namespace rankprobe {

namespace {

bool Meets(const ProbeTrace& trace, const std::vector<uint64_t>& sorted_cells) {
  return std::any_of(trace.steps.begin(), trace.steps.end(), [&](const ProbeStep& s) {
    return !s.published &&
           std::binary_search(sorted_cells.begin(), sorted_cells.end(), s.address);
  });
}

std::vector<uint64_t> Q0Probes(const StructureLayout& layout, const QueryBlocks& blocks) {
  return ProbesOfSet(*layout.algorithm, layout.memory, layout.published,
                     blocks.QDelta(0));
}

}  // namespace

double OverlapProbability(const StructureFamily& family, const QueryBlocks& blocks,
                          const std::vector<uint64_t>& published_addresses,
                          uint64_t trials, uint64_t seed,
                          uint64_t queries_per_array) {
  if (trials == 0) throw ArgumentError("overlap estimate needs trials >= 1");
  if (queries_per_array == 0) throw ArgumentError("queries_per_array must be >= 1");
  SeededRng rng(seed);
  const uint64_t n = blocks.n();
  uint64_t hits = 0;
  uint64_t done = 0;
  while (done < trials) {
    StructureLayout layout = family(BitArray::Random(n, rng));
    std::vector<uint64_t> addresses;
    for (uint64_t a : published_addresses) {
      if (a < layout.memory.cell_count()) addresses.push_back(a);
    }
    layout.published = PublishCells(layout.memory, layout.published, addresses);
    const std::vector<uint64_t> p0 = Q0Probes(layout, blocks);
    for (uint64_t j = 0; j < queries_per_array && done < trials; ++j, ++done) {
      const uint64_t q = 1 + rng.Uniform(n);
      if (Meets(RunQuery(*layout.algorithm, layout.memory, layout.published, q), p0)) {
        ++hits;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

double InstanceOverlap(const StructureLayout& layout, const QueryBlocks& blocks) {
  const std::vector<uint64_t> p0 = Q0Probes(layout, blocks);
  uint64_t hits = 0;
  for (uint64_t q = 1; q <= layout.n(); ++q) {
    if (Meets(RunQuery(*layout.algorithm, layout.memory, layout.published, q), p0)) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(layout.n());
}

double AverageProbes(const StructureLayout& layout) {
  uint64_t total = 0;
  for (uint64_t q = 1; q <= layout.n(); ++q) {
    total += RunQuery(*layout.algorithm, layout.memory, layout.published, q).probe_count();
  }
  return static_cast<double>(total) / static_cast<double>(layout.n());
}

std::string TerminationName(Termination t) {
  switch (t) {
    case Termination::kQuiet: return "quiet";
    case Termination::kSaturated: return "saturated";
    case Termination::kBlocksExceedN: return "blocks_exceed_n";
    case Termination::kMaxRounds: return "max_rounds";
  }
  return "unknown";
}

uint64_t BlocksFor(double gamma, uint64_t p) {
  return static_cast<uint64_t>(std::ceil(static_cast<long double>(gamma) *
                                         static_cast<long double>(p)));
}

RoundStats EliminateRound(StructureLayout& layout, uint64_t index,
                          const EliminationOptions& options) {
  RoundStats stats;
  stats.index = index;
  stats.published_bits = layout.published.length();
  stats.blocks = BlocksFor(options.gamma, stats.published_bits);
  if (stats.blocks == 0 || stats.blocks > layout.n()) {
    throw Refusal(fmt::format("k = {} blocks does not fit n = {}", stats.blocks,
                              layout.n()));
  }
  const QueryBlocks blocks(layout.n(), stats.blocks);
  stats.overlap_prob = InstanceOverlap(layout, blocks);
  stats.avg_before = AverageProbes(layout);
  const std::vector<uint64_t> cells = Q0Probes(layout, blocks);
  layout.published = PublishCells(layout.memory, layout.published, cells);
  stats.cells_published = cells.size();
  stats.avg_after = AverageProbes(layout);
  stats.published_after = layout.published.length();
  return stats;
}

EliminationTrajectory RunEliminationOn(StructureLayout layout,
                                       std::optional<uint64_t> r,
                                       const EliminationOptions& options) {
  EliminationTrajectory out;
  out.n = layout.n();
  const uint64_t redundancy =
      r.value_or(static_cast<uint64_t>(std::max<int64_t>(0, layout.redundancy_bits())));
  out.initial_bits = std::max<uint64_t>(redundancy, 1);
  out.saturation_bits = static_cast<uint64_t>(
      std::ceil(options.saturation_fraction * static_cast<double>(out.n)));

  BitString base;
  const int w = layout.memory.word_bits();
  for (uint64_t c : layout.redundancy_region) {
    if (base.size() >= out.initial_bits) break;
    base.Append(layout.memory.Get(c), w);
  }
  base.Resize(out.initial_bits);
  layout.published = PublishedBits(std::move(base));

  for (uint64_t i = 0;; ++i) {
    const uint64_t p = layout.published.length();
    if (p >= out.saturation_bits) {
      out.rounds_to_saturation = i;
      out.termination = Termination::kSaturated;
      break;
    }
    if (BlocksFor(options.gamma, p) > out.n) {
      out.termination = Termination::kBlocksExceedN;
      break;
    }
    if (i >= options.max_rounds) {
      out.termination = Termination::kMaxRounds;
      break;
    }
    out.rounds.push_back(EliminateRound(layout, i, options));
    if (out.rounds.back().avg_after < options.quiet_probes) {
      if (out.rounds.back().published_after >= out.saturation_bits) {
        out.rounds_to_saturation = i + 1;
      }
      out.termination = Termination::kQuiet;
      break;
    }
  }
  return out;
}

EliminationTrajectory RunElimination(const StructureFamily& family, uint64_t n,
                                     std::optional<uint64_t> r,
                                     const EliminationOptions& options,
                                     uint64_t seed) {
  SeededRng rng(seed);
  EliminationTrajectory out =
      RunEliminationOn(family(BitArray::Random(n, rng)), r, options);
  out.seed = seed;
  return out;
}

void WriteTrajectoryCsv(std::ostream& out, const EliminationTrajectory& trajectory) {
  out << "i,P_i,k_i,overlap_prob,avg_before,avg_after,cells_published\n";
  for (const RoundStats& s : trajectory.rounds) {
    out << fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{}\n", s.index, s.published_bits,
                       s.blocks, s.overlap_prob, s.avg_before, s.avg_after,
                       s.cells_published);
  }
}

}  // namespace rankprobe
