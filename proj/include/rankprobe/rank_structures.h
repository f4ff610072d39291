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
//
// -----------------------------------------------------------------------------
// File: rank_structures.h
// -----------------------------------------------------------------------------
//
// Rank data structures laid out in a CellMemory and queried through the
// cell-probe simulator. Query q asks for Rank(q), q in [0, n].
//
//   * naive:      raw bits only; Rank(k) scans ceil(k/w) cells.
//   * two_level:  raw bits + one absolute count per superblock + packed
//                 relative counts per block. At most 2 + ceil(B/w) probes.
//   * recursive:  a t-level counting tree whose nodes store their content
//                 entropy-coded together with the counts of their children.
//                 Each node writes a fixed-width field and hands a small
//                 residual ("spill") to its parent, which folds it into its
//                 own code.
//                 Only the top level keeps explicit fields (absolute count and
//                 spill), so each extra level divides the redundancy by
//                 roughly the fanout at the cost of about one more probe.

#ifndef RANKPROBE_RANK_STRUCTURES_H_
#define RANKPROBE_RANK_STRUCTURES_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankprobe/bit_array.h"
#include "rankprobe/cell_probe.h"

namespace rankprobe {

enum class StructureKind { kNaive, kTwoLevel, kRecursive };

std::string StructureKindName(StructureKind kind);
// Accepts "naive", "two_level", "recursive". Throws ArgumentError otherwise.
StructureKind ParseStructureKind(const std::string& name);

// Base class for the rank query algorithms. All three structures read a fixed
// address sequence determined by k; the content read so far is only needed to
// compute the answer.
class RankAlgorithm : public QueryAlgorithm {
 public:
  explicit RankAlgorithm(uint64_t n, int word_bits)
      : n_(n), word_bits_(word_bits) {}

  uint64_t n() const { return n_; }
  uint64_t max_query() const override { return n_; }
  int word_bits() const override { return word_bits_; }

  QueryStep Next(uint64_t query, const PublishedBits& published,
                 std::span<const ProbeStep> reads) const final;

  // Declared worst-case number of cell reads for any k in [0, n].
  virtual uint64_t worst_probes() const = 0;
  virtual StructureKind kind() const = 0;

 protected:
  // The step-th address read by Rank(k), or nullopt once all are read.
  virtual std::optional<uint64_t> AddressAt(uint64_t k, size_t step) const = 0;
  virtual uint64_t Answer(uint64_t k,
                          std::span<const ProbeStep> reads) const = 0;

 private:
  uint64_t n_;
  int word_bits_;
};

struct StructureLayout {
  std::shared_ptr<const RankAlgorithm> algorithm;
  CellMemory memory;
  PublishedBits published;
  // Cells holding auxiliary data (counters, directories); the raw or encoded
  // payload lives elsewhere.
  std::vector<uint64_t> redundancy_region;

  uint64_t n() const { return algorithm->n(); }
  uint64_t total_bits() const {
    return memory.total_bits() + published.length();
  }
  int64_t redundancy_bits() const {
    return static_cast<int64_t>(total_bits()) - static_cast<int64_t>(n());
  }
  // Cell bits outside the redundancy region.
  uint64_t payload_bits() const {
    return memory.total_bits() -
           redundancy_region.size() * static_cast<uint64_t>(memory.word_bits());
  }
};

struct StructureStats {
  int64_t redundancy_bits = 0;
  uint64_t worst_probes = 0;     // declared
  uint64_t observed_worst = 0;   // max over the sweep
  double avg_probes = 0.0;       // mean charged probes over the sweep
  uint64_t queries_measured = 0;
};

struct QuerySample {
  // Exhaustive sweep over q in [0, n) when true; otherwise `samples` uniform
  // draws from [0, n).
  bool exhaustive = true;
  uint64_t samples = 0;
  uint64_t seed = 1;
};

struct TwoLevelParams {
  uint64_t superblock_bits = 512;
  uint64_t block_bits = 64;
};

struct RecursiveParams {
  // 0 picks w + w/4.
  uint64_t leaf_bits = 0;
  uint64_t fanout = 5;
  // Minimum log2 of (spill universe / count range) a node keeps after writing
  // its field. Larger values lose less information per node.
  double slack_bits = 4.0;
};

StructureLayout BuildNaive(const BitArray& a, int word_bits = kDefaultWordBits);

// Throws ArgumentError unless both sizes are powers of two, block divides
// superblock, and counters fit a word.
StructureLayout BuildTwoLevel(const BitArray& a, TwoLevelParams params = {},
                              int word_bits = kDefaultWordBits);

// Throws ArgumentError if t < 1 or t > MaxRecursiveDepth(n, ...), or if the
// node codes would not fit 127-bit arithmetic.
StructureLayout BuildRecursive(const BitArray& a, int t,
                               int word_bits = kDefaultWordBits,
                               RecursiveParams params = {});

// Smallest t whose top level is a single node; deeper trees add nothing, so
// this is the largest accepted t.
int MaxRecursiveDepth(uint64_t n, int word_bits = kDefaultWordBits,
                      RecursiveParams params = {});

struct RankResult {
  uint64_t answer = 0;
  ProbeTrace trace;
};

// Rank(k) through the simulator, 0 <= k <= n.
RankResult Rank(const StructureLayout& layout, uint64_t k);

StructureStats ComputeStats(const StructureLayout& layout,
                            const QuerySample& sample = {});

// Builds one structure instance per input array; the elimination driver and
// the encoding engine take these so they can instantiate fresh arrays.
using StructureFamily = std::function<StructureLayout(const BitArray&)>;

StructureFamily NaiveFamily(int word_bits = kDefaultWordBits);
StructureFamily TwoLevelFamily(TwoLevelParams params = {},
                               int word_bits = kDefaultWordBits);
StructureFamily RecursiveFamily(int t, int word_bits = kDefaultWordBits,
                                RecursiveParams params = {});

}  // namespace rankprobe

#endif  // RANKPROBE_RANK_STRUCTURES_H_
