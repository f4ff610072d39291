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

// -----------------------------------------------------------------------------
// File: encoding.h
// -----------------------------------------------------------------------------
//
// A lossless six-part encoding of the input array of a rank structure, built
// from the structure's own probe behaviour on two query sets:
//
//   Q0 = { b*m : b in [0, k) }         and   Q* = the members of
//   Q_delta = { b*m + delta }          whose probes avoid Probes(Q0).
//
// The parts, in stream order:
//
//   1. published bits
//   2. the blocks of Q_delta that are not in Q* (size header + subset index)
//   3. answers to Q0 and Q*, as prefix-coded binomial increments
//   4. footprint of Q0
//   5. footprint of Q*
//   6. every other cell, w bits each, by increasing address
//
// Parts 4 and 5 are either stored raw (kVerbatim) or coded with exact
// conditional tables built by enumerating every input of a small n
// (kEnsemble). Part 3 always uses the binomial increment model, which is the
// exact answer distribution for uniform inputs.
//
// The decoder rebuilds the whole cell memory and recovers A from the n+1
// rank answers. Each part is self-delimiting given the ones before it, so
// the concatenation is a prefix code.

#ifndef RANKPROBE_ENCODING_H_
#define RANKPROBE_ENCODING_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rankprobe/bit_array.h"
#include "rankprobe/bit_string.h"
#include "rankprobe/cell_probe.h"
#include "rankprobe/prefix_code.h"
#include "rankprobe/rank_structures.h"

namespace rankprobe {

inline constexpr int kEncodingComponents = 6;

struct EncodingRecord {
  BitString published;        // 1
  BitString qstar_id;         // 2
  BitString joint_answers;    // 3
  BitString foot_q0;          // 4
  BitString foot_qstar;       // 5
  BitString remaining_cells;  // 6
  uint64_t delta = 0;

  const BitString& component(int i) const;
  std::array<uint64_t, kEncodingComponents> component_bits() const;
  uint64_t total_bits() const;

  bool operator==(const EncodingRecord&) const = default;
};

// Binary form: "RPE1", then each component as an 8-byte little-endian bit
// length followed by its bytes, then delta as 8 little-endian bytes.
void WriteEncodingRecord(std::ostream& out, const EncodingRecord& record);
// Throws CorruptEncoding on a bad magic or a truncated stream.
EncodingRecord ReadEncodingRecord(std::istream& in);
void SaveEncodingRecord(const std::string& path, const EncodingRecord& record);
EncodingRecord LoadEncodingRecord(const std::string& path);

struct DeltaChoice {
  uint64_t delta = 1;
  // Blocks whose Q_delta query shares a probed cell with Q0, at `delta`.
  uint64_t overlaps = 0;
  double chosen_fraction = 0.0;
  double mean_fraction = 0.0;
  // fractions[d] for every d in [1, m); index 0 is unused.
  std::vector<double> fractions;
};

// Sweeps delta over [1, m) and keeps the smallest minimizer of the overlap
// fraction. Throws ArgumentError when m < 2.
DeltaChoice ChooseDelta(const StructureLayout& layout,
                        const QueryBlocks& blocks);

struct QStarSet {
  uint64_t delta = 0;
  std::vector<uint64_t> members;
  // Block indices of Q_delta left out of Q*, increasing.
  std::vector<uint64_t> excluded_blocks;
  uint64_t complement_size = 0;
};

QStarSet ComputeQStar(const StructureLayout& layout, const QueryBlocks& blocks,
                      uint64_t delta);

enum class FootprintMode { kVerbatim, kEnsemble };

std::string FootprintModeName(FootprintMode mode);

// Conditional code tables for parts 4 and 5 over every input of length n.
class EnsembleTables {
 public:
  struct Table {
    std::vector<BitString> footprints;
    std::map<std::string, size_t> index;
    std::shared_ptr<const CanonicalCode> code;
  };

  uint64_t n() const { return n_; }
  uint64_t k() const { return k_; }
  uint64_t delta() const { return delta_; }
  uint64_t inputs() const { return inputs_; }

  // Null when the context never occurs.
  const Table* FindQ0(const std::string& context) const;
  const Table* FindQStar(const std::string& context) const;

  size_t q0_contexts() const { return q0_.size(); }
  size_t qstar_contexts() const { return qstar_.size(); }

 private:
  friend std::shared_ptr<const EnsembleTables> BuildEnsembleTables(
      const StructureFamily&, const QueryBlocks&, uint64_t);

  uint64_t n_ = 0;
  uint64_t k_ = 0;
  uint64_t delta_ = 0;
  uint64_t inputs_ = 0;
  std::map<std::string, Table> q0_;
  std::map<std::string, Table> qstar_;
};

inline constexpr uint64_t kMaxEnsembleBits = 16;

// Enumerates all 2^n inputs. Throws Refusal for n > kMaxEnsembleBits.
std::shared_ptr<const EnsembleTables> BuildEnsembleTables(
    const StructureFamily& family, const QueryBlocks& blocks, uint64_t delta);

struct EncodingConfig {
  FootprintMode mode = FootprintMode::kVerbatim;
  // Required in kEnsemble mode and must equal the tables' delta. When unset,
  // the encoder runs ChooseDelta.
  std::optional<uint64_t> delta;
  std::shared_ptr<const EnsembleTables> tables;
  // Length of the construction-time published string; records follow it.
  uint64_t published_base_bits = 0;
};

// Throws ArgumentError when the layout does not answer like `a` on the
// encoded queries, or when the configuration does not fit the layout.
EncodingRecord Encode(const BitArray& a, const StructureLayout& layout,
                      const QueryBlocks& blocks,
                      const EncodingConfig& config = {});

// Throws CorruptEncoding on any inconsistency.
BitArray Decode(const EncodingRecord& record, const RankAlgorithm& algorithm,
                const QueryBlocks& blocks, const EncodingConfig& config = {});

struct SizeAccounting {
  uint64_t records = 0;
  std::array<double, kEncodingComponents> mean_component{};
  double mean_total = 0.0;
  double component_sum = 0.0;
  double mean_overlap_fraction = 0.0;
  // lg C(k, ceil(eps*k)) + header bits.
  double component2_bound = 0.0;
  bool component2_within_bound = false;
  // n + 3P + k*eps*lg(1/eps) - deficit with P the mean published length.
  double predicted_total = 0.0;
  double slack_vs_n = 0.0;
};

struct AccountingInputs {
  uint64_t n = 0;
  uint64_t k = 0;
  double epsilon = 0.05;
  double deficit = 0.0;
};

// Throws Refusal for fewer than kMinAccountingRecords records.
inline constexpr size_t kMinAccountingRecords = 10;
SizeAccounting AccountSizes(const std::vector<EncodingRecord>& records,
                            const AccountingInputs& inputs);

}  // namespace rankprobe

#endif  // RANKPROBE_ENCODING_H_
