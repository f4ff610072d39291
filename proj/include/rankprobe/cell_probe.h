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
// File: cell_probe.h
// -----------------------------------------------------------------------------
//
// An instrumented cell-probe model. Memory is an array of w-bit cells; a query
// algorithm is a step function that, given the query, the published bits and
// the (address, content) pairs read so far, either names the next cell to read
// or returns the answer. Because the next address can only depend on those
// three inputs, every execution is replayable, which is what footprints and
// the encoding engine rely on.
//
// Published bits are free to read. Cells that have been published together
// with their address are served from the published records instead of memory
// and do not count as probes.

#ifndef RANKPROBE_CELL_PROBE_H_
#define RANKPROBE_CELL_PROBE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rankprobe/bit_string.h"

namespace rankprobe {

inline constexpr int kDefaultWordBits = 64;
// Small word size used for exhaustive enumeration at n <= 12.
inline constexpr int kTinyWordBits = 8;

class CellMemory {
 public:
  CellMemory() = default;
  // Throws ArgumentError unless 1 <= word_bits <= 64 and every cell fits.
  CellMemory(int word_bits, std::vector<uint64_t> cells);

  int word_bits() const { return word_bits_; }
  uint64_t cell_count() const { return cells_.size(); }
  // Width of an address field: ceil(log2(cell_count)).
  int address_bits() const { return CeilLog2(cells_.size()); }
  uint64_t total_bits() const { return cells_.size() * word_bits_; }

  // Throws SimulationFault when out of range.
  uint64_t Get(uint64_t address) const;
  std::span<const uint64_t> cells() const { return cells_; }

  // Checks the model's w >= lg n requirement for an array of n bits.
  bool ServesArrayOf(uint64_t n) const { return word_bits_ >= CeilLog2(n); }

 private:
  int word_bits_ = kDefaultWordBits;
  std::vector<uint64_t> cells_;
};

// The free-access bit string. It is a base string written at construction
// time followed by zero or more published cell records, each holding an
// address (address_bits wide) then the cell's content (word_bits wide).
class PublishedBits {
 public:
  PublishedBits() = default;
  explicit PublishedBits(BitString base) : base_(std::move(base)) {}

  // Total bits, base plus records.
  uint64_t length() const;

  const BitString& base() const { return base_; }
  const std::vector<std::pair<uint64_t, uint64_t>>& records() const {
    return records_;
  }
  int record_address_bits() const { return address_bits_; }
  int record_word_bits() const { return word_bits_; }

  std::optional<uint64_t> Lookup(uint64_t address) const;
  bool IsPublished(uint64_t address) const { return index_.contains(address); }

  // Appends one record. All records must share the same field widths.
  void AddRecord(uint64_t address, uint64_t content, int address_bits,
                 int word_bits);

  // Flat bit string: base ++ records.
  BitString Bits() const;
  // Inverse of Bits() given the base length and record field widths.
  static PublishedBits FromBits(const BitString& bits, uint64_t base_length,
                                int address_bits, int word_bits);

 private:
  BitString base_;
  std::vector<std::pair<uint64_t, uint64_t>> records_;
  std::unordered_map<uint64_t, uint64_t> index_;
  int address_bits_ = -1;
  int word_bits_ = -1;
};

struct ProbeStep {
  uint64_t address = 0;
  uint64_t content = 0;
  // True when the content came from a published record at zero cost.
  bool published = false;

  bool operator==(const ProbeStep&) const = default;
};

struct ProbeTrace {
  uint64_t query = 0;
  std::vector<ProbeStep> steps;
  uint64_t answer = 0;

  // Charged probes, i.e. steps not served by published records.
  size_t probe_count() const;
  // Probes(q): distinct charged addresses, sorted.
  std::vector<uint64_t> ProbedAddresses() const;

  bool operator==(const ProbeTrace&) const = default;
};

struct QueryStep {
  enum class Kind { kProbe, kAnswer };
  Kind kind = Kind::kAnswer;
  uint64_t value = 0;

  static QueryStep Probe(uint64_t address) { return {Kind::kProbe, address}; }
  static QueryStep Answer(uint64_t v) { return {Kind::kAnswer, v}; }
};

// A deterministic query algorithm. Implementations hold only parameters that
// do not depend on the stored input.
class QueryAlgorithm {
 public:
  virtual ~QueryAlgorithm() = default;

  virtual QueryStep Next(uint64_t query, const PublishedBits& published,
                         std::span<const ProbeStep> reads) const = 0;

  // Valid queries are [0, max_query()].
  virtual uint64_t max_query() const = 0;

  // Number of memory cells the algorithm expects to address.
  virtual uint64_t cell_count() const = 0;

  virtual int word_bits() const = 0;

  // Guard against algorithms that never answer.
  virtual size_t step_limit() const { return 1 << 16; }
};

// Reads one cell and records it in `trace`. Throws SimulationFault when the
// address is out of range.
uint64_t Probe(const CellMemory& memory, ProbeTrace& trace, uint64_t address);

// Executes `query` to completion.
ProbeTrace RunQuery(const QueryAlgorithm& algorithm, const CellMemory& memory,
                    const PublishedBits& published, uint64_t query);

// Partition of the query universe [0, n) into k equal blocks. Queries at or
// beyond k * block_size belong to no block but stay answerable.
class QueryBlocks {
 public:
  // Throws ArgumentError unless 1 <= k <= n.
  QueryBlocks(uint64_t n, uint64_t k);

  uint64_t n() const { return n_; }
  uint64_t k() const { return k_; }
  uint64_t block_size() const { return block_size_; }

  // { b * block_size + delta : b in [0, k) }, increasing.
  std::vector<uint64_t> QDelta(uint64_t delta) const;

 private:
  uint64_t n_;
  uint64_t k_;
  uint64_t block_size_;
};

// Probes(Q): union of charged addresses over the queries, sorted.
std::vector<uint64_t> ProbesOfSet(const QueryAlgorithm& algorithm,
                                  const CellMemory& memory,
                                  const PublishedBits& published,
                                  std::span<const uint64_t> queries);

struct Footprint {
  BitString bits;
  uint64_t probed_cell_count = 0;
  int word_bits = kDefaultWordBits;
};

// Contents of first-seen charged cells while running the queries in increasing
// order. Throws ArgumentError on an empty query set.
Footprint BuildFootprint(const QueryAlgorithm& algorithm,
                         const CellMemory& memory,
                         const PublishedBits& published,
                         std::span<const uint64_t> queries);

struct ReplayResult {
  std::map<uint64_t, uint64_t> answers;
  // Cells recovered from the footprint, in first-seen order.
  std::vector<std::pair<uint64_t, uint64_t>> cells;
};

// Recomputes the answers of `queries` from a footprint and the published bits
// alone. Throws CorruptFootprint if the footprint runs out early or has
// leftover words.
ReplayResult ReplayFromFootprint(const Footprint& footprint,
                                 const PublishedBits& published,
                                 std::span<const uint64_t> queries,
                                 const QueryAlgorithm& algorithm);

// Appends one (address, content) record per address, in the given order.
// Growth is exactly |addresses| * (word_bits + address_bits).
PublishedBits PublishCells(const CellMemory& memory,
                           const PublishedBits& published,
                           std::span<const uint64_t> addresses);

}  // namespace rankprobe

#endif  // RANKPROBE_CELL_PROBE_H_
