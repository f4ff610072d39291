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

#include "rankprobe/rank_structures.h"

#include <algorithm>
#include <bit>
#include <numeric>

#include "rankprobe/errors.h"
#include "rankprobe/random.h"

namespace rankprobe {

std::string StructureKindName(StructureKind kind) {
  switch (kind) {
    case StructureKind::kNaive:
      return "naive";
    case StructureKind::kTwoLevel:
      return "two_level";
    case StructureKind::kRecursive:
      return "recursive";
  }
  return "unknown";
}

StructureKind ParseStructureKind(const std::string& name) {
  if (name == "naive") return StructureKind::kNaive;
  if (name == "two_level") return StructureKind::kTwoLevel;
  if (name == "recursive") return StructureKind::kRecursive;
  throw ArgumentError("unknown structure '" + name + "'");
}

QueryStep RankAlgorithm::Next(uint64_t query, const PublishedBits&,
                              std::span<const ProbeStep> reads) const {
  if (auto address = AddressAt(query, reads.size())) {
    return QueryStep::Probe(*address);
  }
  return QueryStep::Answer(Answer(query, reads));
}

namespace {

uint64_t LowMask(int width) {
  return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

std::vector<uint64_t> PackRawBits(const BitArray& a, int w) {
  const uint64_t n = a.size();
  std::vector<uint64_t> cells((n + w - 1) / w, 0);
  for (uint64_t c = 0; c < cells.size(); ++c) {
    const uint64_t start = c * w;
    const int width = static_cast<int>(std::min<uint64_t>(w, n - start));
    cells[c] = a.bits().Read(start, width);
  }
  return cells;
}

// Ones among bit positions [from, to) held in raw cell `cell`.
uint64_t CountInCell(uint64_t content, uint64_t cell, int w, uint64_t from,
                     uint64_t to) {
  const uint64_t lo = std::max(from, cell * w);
  const uint64_t hi = std::min(to, (cell + 1) * w);
  if (lo >= hi) return 0;
  const int shift = static_cast<int>(lo - cell * w);
  const int width = static_cast<int>(hi - lo);
  return std::popcount((content >> shift) & LowMask(width));
}

class NaiveAlgorithm final : public RankAlgorithm {
 public:
  NaiveAlgorithm(uint64_t n, int w) : RankAlgorithm(n, w) {}

  uint64_t cell_count() const override {
    return (n() + word_bits() - 1) / word_bits();
  }
  uint64_t worst_probes() const override { return cell_count(); }
  StructureKind kind() const override { return StructureKind::kNaive; }

 protected:
  std::optional<uint64_t> AddressAt(uint64_t k, size_t step) const override {
    const uint64_t needed = (k + word_bits() - 1) / word_bits();
    if (step < needed) return step;
    return std::nullopt;
  }

  uint64_t Answer(uint64_t k, std::span<const ProbeStep> reads) const override {
    uint64_t sum = 0;
    for (const ProbeStep& s : reads) {
      sum += CountInCell(s.content, s.address, word_bits(), 0, k);
    }
    return sum;
  }
};

// Cells: [raw bits][superblock counts, one per cell][block counts, packed].
class TwoLevelAlgorithm final : public RankAlgorithm {
 public:
  TwoLevelAlgorithm(uint64_t n, int w, TwoLevelParams p)
      : RankAlgorithm(n, w), p_(p) {
    raw_cells_ = (n + w - 1) / w;
    superblocks_ = n / p.superblock_bits + 1;
    blocks_ = n / p.block_bits + 1;
    counter_width_ = CeilLog2(p.superblock_bits);
    if (counter_width_ == 0) counter_width_ = 1;
    per_cell_ = w / counter_width_;
    block_cells_ = (blocks_ + per_cell_ - 1) / per_cell_;
    const uint64_t g = std::gcd<uint64_t>(p.block_bits, w);
    raw_span_ = (p.block_bits - 1 + w - g) / w + 1;
  }

  uint64_t cell_count() const override {
    return raw_cells_ + superblocks_ + block_cells_;
  }
  uint64_t worst_probes() const override { return 2 + raw_span_; }
  StructureKind kind() const override { return StructureKind::kTwoLevel; }

  uint64_t raw_cells() const { return raw_cells_; }
  uint64_t superblocks() const { return superblocks_; }
  uint64_t blocks() const { return blocks_; }
  uint64_t per_cell() const { return per_cell_; }
  int counter_width() const { return counter_width_; }
  uint64_t superblock_base() const { return raw_cells_; }
  uint64_t block_base() const { return raw_cells_ + superblocks_; }

 protected:
  std::optional<uint64_t> AddressAt(uint64_t k, size_t step) const override {
    if (k == 0) return std::nullopt;
    if (step == 0) return superblock_base() + k / p_.superblock_bits;
    const uint64_t block = k / p_.block_bits;
    if (step == 1) return block_base() + block / per_cell_;
    const uint64_t start = block * p_.block_bits;
    if (start == k) return std::nullopt;
    const uint64_t first = start / word_bits();
    const uint64_t last = (k - 1) / word_bits();
    const uint64_t cell = first + (step - 2);
    if (cell > last) return std::nullopt;
    return cell;
  }

  uint64_t Answer(uint64_t k, std::span<const ProbeStep> reads) const override {
    if (k == 0) return 0;
    const uint64_t block = k / p_.block_bits;
    const int shift = static_cast<int>((block % per_cell_) * counter_width_);
    uint64_t sum = reads[0].content;
    sum += (reads[1].content >> shift) & LowMask(counter_width_);
    const uint64_t start = block * p_.block_bits;
    for (size_t i = 2; i < reads.size(); ++i) {
      sum += CountInCell(reads[i].content, reads[i].address, word_bits(),
                         start, k);
    }
    return sum;
  }

 private:
  TwoLevelParams p_;
  uint64_t raw_cells_;
  uint64_t superblocks_;
  uint64_t blocks_;
  int counter_width_;
  uint64_t per_cell_;
  uint64_t block_cells_;
  uint64_t raw_span_;
};

}  // namespace

StructureLayout BuildNaive(const BitArray& a, int word_bits) {
  auto algorithm = std::make_shared<NaiveAlgorithm>(a.size(), word_bits);
  StructureLayout layout{algorithm, CellMemory(word_bits, PackRawBits(a, word_bits)),
                         PublishedBits(), {}};
  return layout;
}

StructureLayout BuildTwoLevel(const BitArray& a, TwoLevelParams params,
                              int word_bits) {
  const uint64_t sb = params.superblock_bits;
  const uint64_t b = params.block_bits;
  if (!std::has_single_bit(sb) || !std::has_single_bit(b) || b > sb) {
    throw ArgumentError(
        "two_level needs power-of-two block <= superblock sizes");
  }
  if (word_bits < 1 || word_bits > 64) throw ArgumentError("bad word_bits");
  if (BitWidth(a.size()) > word_bits) {
    throw ArgumentError("superblock counts do not fit a word");
  }
  if (CeilLog2(sb) > word_bits) {
    throw ArgumentError("block counters do not fit a word");
  }
  const uint64_t n = a.size();
  auto algorithm = std::make_shared<TwoLevelAlgorithm>(n, word_bits, params);

  std::vector<uint64_t> cells = PackRawBits(a, word_bits);
  cells.resize(algorithm->cell_count(), 0);
  // prefix[j] = Rank(min(n, j * b)).
  std::vector<uint64_t> prefix(algorithm->blocks(), 0);
  for (uint64_t j = 1; j < prefix.size(); ++j) {
    const uint64_t lo = std::min(n, (j - 1) * b);
    const uint64_t hi = std::min(n, j * b);
    uint64_t ones = 0;
    for (uint64_t pos = lo; pos < hi; pos += 64) {
      const int width = static_cast<int>(std::min<uint64_t>(64, hi - pos));
      ones += std::popcount(a.bits().Read(pos, width));
    }
    prefix[j] = prefix[j - 1] + ones;
  }
  const uint64_t blocks_per_superblock = sb / b;
  for (uint64_t s = 0; s < algorithm->superblocks(); ++s) {
    const uint64_t j = std::min(s * blocks_per_superblock, prefix.size() - 1);
    cells[algorithm->superblock_base() + s] =
        s * sb >= n ? RankOracle(a, n) : prefix[j];
  }
  const int width = algorithm->counter_width();
  for (uint64_t j = 0; j < algorithm->blocks(); ++j) {
    const uint64_t sb_first = (j / blocks_per_superblock) * blocks_per_superblock;
    const uint64_t rel = prefix[j] - prefix[sb_first];
    const uint64_t cell = algorithm->block_base() + j / algorithm->per_cell();
    cells[cell] |= rel << ((j % algorithm->per_cell()) * width);
  }

  std::vector<uint64_t> region;
  for (uint64_t c = algorithm->raw_cells(); c < algorithm->cell_count(); ++c) {
    region.push_back(c);
  }
  return StructureLayout{algorithm, CellMemory(word_bits, std::move(cells)),
                         PublishedBits(), std::move(region)};
}

RankResult Rank(const StructureLayout& layout, uint64_t k) {
  if (k > layout.n()) throw ArgumentError("rank argument exceeds n");
  RankResult result;
  result.trace = RunQuery(*layout.algorithm, layout.memory, layout.published, k);
  result.answer = result.trace.answer;
  return result;
}

StructureStats ComputeStats(const StructureLayout& layout,
                            const QuerySample& sample) {
  StructureStats stats;
  stats.redundancy_bits = layout.redundancy_bits();
  stats.worst_probes = layout.algorithm->worst_probes();
  const uint64_t n = layout.n();
  uint64_t total = 0;
  auto measure = [&](uint64_t q) {
    const uint64_t probes =
        RunQuery(*layout.algorithm, layout.memory, layout.published, q)
            .probe_count();
    total += probes;
    stats.observed_worst = std::max(stats.observed_worst, probes);
    ++stats.queries_measured;
  };
  if (sample.exhaustive) {
    for (uint64_t q = 0; q < n; ++q) measure(q);
  } else {
    SeededRng rng(sample.seed);
    for (uint64_t i = 0; i < sample.samples; ++i) measure(rng.Uniform(n));
  }
  if (stats.queries_measured > 0) {
    stats.avg_probes = static_cast<double>(total) / stats.queries_measured;
  }
  return stats;
}

StructureFamily NaiveFamily(int word_bits) {
  return [word_bits](const BitArray& a) { return BuildNaive(a, word_bits); };
}

StructureFamily TwoLevelFamily(TwoLevelParams params, int word_bits) {
  return [params, word_bits](const BitArray& a) {
    return BuildTwoLevel(a, params, word_bits);
  };
}

StructureFamily RecursiveFamily(int t, int word_bits, RecursiveParams params) {
  return [t, word_bits, params](const BitArray& a) {
    return BuildRecursive(a, t, word_bits, params);
  };
}

}  // namespace rankprobe
