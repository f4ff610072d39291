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

#include "rankprobe/encoding.h"

#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "rankprobe/entropy.h"
#include "rankprobe/errors.h"
#include "rankprobe/subset_index.h"
#include "toy_structures.h"

namespace rankprobe {
namespace {

using testing::BuildPrefixTable;
using testing::BuildSingleCell;

constexpr uint64_t kSmallN = 12;
const TwoLevelParams kTinyTwoLevel{8, 4};

StructureLayout TinyTwoLevel(const BitArray& a) {
  return BuildTwoLevel(a, kTinyTwoLevel, kTinyWordBits);
}

// Overlap fractions by a different route: explicit probe sets per query.
std::vector<double> SweepOverlaps(const StructureLayout& layout,
                                  const QueryBlocks& blocks) {
  const RankAlgorithm& alg = *layout.algorithm;
  const auto q0 = blocks.QDelta(0);
  const auto p0v = ProbesOfSet(alg, layout.memory, layout.published, q0);
  const std::set<uint64_t> p0(p0v.begin(), p0v.end());
  std::vector<double> out(blocks.block_size(), 0.0);
  for (uint64_t d = 1; d < blocks.block_size(); ++d) {
    int hits = 0;
    for (uint64_t q : blocks.QDelta(d)) {
      const uint64_t single[] = {q};
      for (uint64_t c : ProbesOfSet(alg, layout.memory, layout.published, single)) {
        if (p0.contains(c)) {
          ++hits;
          break;
        }
      }
    }
    out[d] = static_cast<double>(hits) / blocks.k();
  }
  return out;
}

size_t ProbedUnion(const StructureLayout& layout, const QueryBlocks& blocks,
                   const QStarSet& qstar) {
  const RankAlgorithm& alg = *layout.algorithm;
  std::set<uint64_t> all;
  for (uint64_t c : ProbesOfSet(alg, layout.memory, layout.published, blocks.QDelta(0)))
    all.insert(c);
  for (uint64_t c : ProbesOfSet(alg, layout.memory, layout.published, qstar.members))
    all.insert(c);
  return all.size();
}

TEST(ChooseDelta, PrivateProbesPickOne) {
  const BitArray a = BitArray::FromString("0110100111010010");
  const StructureLayout layout = BuildPrefixTable(a);
  const DeltaChoice c = ChooseDelta(layout, QueryBlocks(16, 4));
  EXPECT_EQ(c.delta, 1u);
  EXPECT_EQ(c.overlaps, 0u);
  EXPECT_EQ(c.mean_fraction, 0.0);
}

TEST(ChooseDelta, SharedCellPicksOne) {
  const BitArray a = BitArray::FromString("0110100111010010");
  const StructureLayout layout = BuildSingleCell(a);
  const DeltaChoice c = ChooseDelta(layout, QueryBlocks(16, 4));
  EXPECT_EQ(c.delta, 1u);
  EXPECT_EQ(c.overlaps, 4u);
  EXPECT_EQ(c.chosen_fraction, 1.0);
}

TEST(ChooseDelta, RejectsUnitBlocks) {
  const BitArray a = BitArray::FromString("0110");
  EXPECT_THROW(ChooseDelta(BuildPrefixTable(a), QueryBlocks(4, 4)), ArgumentError);
}

TEST(ChooseDelta, TwoLevelSweepAudit) {
  SeededRng rng(5);
  const BitArray a = BitArray::Random(4096, rng);
  const StructureLayout layout = BuildTwoLevel(a);
  const QueryBlocks blocks(4096, 64);
  const DeltaChoice c = ChooseDelta(layout, blocks);
  const std::vector<double> sweep = SweepOverlaps(layout, blocks);
  double mean = 0;
  for (uint64_t d = 1; d < sweep.size(); ++d) {
    EXPECT_DOUBLE_EQ(c.fractions[d], sweep[d]) << d;
    mean += sweep[d];
  }
  mean /= static_cast<double>(sweep.size() - 1);
  const auto best = std::min_element(sweep.begin() + 1, sweep.end());
  EXPECT_EQ(c.delta, static_cast<uint64_t>(best - sweep.begin()));
  EXPECT_LE(c.chosen_fraction, mean + 1e-12);
  EXPECT_NEAR(c.mean_fraction, mean, 1e-12);
}

TEST(ComputeQStar, ToyExtremes) {
  const BitArray a = BitArray::FromString("0110100111010010");
  const QueryBlocks blocks(16, 4);
  const QStarSet all = ComputeQStar(BuildPrefixTable(a), blocks, 2);
  EXPECT_EQ(all.members, blocks.QDelta(2));
  EXPECT_EQ(all.complement_size, 0u);
  const QStarSet none = ComputeQStar(BuildSingleCell(a), blocks, 2);
  EXPECT_TRUE(none.members.empty());
  EXPECT_EQ(none.excluded_blocks, (std::vector<uint64_t>{0, 1, 2, 3}));
}

TEST(ComputeQStar, DeterministicAndDisjoint) {
  SeededRng rng(9);
  const BitArray a = BitArray::Random(4096, rng);
  const StructureLayout layout = BuildTwoLevel(a);
  const QueryBlocks blocks(4096, 64);
  const QStarSet first = ComputeQStar(layout, blocks, 17);
  const QStarSet second = ComputeQStar(layout, blocks, 17);
  EXPECT_EQ(first.members, second.members);
  EXPECT_EQ(first.members.size() + first.complement_size, blocks.k());
  const auto p0 = ProbesOfSet(*layout.algorithm, layout.memory, layout.published,
                              blocks.QDelta(0));
  const auto ps = ProbesOfSet(*layout.algorithm, layout.memory, layout.published,
                              first.members);
  std::vector<uint64_t> common;
  std::set_intersection(p0.begin(), p0.end(), ps.begin(), ps.end(),
                        std::back_inserter(common));
  EXPECT_TRUE(common.empty());
}

void ExpectRoundTrip(const BitArray& a, const StructureLayout& layout,
                     const QueryBlocks& blocks, const EncodingConfig& config) {
  const EncodingRecord record = Encode(a, layout, blocks, config);
  const auto bits = record.component_bits();
  uint64_t sum = 0;
  for (uint64_t b : bits) sum += b;
  ASSERT_EQ(record.total_bits(), sum);
  ASSERT_EQ(Decode(record, *layout.algorithm, blocks, config), a);
}

TEST(EncodeDecode, ExhaustiveTwelveBitsTwoLevel) {
  const QueryBlocks blocks(kSmallN, 3);
  for (uint64_t v = 0; v < (1u << kSmallN); ++v) {
    const BitArray a = BitArray::FromInteger(v, kSmallN);
    const StructureLayout layout = TinyTwoLevel(a);
    const EncodingRecord record = Encode(a, layout, blocks);
    ASSERT_EQ(Decode(record, *layout.algorithm, blocks), a) << v;
    const QStarSet qstar = ComputeQStar(layout, blocks, record.delta);
    ASSERT_EQ(record.remaining_cells.size(),
              (layout.memory.cell_count() - ProbedUnion(layout, blocks, qstar)) *
                  kTinyWordBits);
    ASSERT_EQ(record.foot_q0.size() + record.foot_qstar.size() +
                  record.remaining_cells.size(),
              layout.memory.total_bits());
  }
}

TEST(EncodeDecode, ExhaustiveTwelveBitsRecursive) {
  const QueryBlocks blocks(kSmallN, 4);
  for (int t = 1; t <= MaxRecursiveDepth(kSmallN, kTinyWordBits); ++t) {
    for (uint64_t v = 0; v < (1u << kSmallN); ++v) {
      const BitArray a = BitArray::FromInteger(v, kSmallN);
      ExpectRoundTrip(a, BuildRecursive(a, t, kTinyWordBits), blocks, {});
    }
  }
}

TEST(EncodeDecode, RandomArraysAt4096) {
  SeededRng rng(21);
  const QueryBlocks blocks(4096, 64);
  for (int trial = 0; trial < 200; ++trial) {
    const BitArray a = BitArray::Random(4096, rng);
    ExpectRoundTrip(a, BuildTwoLevel(a), blocks, {});
    if (trial % 20 == 0) ExpectRoundTrip(a, BuildRecursive(a, 2), blocks, {});
  }
}

TEST(EncodeDecode, ToyStructures) {
  const BitArray a = BitArray::FromString("0110100111010010");
  const QueryBlocks blocks(16, 4);
  const StructureLayout shared = BuildSingleCell(a);
  const EncodingRecord record = Encode(a, shared, blocks);
  EXPECT_TRUE(record.foot_qstar.empty());
  EXPECT_EQ(record.foot_q0.size(), 64u);
  EXPECT_TRUE(record.remaining_cells.empty());
  EXPECT_EQ(Decode(record, *shared.algorithm, blocks), a);
  ExpectRoundTrip(a, BuildPrefixTable(a), blocks, {});
}

TEST(EncodeDecode, FixedDeltaIsHonoured) {
  SeededRng rng(2);
  const BitArray a = BitArray::Random(1024, rng);
  const StructureLayout layout = BuildTwoLevel(a);
  const QueryBlocks blocks(1024, 16);
  EncodingConfig config;
  config.delta = 33;
  EXPECT_EQ(Encode(a, layout, blocks, config).delta, 33u);
  ExpectRoundTrip(a, layout, blocks, config);
  config.delta = 0;
  EXPECT_THROW(Encode(a, layout, blocks, config), ArgumentError);
}

TEST(EncodeDecode, MismatchedArrayRejected) {
  const BitArray a = BitArray::FromString("011010011101");
  BitArray b = a;
  b.set(1, true);
  EXPECT_THROW(Encode(b, TinyTwoLevel(a), QueryBlocks(kSmallN, 3)), ArgumentError);
  EXPECT_THROW(Encode(a, TinyTwoLevel(a), QueryBlocks(11, 3)), ArgumentError);
}

TEST(EncodeDecode, TamperedCellsChangeOutputOrFail) {
  SeededRng rng(4);
  const BitArray a = BitArray::Random(2048, rng);
  const StructureLayout layout = BuildTwoLevel(a);
  const QueryBlocks blocks(2048, 32);
  const EncodingRecord record = Encode(a, layout, blocks);
  for (size_t bit : {size_t{0}, record.remaining_cells.size() / 2,
                     record.remaining_cells.size() - 1}) {
    EncodingRecord tampered = record;
    tampered.remaining_cells.Set(bit, !tampered.remaining_cells.Get(bit));
    try {
      EXPECT_NE(Decode(tampered, *layout.algorithm, blocks), a);
    } catch (const CorruptEncoding&) {
      SUCCEED();
    }
  }
  EncodingRecord truncated = record;
  truncated.remaining_cells.Resize(truncated.remaining_cells.size() - 1);
  EXPECT_THROW(Decode(truncated, *layout.algorithm, blocks), CorruptEncoding);
  EncodingRecord bad_answers = record;
  bad_answers.joint_answers.PushBack(true);
  EXPECT_THROW(Decode(bad_answers, *layout.algorithm, blocks), CorruptEncoding);
}

TEST(RecordFile, BinaryRoundTripAndLayout) {
  const BitArray a = BitArray::FromString("011010011101");
  const StructureLayout layout = TinyTwoLevel(a);
  const EncodingRecord record = Encode(a, layout, QueryBlocks(kSmallN, 3));
  std::stringstream buffer;
  WriteEncodingRecord(buffer, record);
  const std::string bytes = buffer.str();
  size_t expected = 4 + 8;
  for (uint64_t b : record.component_bits()) expected += 8 + (b + 7) / 8;
  EXPECT_EQ(bytes.size(), expected);
  EXPECT_EQ(bytes.substr(0, 4), "RPE1");
  EXPECT_EQ(static_cast<uint8_t>(bytes[4]), record.published.size() & 0xff);
  EXPECT_EQ(ReadEncodingRecord(buffer), record);

  std::stringstream bad("RPE2");
  EXPECT_THROW(ReadEncodingRecord(bad), CorruptEncoding);
  std::stringstream cut(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(ReadEncodingRecord(cut), CorruptEncoding);
}

class EnsembleTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    tables_ = BuildEnsembleTables(TinyTwoLevel, QueryBlocks(kSmallN, 3), 2);
  }
  static std::shared_ptr<const EnsembleTables> tables_;
};
std::shared_ptr<const EnsembleTables> EnsembleTest::tables_;

TEST_F(EnsembleTest, ExhaustiveRoundTripAndShannonFloor) {
  const QueryBlocks blocks(kSmallN, 3);
  EncodingConfig ensemble{FootprintMode::kEnsemble, 2, tables_, 0};
  EncodingConfig verbatim{FootprintMode::kVerbatim, 2, nullptr, 0};
  double total = 0;
  double foot_q0 = 0;
  double verbatim_foot_q0 = 0;
  for (uint64_t v = 0; v < (1u << kSmallN); ++v) {
    const BitArray a = BitArray::FromInteger(v, kSmallN);
    const StructureLayout layout = TinyTwoLevel(a);
    const EncodingRecord record = Encode(a, layout, blocks, ensemble);
    ASSERT_EQ(Decode(record, *layout.algorithm, blocks, ensemble), a);
    const EncodingRecord raw = Encode(a, layout, blocks, verbatim);
    EXPECT_LE(record.foot_q0.size(), raw.foot_q0.size());
    EXPECT_EQ(record.remaining_cells, raw.remaining_cells);
    total += static_cast<double>(record.total_bits());
    foot_q0 += static_cast<double>(record.foot_q0.size());
    verbatim_foot_q0 += static_cast<double>(raw.foot_q0.size());
  }
  const double inputs = 1u << kSmallN;
  EXPECT_GE(total / inputs, kSmallN - 0.01);
  // Conditional footprint cost against probes*w - H(answers) plus one bit of
  // prefix-code overhead; nothing is published for this structure.
  const double bound = verbatim_foot_q0 / inputs -
                       static_cast<double>(Q0Entropy(kSmallN, 3)) + 1.0;
  EXPECT_LE(foot_q0 / inputs, bound);
}

TEST_F(EnsembleTest, ConfigurationErrors) {
  const BitArray a = BitArray::FromString("011010011101");
  const StructureLayout layout = TinyTwoLevel(a);
  const QueryBlocks blocks(kSmallN, 3);
  EncodingConfig missing{FootprintMode::kEnsemble, 2, nullptr, 0};
  EXPECT_THROW(Encode(a, layout, blocks, missing), ArgumentError);
  EncodingConfig wrong_delta{FootprintMode::kEnsemble, 3, tables_, 0};
  EXPECT_THROW(Encode(a, layout, blocks, wrong_delta), ArgumentError);
  EXPECT_THROW(Encode(a, layout, QueryBlocks(kSmallN, 4),
                      EncodingConfig{FootprintMode::kEnsemble, {}, tables_, 0}),
               ArgumentError);
  EXPECT_THROW(BuildEnsembleTables(TwoLevelFamily(), QueryBlocks(32, 4), 1), Refusal);
}

TEST(AccountSizes, IdentityAndBounds) {
  SeededRng rng(8);
  const QueryBlocks blocks(4096, 64);
  std::vector<EncodingRecord> records;
  for (int i = 0; i < 30; ++i) {
    const BitArray a = BitArray::Random(4096, rng);
    records.push_back(Encode(a, BuildTwoLevel(a), blocks));
  }
  const SizeAccounting acc = AccountSizes(records, {4096, 64, 0.05, 0.0});
  EXPECT_EQ(acc.records, 30u);
  EXPECT_NEAR(acc.mean_total, acc.component_sum, 1e-9);
  EXPECT_GE(acc.mean_total, 4096.0);
  EXPECT_NEAR(acc.slack_vs_n, acc.mean_total - 4096.0, 1e-9);
  if (acc.mean_overlap_fraction <= 0.05) {
    EXPECT_TRUE(acc.component2_within_bound);
  }
  double overlap = 0;
  for (const auto& r : records) {
    BitReader in(r.qstar_id);
    overlap += static_cast<double>(in.Read(SubsetHeaderBits(64))) / 64.0;
  }
  EXPECT_NEAR(acc.mean_overlap_fraction, overlap / 30.0, 1e-12);

  records.resize(kMinAccountingRecords - 1);
  EXPECT_THROW(AccountSizes(records, {4096, 64, 0.05, 0.0}), Refusal);
}

}  // namespace
}  // namespace rankprobe
