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

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include <gtest/gtest.h>

#include "rankprobe/errors.h"
#include "rankprobe/prefix_code.h"
#include "rankprobe/random.h"
#include "rankprobe/subset_index.h"

namespace rankprobe {
namespace {

// All size-s subsets of [0, u) in lexicographic order of their sorted lists.
std::vector<std::vector<uint64_t>> LexSubsets(uint64_t u, uint64_t s) {
  std::vector<std::vector<uint64_t>> out;
  std::vector<uint64_t> cur;
  std::function<void(uint64_t)> go = [&](uint64_t from) {
    if (cur.size() == s) {
      out.push_back(cur);
      return;
    }
    for (uint64_t x = from; x < u; ++x) {
      cur.push_back(x);
      go(x + 1);
      cur.pop_back();
    }
  };
  go(0);
  return out;
}

uint64_t SmallBinomial(uint64_t n, uint64_t k) {
  if (k > n) return 0;
  uint64_t r = 1;
  for (uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TEST(SubsetIndex, BinomialMatchesPascal) {
  std::vector<std::vector<uint64_t>> row(40, std::vector<uint64_t>(40, 0));
  for (uint64_t n = 0; n < 40; ++n) {
    row[n][0] = 1;
    for (uint64_t k = 1; k <= n; ++k) row[n][k] = row[n - 1][k - 1] + row[n - 1][k];
    for (uint64_t k = 0; k < 40; ++k) {
      EXPECT_EQ(BinomialBig(n, k), BigInt(row[n][k])) << n << " " << k;
    }
  }
}

TEST(SubsetIndex, RankAndUnrankAgreeWithEnumeration) {
  for (uint64_t u = 0; u <= 10; ++u) {
    for (uint64_t s = 0; s <= u; ++s) {
      const auto all = LexSubsets(u, s);
      ASSERT_EQ(all.size(), SmallBinomial(u, s));
      for (size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(SubsetRank(u, all[i]), BigInt(i)) << u << " " << s;
        EXPECT_EQ(SubsetUnrank(u, s, BigInt(i)), all[i]);
      }
    }
  }
}

TEST(SubsetIndex, IndexWidthIsCeilLog2) {
  for (uint64_t u = 0; u <= 30; ++u) {
    for (uint64_t s = 0; s <= u; ++s) {
      const uint64_t c = SmallBinomial(u, s);
      int expect = 0;
      while ((uint64_t{1} << expect) < c) ++expect;
      EXPECT_EQ(SubsetIndexBits(u, s), expect) << u << " " << s;
    }
  }
}

TEST(SubsetIndex, StreamRoundTripLargeUniverse) {
  SeededRng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const uint64_t u = 1 + rng.Uniform(300);
    std::vector<uint64_t> members;
    for (uint64_t x = 0; x < u; ++x) {
      if (rng.Uniform(4) == 0) members.push_back(x);
    }
    BitString bits;
    AppendSubset(bits, u, members);
    EXPECT_EQ(bits.size(), static_cast<size_t>(SubsetHeaderBits(u) +
                                               SubsetIndexBits(u, members.size())));
    BitReader in(bits);
    EXPECT_EQ(ReadSubset(in, u), members);
    EXPECT_EQ(in.remaining(), 0u);
  }
}

TEST(SubsetIndex, RejectsBadInput) {
  const std::vector<uint64_t> unsorted = {3, 1};
  EXPECT_THROW(SubsetRank(5, unsorted), ArgumentError);
  const std::vector<uint64_t> outside = {5};
  EXPECT_THROW(SubsetRank(5, outside), ArgumentError);
  EXPECT_THROW(SubsetUnrank(5, 2, BigInt(10)), CorruptEncoding);

  BitString truncated;
  truncated.Append(2, SubsetHeaderBits(20));
  BitReader in(truncated);
  EXPECT_THROW(ReadSubset(in, 20), CorruptEncoding);

  BitString oversized;
  oversized.Append(7, SubsetHeaderBits(5));
  BitReader in2(oversized);
  EXPECT_THROW(ReadSubset(in2, 5), CorruptEncoding);
}

// Optimal prefix-code cost by repeated merging; equals the Huffman cost.
uint64_t OptimalCost(std::vector<uint64_t> w) {
  if (w.size() == 1) return 0;
  std::priority_queue<uint64_t, std::vector<uint64_t>, std::greater<>> heap(w.begin(),
                                                                          w.end());
  uint64_t cost = 0;
  while (heap.size() > 1) {
    const uint64_t a = heap.top();
    heap.pop();
    const uint64_t b = heap.top();
    heap.pop();
    cost += a + b;
    heap.push(a + b);
  }
  return cost;
}

double KraftSum(const CanonicalCode& code) {
  double sum = 0;
  for (size_t s = 0; s < code.size(); ++s) sum += std::ldexp(1.0, -code.length(s));
  return sum;
}

TEST(CanonicalCode, OptimalAndComplete) {
  SeededRng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<uint64_t> w(2 + rng.Uniform(60));
    for (auto& x : w) x = 1 + rng.Uniform(1000);
    const CanonicalCode code = CanonicalCode::FromWeights(w);
    uint64_t cost = 0;
    for (size_t s = 0; s < w.size(); ++s) cost += w[s] * code.length(s);
    EXPECT_EQ(cost, OptimalCost(w));
    EXPECT_DOUBLE_EQ(KraftSum(code), 1.0);
  }
}

TEST(CanonicalCode, RoundTripsSymbolSequences) {
  SeededRng rng(11);
  const std::vector<uint64_t> w = {50, 1, 1, 7, 300, 2, 90, 13};
  const CanonicalCode code = CanonicalCode::FromWeights(w);
  std::vector<size_t> symbols(500);
  BitString bits;
  for (auto& s : symbols) {
    s = rng.Uniform(w.size());
    code.Encode(s, bits);
  }
  BitReader in(bits);
  for (size_t s : symbols) EXPECT_EQ(code.Decode(in), s);
  EXPECT_EQ(in.remaining(), 0u);
}

TEST(CanonicalCode, LengthLimitHolds) {
  std::vector<uint64_t> fib = {1, 1};
  while (fib.size() < 40) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
  const CanonicalCode code = CanonicalCode::FromWeights(fib, 10);
  for (size_t s = 0; s < fib.size(); ++s) EXPECT_LE(code.length(s), 10);
  EXPECT_LE(KraftSum(code), 1.0);
  BitString bits;
  for (size_t s = 0; s < fib.size(); ++s) code.Encode(s, bits);
  BitReader in(bits);
  for (size_t s = 0; s < fib.size(); ++s) EXPECT_EQ(code.Decode(in), s);
}

TEST(CanonicalCode, SingleSymbolIsFree) {
  const std::vector<uint64_t> w = {5};
  const CanonicalCode code = CanonicalCode::FromWeights(w);
  BitString bits;
  code.Encode(0, bits);
  EXPECT_TRUE(bits.empty());
  BitReader in(bits);
  EXPECT_EQ(code.Decode(in), 0u);
}

TEST(CanonicalCode, InvalidCodewordsAreReported) {
  const std::vector<uint64_t> w = {4, 2, 1, 1};
  const CanonicalCode code = CanonicalCode::FromWeights(w);
  BitString empty;
  BitReader in(empty);
  EXPECT_THROW(code.Decode(in), CorruptEncoding);
  EXPECT_THROW(code.Encode(9, empty), ArgumentError);
  const std::vector<uint64_t> none;
  EXPECT_THROW(CanonicalCode::FromWeights(none), ArgumentError);
}

TEST(BinomialIncrementCode, ExpectedLengthWithinOneBitOfEntropy) {
  for (uint64_t len : {1, 2, 5, 16, 64, 500}) {
    const auto code = BinomialIncrementCode(len);
    ASSERT_EQ(code->size(), len + 1);
    double h = 0;
    double mean = 0;
    for (uint64_t i = 0; i <= len; ++i) {
      const double p = std::exp(std::lgamma(len + 1.0) - std::lgamma(i + 1.0) -
                                std::lgamma(len - i + 1.0) - len * std::log(2.0));
      if (p > 0) h -= p * std::log2(p);
      mean += p * code->length(i);
    }
    EXPECT_GE(mean, h - 1e-9) << len;
    EXPECT_LT(mean, h + 1.0) << len;
  }
}

}  // namespace
}  // namespace rankprobe
