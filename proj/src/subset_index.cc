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

#include "rankprobe/subset_index.h"

#include <algorithm>

#include "rankprobe/errors.h"

namespace rankprobe {

BigInt BinomialBig(uint64_t n, uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (uint64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

BigInt SubsetRank(uint64_t universe, std::span<const uint64_t> members) {
  const uint64_t s = members.size();
  BigInt rank = 0;
  int64_t previous = -1;
  for (uint64_t i = 0; i < s; ++i) {
    const uint64_t c = members[i];
    if (c >= universe || static_cast<int64_t>(c) <= previous) {
      throw ArgumentError("subset members must be sorted, distinct, in range");
    }
    // Subsets agreeing on the first i elements whose next element lies in
    // (previous, c): a hockey-stick sum of C(universe - 1 - x, s - i - 1).
    const uint64_t r = s - i;
    rank += BinomialBig(static_cast<uint64_t>(static_cast<int64_t>(universe) - 1 - previous), r) -
            BinomialBig(universe - c, r);
    previous = static_cast<int64_t>(c);
  }
  return rank;
}

std::vector<uint64_t> SubsetUnrank(uint64_t universe, uint64_t size,
                                   const BigInt& rank) {
  if (size > universe || rank < 0 || rank >= BinomialBig(universe, size)) {
    throw CorruptEncoding("subset index out of range");
  }
  std::vector<uint64_t> out;
  BigInt rest = rank;
  uint64_t x = 0;
  for (uint64_t i = 0; i < size; ++i) {
    for (;; ++x) {
      const BigInt block = BinomialBig(universe - 1 - x, size - i - 1);
      if (rest < block) break;
      rest -= block;
    }
    out.push_back(x++);
  }
  return out;
}

int SubsetIndexBits(uint64_t universe, uint64_t size) {
  const BigInt c = BinomialBig(universe, size);
  if (c <= 1) return 0;
  return static_cast<int>(boost::multiprecision::msb(BigInt(c - 1))) + 1;
}

int SubsetHeaderBits(uint64_t universe) { return BitWidth(universe); }

void AppendSubset(BitString& out, uint64_t universe,
                  std::span<const uint64_t> members) {
  out.Append(members.size(), SubsetHeaderBits(universe));
  BigInt rank = SubsetRank(universe, members);
  int width = SubsetIndexBits(universe, members.size());
  while (width > 0) {
    const int chunk = std::min(width, 64);
    out.Append(static_cast<uint64_t>(rank & BigInt(~uint64_t{0})), chunk);
    rank >>= 64;
    width -= chunk;
  }
}

std::vector<uint64_t> ReadSubset(BitReader& in, uint64_t universe) {
  const int header = SubsetHeaderBits(universe);
  if (in.remaining() < static_cast<size_t>(header)) {
    throw CorruptEncoding("subset header truncated");
  }
  const uint64_t size = in.Read(header);
  if (size > universe) throw CorruptEncoding("subset larger than its universe");
  const int width = SubsetIndexBits(universe, size);
  if (in.remaining() < static_cast<size_t>(width)) {
    throw CorruptEncoding("subset index truncated");
  }
  BigInt rank = 0;
  for (int done = 0; done < width; done += 64) {
    const int chunk = std::min(width - done, 64);
    rank |= BigInt(in.Read(chunk)) << done;
  }
  return SubsetUnrank(universe, size, rank);
}

}  // namespace rankprobe
