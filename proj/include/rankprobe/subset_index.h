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

// Lexicographic numbering of fixed-size subsets of [0, universe).

#ifndef RANKPROBE_SUBSET_INDEX_H_
#define RANKPROBE_SUBSET_INDEX_H_

#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rankprobe/bit_string.h"

namespace rankprobe {

using BigInt = boost::multiprecision::cpp_int;

BigInt BinomialBig(uint64_t n, uint64_t k);

// Rank of the sorted, distinct `members` among all subsets of the same size,
// in lexicographic order of their sorted element lists.
BigInt SubsetRank(uint64_t universe, std::span<const uint64_t> members);
std::vector<uint64_t> SubsetUnrank(uint64_t universe, uint64_t size,
                                   const BigInt& rank);

// ceil(log2 C(universe, size)); zero when there is a single subset.
int SubsetIndexBits(uint64_t universe, uint64_t size);
// Width of the size header: enough bits for any value in [0, universe].
int SubsetHeaderBits(uint64_t universe);

// Header (subset size) followed by the fixed-width index.
void AppendSubset(BitString& out, uint64_t universe,
                  std::span<const uint64_t> members);
// Throws CorruptEncoding on a size above `universe`, an out-of-range index,
// or a truncated stream.
std::vector<uint64_t> ReadSubset(BitReader& in, uint64_t universe);

}  // namespace rankprobe

#endif  // RANKPROBE_SUBSET_INDEX_H_
