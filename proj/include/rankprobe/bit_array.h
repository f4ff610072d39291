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

#ifndef RANKPROBE_BIT_ARRAY_H_
#define RANKPROBE_BIT_ARRAY_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "rankprobe/bit_string.h"
#include "rankprobe/random.h"

namespace rankprobe {

// The input array A[1..n]. Indexing is 1-based so that Rank(k) is the number
// of ones among A[1..k].
class BitArray {
 public:
  // n must be >= 1; all bits zero.
  explicit BitArray(uint64_t n);
  explicit BitArray(BitString bits);

  // Bit i-1 of `value` becomes A[i]; n <= 64.
  static BitArray FromInteger(uint64_t value, uint64_t n);
  // '0'/'1' characters, A[1] first.
  static BitArray FromString(const std::string& s);
  static BitArray Random(uint64_t n, SeededRng& rng);

  uint64_t size() const { return bits_.size(); }
  bool at(uint64_t i) const;  // 1 <= i <= n
  void set(uint64_t i, bool bit);

  // Zero-based view: bit j is A[j+1].
  const BitString& bits() const { return bits_; }

  bool operator==(const BitArray& other) const { return bits_ == other.bits_; }

 private:
  BitString bits_;
};

// Probe-free reference: sum of A[1..k] for 0 <= k <= n.
uint64_t RankOracle(const BitArray& a, uint64_t k);

// "RPL1" file format: magic, n as 8-byte little-endian, then ceil(n/8) bytes
// with A[i] at byte (i-1)/8, bit (i-1)%8.
void WriteBitArray(std::ostream& out, const BitArray& a);
BitArray ReadBitArray(std::istream& in);
void SaveBitArray(const std::string& path, const BitArray& a);
BitArray LoadBitArray(const std::string& path);

}  // namespace rankprobe

#endif  // RANKPROBE_BIT_ARRAY_H_
