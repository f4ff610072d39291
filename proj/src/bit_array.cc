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

#include "rankprobe/bit_array.h"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "rankprobe/errors.h"

namespace rankprobe {

namespace {
constexpr char kMagic[4] = {'R', 'P', 'L', '1'};
}  // namespace

BitArray::BitArray(uint64_t n) {
  if (n == 0) throw ArgumentError("BitArray needs n >= 1");
  bits_.Resize(n);
}

BitArray::BitArray(BitString bits) : bits_(std::move(bits)) {
  if (bits_.empty()) throw ArgumentError("BitArray needs n >= 1");
}

BitArray BitArray::FromInteger(uint64_t value, uint64_t n) {
  if (n == 0 || n > 64) throw ArgumentError("FromInteger needs 1 <= n <= 64");
  BitString bits;
  bits.Append(value, static_cast<int>(n));
  return BitArray(std::move(bits));
}

BitArray BitArray::FromString(const std::string& s) {
  BitString bits;
  for (char c : s) {
    if (c != '0' && c != '1') throw ArgumentError("bit strings use 0 and 1");
    bits.PushBack(c == '1');
  }
  return BitArray(std::move(bits));
}

BitArray BitArray::Random(uint64_t n, SeededRng& rng) {
  if (n == 0) throw ArgumentError("BitArray needs n >= 1");
  BitString bits;
  for (uint64_t done = 0; done < n; done += 64) {
    const int width = static_cast<int>(std::min<uint64_t>(64, n - done));
    bits.Append(rng.Next(), width);
  }
  return BitArray(std::move(bits));
}

bool BitArray::at(uint64_t i) const {
  if (i == 0 || i > size()) throw ArgumentError("A index out of [1, n]");
  return bits_.Get(i - 1);
}

void BitArray::set(uint64_t i, bool bit) {
  if (i == 0 || i > size()) throw ArgumentError("A index out of [1, n]");
  bits_.Set(i - 1, bit);
}

uint64_t RankOracle(const BitArray& a, uint64_t k) {
  if (k > a.size()) throw ArgumentError("rank argument exceeds n");
  uint64_t sum = 0;
  uint64_t pos = 0;
  while (pos < k) {
    const int width = static_cast<int>(std::min<uint64_t>(64, k - pos));
    sum += std::popcount(a.bits().Read(pos, width));
    pos += width;
  }
  return sum;
}

void WriteBitArray(std::ostream& out, const BitArray& a) {
  out.write(kMagic, 4);
  uint64_t n = a.size();
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((n >> (8 * i)) & 0xff));
  const std::vector<uint8_t> bytes = a.bits().ToBytes();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing RPL1 stream");
}

BitArray ReadBitArray(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw ArgumentError("not an RPL1 bit array");
  }
  unsigned char len[8];
  if (!in.read(reinterpret_cast<char*>(len), 8)) {
    throw ArgumentError("truncated RPL1 header");
  }
  uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= uint64_t{len[i]} << (8 * i);
  if (n == 0) throw ArgumentError("RPL1 array with n = 0");
  std::vector<uint8_t> bytes((n + 7) / 8);
  if (!in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()))) {
    throw ArgumentError("truncated RPL1 payload");
  }
  return BitArray(BitString::FromBytes(bytes, n));
}

void SaveBitArray(const std::string& path, const BitArray& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  WriteBitArray(out, a);
}

BitArray LoadBitArray(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  return ReadBitArray(in);
}

}  // namespace rankprobe
