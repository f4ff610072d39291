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

#ifndef RANKPROBE_BIT_STRING_H_
#define RANKPROBE_BIT_STRING_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rankprobe {

// Number of bits needed to write any value in [0, x]. BitWidth(0) == 0.
int BitWidth(uint64_t x);

// ceil(log2(x)) for x >= 1; the width of an index into a table of x entries.
int CeilLog2(uint64_t x);

// Append-only bit string with LSB-first packing into 64-bit words. Fields are
// written and read back at arbitrary bit offsets.
class BitString {
 public:
  BitString() = default;

  size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool Get(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  void Set(size_t i, bool bit);

  void PushBack(bool bit);
  // Appends the low `width` bits of `value`, least significant first.
  void Append(uint64_t value, int width);
  void Append(const BitString& other);

  // Reads `width` (<= 64) bits starting at `pos`.
  uint64_t Read(size_t pos, int width) const;

  void Resize(size_t n);

  // Bytes holding the bits, LSB-first, ceil(size/8) long; trailing pad zero.
  std::vector<uint8_t> ToBytes() const;
  static BitString FromBytes(const std::vector<uint8_t>& bytes, size_t bits);

  // "0101..." in bit order, for diagnostics and tests.
  std::string ToString() const;

  bool operator==(const BitString& other) const;

 private:
  std::vector<uint64_t> words_;
  size_t size_ = 0;
};

// Sequential reader over a BitString.
class BitReader {
 public:
  explicit BitReader(const BitString& bits) : bits_(&bits) {}

  size_t position() const { return pos_; }
  size_t remaining() const { return bits_->size() - pos_; }

  // Throws std::out_of_range when fewer than `width` bits remain.
  uint64_t Read(int width);
  bool ReadBit() { return Read(1) != 0; }

 private:
  const BitString* bits_;
  size_t pos_ = 0;
};

}  // namespace rankprobe

#endif  // RANKPROBE_BIT_STRING_H_
