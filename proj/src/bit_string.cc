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

#include "rankprobe/bit_string.h"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace rankprobe {

int BitWidth(uint64_t x) { return static_cast<int>(std::bit_width(x)); }

int CeilLog2(uint64_t x) {
  if (x <= 1) return 0;
  return static_cast<int>(std::bit_width(x - 1));
}

void BitString::Set(size_t i, bool bit) {
  const uint64_t mask = uint64_t{1} << (i & 63);
  if (bit) {
    words_[i >> 6] |= mask;
  } else {
    words_[i >> 6] &= ~mask;
  }
}

void BitString::PushBack(bool bit) {
  if ((size_ & 63) == 0) words_.push_back(0);
  if (bit) words_[size_ >> 6] |= uint64_t{1} << (size_ & 63);
  ++size_;
}

void BitString::Append(uint64_t value, int width) {
  if (width < 0 || width > 64) throw std::out_of_range("BitString::Append width");
  if (width == 0) return;
  if (width < 64) value &= (uint64_t{1} << width) - 1;
  const size_t offset = size_ & 63;
  if (offset == 0) {
    words_.push_back(value);
  } else {
    words_.back() |= value << offset;
    if (offset + width > 64) words_.push_back(value >> (64 - offset));
  }
  size_ += width;
}

void BitString::Append(const BitString& other) {
  size_t pos = 0;
  while (pos < other.size_) {
    const int width = static_cast<int>(std::min<size_t>(64, other.size_ - pos));
    Append(other.Read(pos, width), width);
    pos += width;
  }
}

uint64_t BitString::Read(size_t pos, int width) const {
  if (width < 0 || width > 64 || pos + width > size_) {
    throw std::out_of_range("BitString::Read past end");
  }
  if (width == 0) return 0;
  const size_t word = pos >> 6;
  const size_t offset = pos & 63;
  uint64_t value = words_[word] >> offset;
  if (offset + width > 64) value |= words_[word + 1] << (64 - offset);
  if (width < 64) value &= (uint64_t{1} << width) - 1;
  return value;
}

void BitString::Resize(size_t n) {
  words_.resize((n + 63) / 64, 0);
  if (n < size_ && (n & 63) != 0) words_.back() &= (uint64_t{1} << (n & 63)) - 1;
  size_ = n;
}

std::vector<uint8_t> BitString::ToBytes() const {
  std::vector<uint8_t> out((size_ + 7) / 8, 0);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

BitString BitString::FromBytes(const std::vector<uint8_t>& bytes, size_t bits) {
  if (bytes.size() * 8 < bits) throw std::out_of_range("BitString::FromBytes short");
  BitString out;
  for (size_t i = 0; i < bits; i += 8) {
    const int width = static_cast<int>(std::min<size_t>(8, bits - i));
    out.Append(bytes[i / 8], width);
  }
  return out;
}

std::string BitString::ToString() const {
  std::string s;
  s.reserve(size_);
  for (size_t i = 0; i < size_; ++i) s.push_back(Get(i) ? '1' : '0');
  return s;
}

bool BitString::operator==(const BitString& other) const {
  return size_ == other.size_ && words_ == other.words_;
}

uint64_t BitReader::Read(int width) {
  const uint64_t v = bits_->Read(pos_, width);
  pos_ += width;
  return v;
}

}  // namespace rankprobe
