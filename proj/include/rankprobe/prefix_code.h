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

#ifndef RANKPROBE_PREFIX_CODE_H_
#define RANKPROBE_PREFIX_CODE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rankprobe/bit_string.h"

namespace rankprobe {

// Length-limited canonical Huffman code over symbols [0, size). Codewords are
// written most significant bit first.
class CanonicalCode {
 public:
  inline static constexpr int kMaxLength = 62;

  // Zero weights are treated as weight 1 so every symbol stays encodable.
  // The sum of weights must stay below 2^62.
  static CanonicalCode FromWeights(std::span<const uint64_t> weights,
                                   int max_length = kMaxLength);

  size_t size() const { return lengths_.size(); }
  int length(size_t symbol) const { return lengths_[symbol]; }

  void Encode(size_t symbol, BitString& out) const;
  // Throws CorruptEncoding on an invalid or truncated codeword.
  size_t Decode(BitReader& in) const;

 private:
  std::vector<int> lengths_;
  std::vector<uint64_t> codes_;
  // Per length L: first canonical code, symbol count, and offset into sorted_.
  std::vector<uint64_t> first_code_;
  std::vector<uint64_t> count_;
  std::vector<uint64_t> offset_;
  std::vector<uint32_t> sorted_;
};

// Shared code for a Binomial(len, 1/2) increment, symbols 0..len.
std::shared_ptr<const CanonicalCode> BinomialIncrementCode(uint64_t len);

}  // namespace rankprobe

#endif  // RANKPROBE_PREFIX_CODE_H_
