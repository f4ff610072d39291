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

#include "rankprobe/prefix_code.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <queue>

#include "rankprobe/errors.h"

namespace rankprobe {

namespace {

std::vector<int> HuffmanLengths(const std::vector<uint64_t>& weights) {
  const size_t n = weights.size();
  if (n == 1) return {0};
  using Item = std::pair<uint64_t, size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<size_t> parent(2 * n - 1, 0);
  for (size_t i = 0; i < n; ++i) heap.push({weights[i], i});
  size_t next = n;
  while (heap.size() > 1) {
    const Item a = heap.top();
    heap.pop();
    const Item b = heap.top();
    heap.pop();
    parent[a.second] = next;
    parent[b.second] = next;
    heap.push({a.first + b.first, next});
    ++next;
  }
  // Internal nodes are created in order, so depths resolve from the root down.
  std::vector<int> depth(2 * n - 1, 0);
  for (size_t i = 2 * n - 2; i-- > 0;) depth[i] = depth[parent[i]] + 1;
  return std::vector<int>(depth.begin(), depth.begin() + n);
}

}  // namespace

CanonicalCode CanonicalCode::FromWeights(std::span<const uint64_t> weights,
                                         int max_length) {
  if (weights.empty()) throw ArgumentError("code needs at least one symbol");
  if (max_length < 1 || max_length > kMaxLength) {
    throw ArgumentError("code length limit out of range");
  }
  if (weights.size() > (uint64_t{1} << std::min(max_length, 31))) {
    throw ArgumentError("too many symbols for the length limit");
  }
  std::vector<uint64_t> w(weights.begin(), weights.end());
  for (auto& x : w) x = std::max<uint64_t>(x, 1);
  std::vector<int> lengths = HuffmanLengths(w);
  while (*std::max_element(lengths.begin(), lengths.end()) > max_length) {
    for (auto& x : w) x = 1 + x / 2;
    lengths = HuffmanLengths(w);
  }

  CanonicalCode code;
  code.lengths_ = lengths;
  const int longest = *std::max_element(lengths.begin(), lengths.end());
  code.count_.assign(longest + 1, 0);
  for (int l : lengths) {
    if (l > 0) ++code.count_[l];
  }
  code.sorted_.resize(lengths.size());
  std::iota(code.sorted_.begin(), code.sorted_.end(), 0);
  std::stable_sort(code.sorted_.begin(), code.sorted_.end(),
                   [&](uint32_t a, uint32_t b) { return lengths[a] < lengths[b]; });
  code.first_code_.assign(longest + 1, 0);
  code.offset_.assign(longest + 1, 0);
  uint64_t value = 0;
  uint64_t offset = 0;
  for (int l = 1; l <= longest; ++l) {
    value = (value + code.count_[l - 1]) << 1;
    code.first_code_[l] = value;
    code.offset_[l] = offset;
    offset += code.count_[l];
  }
  code.codes_.assign(lengths.size(), 0);
  std::vector<uint64_t> next = code.first_code_;
  for (uint32_t s : code.sorted_) {
    if (lengths[s] > 0) code.codes_[s] = next[lengths[s]]++;
  }
  return code;
}

void CanonicalCode::Encode(size_t symbol, BitString& out) const {
  if (symbol >= lengths_.size()) throw ArgumentError("symbol outside the code");
  const int l = lengths_[symbol];
  for (int i = l - 1; i >= 0; --i) out.PushBack((codes_[symbol] >> i) & 1);
}

size_t CanonicalCode::Decode(BitReader& in) const {
  if (lengths_.size() == 1) return 0;
  uint64_t value = 0;
  for (size_t l = 1; l < first_code_.size(); ++l) {
    if (in.remaining() == 0) throw CorruptEncoding("codeword truncated");
    value = (value << 1) | (in.ReadBit() ? 1 : 0);
    if (value >= first_code_[l] && value - first_code_[l] < count_[l]) {
      return sorted_[offset_[l] + (value - first_code_[l])];
    }
  }
  throw CorruptEncoding("invalid codeword");
}

std::shared_ptr<const CanonicalCode> BinomialIncrementCode(uint64_t len) {
  static std::mutex mu;
  static std::map<uint64_t, std::shared_ptr<const CanonicalCode>> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(len); it != cache.end()) return it->second;
  std::vector<uint64_t> weights(len + 1);
  const long double log_fact = std::lgammal(static_cast<long double>(len) + 1);
  for (uint64_t i = 0; i <= len; ++i) {
    const long double log2p =
        (log_fact - std::lgammal(static_cast<long double>(i) + 1) -
         std::lgammal(static_cast<long double>(len - i) + 1)) /
            std::log(2.0L) -
        static_cast<long double>(len);
    weights[i] = 1 + static_cast<uint64_t>(std::exp2(log2p + 40.0L));
  }
  auto code = std::make_shared<const CanonicalCode>(CanonicalCode::FromWeights(weights));
  cache.emplace(len, code);
  return code;
}

}  // namespace rankprobe
