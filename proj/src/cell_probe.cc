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

#include "rankprobe/cell_probe.h"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "rankprobe/errors.h"

namespace rankprobe {

CellMemory::CellMemory(int word_bits, std::vector<uint64_t> cells)
    : word_bits_(word_bits), cells_(std::move(cells)) {
  if (word_bits < 1 || word_bits > 64) {
    throw ArgumentError("word_bits must be in [1, 64]");
  }
  if (word_bits < 64) {
    const uint64_t limit = uint64_t{1} << word_bits;
    for (uint64_t c : cells_) {
      if (c >= limit) throw ArgumentError("cell content exceeds word_bits");
    }
  }
}

uint64_t CellMemory::Get(uint64_t address) const {
  if (address >= cells_.size()) {
    throw SimulationFault("probe of address " + std::to_string(address) +
                          " outside memory of " +
                          std::to_string(cells_.size()) + " cells");
  }
  return cells_[address];
}

uint64_t PublishedBits::length() const {
  if (records_.empty()) return base_.size();
  return base_.size() + records_.size() * (address_bits_ + word_bits_);
}

std::optional<uint64_t> PublishedBits::Lookup(uint64_t address) const {
  auto it = index_.find(address);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void PublishedBits::AddRecord(uint64_t address, uint64_t content,
                              int address_bits, int word_bits) {
  if (records_.empty()) {
    address_bits_ = address_bits;
    word_bits_ = word_bits;
  } else if (address_bits != address_bits_ || word_bits != word_bits_) {
    throw ArgumentError("published records must share field widths");
  }
  if (address_bits < 64 && (address >> address_bits) != 0) {
    throw ArgumentError("address does not fit the record address field");
  }
  records_.emplace_back(address, content);
  index_.emplace(address, content);
}

BitString PublishedBits::Bits() const {
  BitString out = base_;
  for (const auto& [address, content] : records_) {
    out.Append(address, address_bits_);
    out.Append(content, word_bits_);
  }
  return out;
}

PublishedBits PublishedBits::FromBits(const BitString& bits,
                                      uint64_t base_length, int address_bits,
                                      int word_bits) {
  if (base_length > bits.size()) {
    throw CorruptEncoding("published bits shorter than their base");
  }
  BitString base;
  for (uint64_t i = 0; i < base_length; ++i) base.PushBack(bits.Get(i));
  PublishedBits out(std::move(base));
  const uint64_t rest = bits.size() - base_length;
  const uint64_t record = address_bits + word_bits;
  if (rest == 0) return out;
  if (record == 0 || rest % record != 0) {
    throw CorruptEncoding("published records do not align");
  }
  for (uint64_t pos = base_length; pos < bits.size(); pos += record) {
    const uint64_t address = bits.Read(pos, address_bits);
    const uint64_t content = bits.Read(pos + address_bits, word_bits);
    out.AddRecord(address, content, address_bits, word_bits);
  }
  return out;
}

size_t ProbeTrace::probe_count() const {
  return std::count_if(steps.begin(), steps.end(),
                       [](const ProbeStep& s) { return !s.published; });
}

std::vector<uint64_t> ProbeTrace::ProbedAddresses() const {
  std::vector<uint64_t> out;
  for (const ProbeStep& s : steps) {
    if (!s.published) out.push_back(s.address);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

uint64_t Probe(const CellMemory& memory, ProbeTrace& trace, uint64_t address) {
  const uint64_t content = memory.Get(address);
  trace.steps.push_back({address, content, false});
  return content;
}

ProbeTrace RunQuery(const QueryAlgorithm& algorithm, const CellMemory& memory,
                    const PublishedBits& published, uint64_t query) {
  if (query > algorithm.max_query()) {
    throw ArgumentError("query " + std::to_string(query) + " out of range");
  }
  ProbeTrace trace;
  trace.query = query;
  const size_t limit = algorithm.step_limit();
  for (size_t i = 0; i <= limit; ++i) {
    const QueryStep step = algorithm.Next(query, published, trace.steps);
    if (step.kind == QueryStep::Kind::kAnswer) {
      trace.answer = step.value;
      return trace;
    }
    if (auto content = published.Lookup(step.value)) {
      trace.steps.push_back({step.value, *content, true});
    } else {
      Probe(memory, trace, step.value);
    }
  }
  throw SimulationFault("query exceeded its step limit");
}

QueryBlocks::QueryBlocks(uint64_t n, uint64_t k) : n_(n), k_(k) {
  if (k == 0 || k > n) throw ArgumentError("need 1 <= k <= n");
  block_size_ = n / k;
}

std::vector<uint64_t> QueryBlocks::QDelta(uint64_t delta) const {
  if (delta >= block_size_) {
    throw ArgumentError("delta " + std::to_string(delta) +
                        " outside [0, block_size)");
  }
  std::vector<uint64_t> out(k_);
  for (uint64_t b = 0; b < k_; ++b) out[b] = b * block_size_ + delta;
  return out;
}

std::vector<uint64_t> ProbesOfSet(const QueryAlgorithm& algorithm,
                                  const CellMemory& memory,
                                  const PublishedBits& published,
                                  std::span<const uint64_t> queries) {
  std::vector<uint64_t> out;
  for (uint64_t q : queries) {
    const ProbeTrace trace = RunQuery(algorithm, memory, published, q);
    for (const ProbeStep& s : trace.steps) {
      if (!s.published) out.push_back(s.address);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<uint64_t> SortedQueries(std::span<const uint64_t> queries) {
  std::vector<uint64_t> sorted(queries.begin(), queries.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return sorted;
}

}  // namespace

Footprint BuildFootprint(const QueryAlgorithm& algorithm,
                         const CellMemory& memory,
                         const PublishedBits& published,
                         std::span<const uint64_t> queries) {
  if (queries.empty()) throw ArgumentError("footprint of an empty query set");
  Footprint fp;
  fp.word_bits = memory.word_bits();
  std::unordered_set<uint64_t> seen;
  for (uint64_t q : SortedQueries(queries)) {
    const ProbeTrace trace = RunQuery(algorithm, memory, published, q);
    for (const ProbeStep& s : trace.steps) {
      if (s.published || !seen.insert(s.address).second) continue;
      fp.bits.Append(s.content, fp.word_bits);
      ++fp.probed_cell_count;
    }
  }
  return fp;
}

ReplayResult ReplayFromFootprint(const Footprint& footprint,
                                 const PublishedBits& published,
                                 std::span<const uint64_t> queries,
                                 const QueryAlgorithm& algorithm) {
  ReplayResult result;
  std::unordered_map<uint64_t, uint64_t> known;
  BitReader reader(footprint.bits);
  const size_t limit = algorithm.step_limit();
  for (uint64_t q : SortedQueries(queries)) {
    if (q > algorithm.max_query()) throw ArgumentError("query out of range");
    std::vector<ProbeStep> reads;
    bool answered = false;
    for (size_t i = 0; i <= limit && !answered; ++i) {
      const QueryStep step = algorithm.Next(q, published, reads);
      if (step.kind == QueryStep::Kind::kAnswer) {
        result.answers[q] = step.value;
        answered = true;
        break;
      }
      const uint64_t address = step.value;
      if (auto content = published.Lookup(address)) {
        reads.push_back({address, *content, true});
        continue;
      }
      auto it = known.find(address);
      if (it == known.end()) {
        if (reader.remaining() < static_cast<size_t>(footprint.word_bits)) {
          throw CorruptFootprint("footprint exhausted at query " +
                                 std::to_string(q));
        }
        const uint64_t content = reader.Read(footprint.word_bits);
        it = known.emplace(address, content).first;
        result.cells.emplace_back(address, content);
      }
      reads.push_back({address, it->second, false});
    }
    if (!answered) throw SimulationFault("replayed query never answered");
  }
  if (reader.remaining() != 0) {
    throw CorruptFootprint("footprint has unread words");
  }
  return result;
}

PublishedBits PublishCells(const CellMemory& memory,
                           const PublishedBits& published,
                           std::span<const uint64_t> addresses) {
  PublishedBits out = published;
  for (uint64_t a : addresses) {
    if (a >= memory.cell_count()) {
      throw ArgumentError("cannot publish address " + std::to_string(a));
    }
    out.AddRecord(a, memory.Get(a), memory.address_bits(), memory.word_bits());
  }
  return out;
}

}  // namespace rankprobe
