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

#include "rankprobe/encoding.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "rankprobe/errors.h"
#include "rankprobe/subset_index.h"

namespace rankprobe {

namespace {

constexpr char kMagic[4] = {'R', 'P', 'E', '1'};
constexpr uint64_t kMaxComponentBits = uint64_t{1} << 40;

void WriteU64(std::ostream& out, uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

uint64_t ReadU64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (in.gcount() != 8) throw CorruptEncoding("encoding record truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  return v;
}

std::vector<uint64_t> MergePoints(const std::vector<uint64_t>& a,
                                  const std::vector<uint64_t>& b) {
  std::vector<uint64_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void EncodeAnswers(const std::vector<uint64_t>& points,
                   const std::map<uint64_t, uint64_t>& answers, BitString& out) {
  uint64_t prev_point = 0;
  uint64_t prev_answer = 0;
  for (uint64_t p : points) {
    const uint64_t answer = answers.at(p);
    if (p > prev_point) {
      BinomialIncrementCode(p - prev_point)->Encode(answer - prev_answer, out);
    }
    prev_point = p;
    prev_answer = answer;
  }
}

std::map<uint64_t, uint64_t> DecodeAnswers(const std::vector<uint64_t>& points,
                                           const BitString& bits) {
  std::map<uint64_t, uint64_t> answers;
  BitReader in(bits);
  uint64_t prev_point = 0;
  uint64_t prev_answer = 0;
  for (uint64_t p : points) {
    if (p > prev_point) {
      prev_answer += BinomialIncrementCode(p - prev_point)->Decode(in);
    }
    answers[p] = prev_answer;
    prev_point = p;
  }
  if (in.remaining() != 0) throw CorruptEncoding("answer part has extra bits");
  return answers;
}

std::string JoinContext(const BitString& published, const BitString& qstar_id,
                        const BitString& joint_answers) {
  return published.ToString() + "|" + qstar_id.ToString() + "|" +
         joint_answers.ToString();
}

// Parts 1 to 3 plus both footprints, shared by the encoder and the table
// builder.
struct Analysis {
  QStarSet qstar;
  std::vector<uint64_t> q0;
  std::vector<uint64_t> points;
  std::map<uint64_t, uint64_t> answers;
  BitString published;
  BitString qstar_id;
  BitString joint_answers;
  Footprint foot_q0;
  Footprint foot_qstar;
};

Analysis Analyze(const StructureLayout& layout, const QueryBlocks& blocks,
                 uint64_t delta) {
  const RankAlgorithm& algorithm = *layout.algorithm;
  Analysis out;
  out.qstar = ComputeQStar(layout, blocks, delta);
  out.q0 = blocks.QDelta(0);
  out.points = MergePoints(out.q0, out.qstar.members);
  for (uint64_t p : out.points) {
    out.answers[p] = RunQuery(algorithm, layout.memory, layout.published, p).answer;
  }
  out.published = layout.published.Bits();
  AppendSubset(out.qstar_id, blocks.k(), out.qstar.excluded_blocks);
  EncodeAnswers(out.points, out.answers, out.joint_answers);
  out.foot_q0 = BuildFootprint(algorithm, layout.memory, layout.published, out.q0);
  out.foot_qstar.word_bits = layout.memory.word_bits();
  if (!out.qstar.members.empty()) {
    out.foot_qstar = BuildFootprint(algorithm, layout.memory, layout.published,
                                    out.qstar.members);
  }
  return out;
}

void CheckBlocks(uint64_t n, const QueryBlocks& blocks) {
  if (blocks.n() != n) {
    throw ArgumentError(fmt::format("blocks cover {} queries, structure has n = {}",
                                    blocks.n(), n));
  }
}

uint64_t ResolveDelta(const EncodingConfig& config, const StructureLayout& layout,
                      const QueryBlocks& blocks) {
  if (config.mode == FootprintMode::kEnsemble) {
    if (!config.tables) throw ArgumentError("ensemble mode needs code tables");
    const EnsembleTables& t = *config.tables;
    if (t.n() != blocks.n() || t.k() != blocks.k()) {
      throw ArgumentError("code tables were built for other blocks");
    }
    if (config.delta && *config.delta != t.delta()) {
      throw ArgumentError("delta differs from the code tables");
    }
    return t.delta();
  }
  if (config.delta) {
    if (*config.delta == 0 || *config.delta >= blocks.block_size()) {
      throw ArgumentError(fmt::format("delta must lie in [1, {})", blocks.block_size()));
    }
    return *config.delta;
  }
  return ChooseDelta(layout, blocks).delta;
}

const EnsembleTables::Table& RequireTable(const EnsembleTables::Table* table) {
  if (table == nullptr) throw ArgumentError("input outside the code tables");
  return *table;
}

void EncodeFootprint(const EnsembleTables::Table& table, const BitString& foot,
                     BitString& out) {
  auto it = table.index.find(foot.ToString());
  if (it == table.index.end()) throw ArgumentError("footprint outside the code tables");
  table.code->Encode(it->second, out);
}

BitString DecodeFootprint(const EnsembleTables::Table* table, const BitString& bits) {
  if (table == nullptr) throw CorruptEncoding("no code table for this context");
  BitReader in(bits);
  const size_t symbol = table->code->Decode(in);
  if (in.remaining() != 0) throw CorruptEncoding("footprint part has extra bits");
  return table->footprints[symbol];
}

EnsembleTables::Table MakeTable(const std::map<std::string, uint64_t>& counts,
                                const std::map<std::string, BitString>& values) {
  EnsembleTables::Table table;
  std::vector<uint64_t> weights;
  for (const auto& [key, count] : counts) {
    table.index[key] = table.footprints.size();
    table.footprints.push_back(values.at(key));
    weights.push_back(count);
  }
  table.code = std::make_shared<const CanonicalCode>(CanonicalCode::FromWeights(weights));
  return table;
}

}  // namespace

const BitString& EncodingRecord::component(int i) const {
  switch (i) {
    case 0: return published;
    case 1: return qstar_id;
    case 2: return joint_answers;
    case 3: return foot_q0;
    case 4: return foot_qstar;
    case 5: return remaining_cells;
  }
  throw ArgumentError("component index out of range");
}

std::array<uint64_t, kEncodingComponents> EncodingRecord::component_bits() const {
  std::array<uint64_t, kEncodingComponents> out{};
  for (int i = 0; i < kEncodingComponents; ++i) out[i] = component(i).size();
  return out;
}

uint64_t EncodingRecord::total_bits() const {
  uint64_t total = 0;
  for (uint64_t b : component_bits()) total += b;
  return total;
}

void WriteEncodingRecord(std::ostream& out, const EncodingRecord& record) {
  out.write(kMagic, 4);
  for (int i = 0; i < kEncodingComponents; ++i) {
    const BitString& bits = record.component(i);
    WriteU64(out, bits.size());
    const std::vector<uint8_t> bytes = bits.ToBytes();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  WriteU64(out, record.delta);
}

EncodingRecord ReadEncodingRecord(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || !std::equal(magic, magic + 4, kMagic)) {
    throw CorruptEncoding("not an RPE1 record");
  }
  std::array<BitString, kEncodingComponents> parts;
  for (auto& part : parts) {
    const uint64_t bits = ReadU64(in);
    if (bits > kMaxComponentBits) throw CorruptEncoding("component length too large");
    std::vector<uint8_t> bytes((bits + 7) / 8);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (static_cast<size_t>(in.gcount()) != bytes.size()) {
      throw CorruptEncoding("encoding record truncated");
    }
    part = BitString::FromBytes(bytes, bits);
  }
  EncodingRecord record;
  record.published = std::move(parts[0]);
  record.qstar_id = std::move(parts[1]);
  record.joint_answers = std::move(parts[2]);
  record.foot_q0 = std::move(parts[3]);
  record.foot_qstar = std::move(parts[4]);
  record.remaining_cells = std::move(parts[5]);
  record.delta = ReadU64(in);
  return record;
}

void SaveEncodingRecord(const std::string& path, const EncodingRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  WriteEncodingRecord(out, record);
  if (!out) throw ArgumentError("failed writing " + path);
}

EncodingRecord LoadEncodingRecord(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + path);
  return ReadEncodingRecord(in);
}

DeltaChoice ChooseDelta(const StructureLayout& layout, const QueryBlocks& blocks) {
  const uint64_t m = blocks.block_size();
  if (m < 2) throw ArgumentError("choosing delta needs block size >= 2");
  const RankAlgorithm& algorithm = *layout.algorithm;
  const std::vector<uint64_t> q0 = blocks.QDelta(0);
  const std::vector<uint64_t> p0 =
      ProbesOfSet(algorithm, layout.memory, layout.published, q0);

  DeltaChoice choice;
  choice.fractions.assign(m, 0.0);
  uint64_t best = blocks.k() + 1;
  double sum = 0.0;
  for (uint64_t d = 1; d < m; ++d) {
    uint64_t overlaps = 0;
    for (uint64_t q : blocks.QDelta(d)) {
      const ProbeTrace trace = RunQuery(algorithm, layout.memory, layout.published, q);
      for (const ProbeStep& s : trace.steps) {
        if (!s.published && std::binary_search(p0.begin(), p0.end(), s.address)) {
          ++overlaps;
          break;
        }
      }
    }
    choice.fractions[d] = static_cast<double>(overlaps) / blocks.k();
    sum += choice.fractions[d];
    if (overlaps < best) {
      best = overlaps;
      choice.delta = d;
    }
  }
  choice.overlaps = best;
  choice.chosen_fraction = choice.fractions[choice.delta];
  choice.mean_fraction = sum / static_cast<double>(m - 1);
  return choice;
}

QStarSet ComputeQStar(const StructureLayout& layout, const QueryBlocks& blocks,
                      uint64_t delta) {
  const RankAlgorithm& algorithm = *layout.algorithm;
  const std::vector<uint64_t> p0 =
      ProbesOfSet(algorithm, layout.memory, layout.published, blocks.QDelta(0));
  QStarSet out;
  out.delta = delta;
  const std::vector<uint64_t> qd = blocks.QDelta(delta);
  for (uint64_t b = 0; b < qd.size(); ++b) {
    const ProbeTrace trace =
        RunQuery(algorithm, layout.memory, layout.published, qd[b]);
    const bool hits = std::any_of(
        trace.steps.begin(), trace.steps.end(), [&](const ProbeStep& s) {
          return !s.published && std::binary_search(p0.begin(), p0.end(), s.address);
        });
    if (hits) {
      out.excluded_blocks.push_back(b);
    } else {
      out.members.push_back(qd[b]);
    }
  }
  out.complement_size = out.excluded_blocks.size();
  return out;
}

std::string FootprintModeName(FootprintMode mode) {
  return mode == FootprintMode::kVerbatim ? "verbatim" : "ensemble";
}

const EnsembleTables::Table* EnsembleTables::FindQ0(const std::string& context) const {
  auto it = q0_.find(context);
  return it == q0_.end() ? nullptr : &it->second;
}

const EnsembleTables::Table* EnsembleTables::FindQStar(
    const std::string& context) const {
  auto it = qstar_.find(context);
  return it == qstar_.end() ? nullptr : &it->second;
}

std::shared_ptr<const EnsembleTables> BuildEnsembleTables(
    const StructureFamily& family, const QueryBlocks& blocks, uint64_t delta) {
  const uint64_t n = blocks.n();
  if (n > kMaxEnsembleBits) {
    throw Refusal(fmt::format("ensemble tables enumerate 2^n inputs; n = {} exceeds {}",
                              n, kMaxEnsembleBits));
  }
  if (delta == 0 || delta >= blocks.block_size()) {
    throw ArgumentError(fmt::format("delta must lie in [1, {})", blocks.block_size()));
  }
  using Counts = std::map<std::string, std::map<std::string, uint64_t>>;
  Counts q0_counts;
  Counts qstar_counts;
  std::map<std::string, BitString> values;
  for (uint64_t v = 0; v < (uint64_t{1} << n); ++v) {
    const StructureLayout layout = family(BitArray::FromInteger(v, n));
    const Analysis an = Analyze(layout, blocks, delta);
    const std::string context = JoinContext(an.published, an.qstar_id, an.joint_answers);
    const std::string f0 = an.foot_q0.bits.ToString();
    const std::string fs = an.foot_qstar.bits.ToString();
    ++q0_counts[context][f0];
    ++qstar_counts[context + "|" + f0][fs];
    values.emplace(f0, an.foot_q0.bits);
    values.emplace(fs, an.foot_qstar.bits);
  }
  auto tables = std::make_shared<EnsembleTables>();
  tables->n_ = n;
  tables->k_ = blocks.k();
  tables->delta_ = delta;
  tables->inputs_ = uint64_t{1} << n;
  for (const auto& [context, counts] : q0_counts) {
    tables->q0_.emplace(context, MakeTable(counts, values));
  }
  for (const auto& [context, counts] : qstar_counts) {
    tables->qstar_.emplace(context, MakeTable(counts, values));
  }
  return tables;
}

EncodingRecord Encode(const BitArray& a, const StructureLayout& layout,
                      const QueryBlocks& blocks, const EncodingConfig& config) {
  if (a.size() != layout.n()) {
    throw ArgumentError(fmt::format("array has {} bits, structure has n = {}",
                                    a.size(), layout.n()));
  }
  CheckBlocks(layout.n(), blocks);
  if (layout.published.base().size() != config.published_base_bits) {
    throw ArgumentError("published base length differs from the configuration");
  }
  const uint64_t delta = ResolveDelta(config, layout, blocks);
  const Analysis an = Analyze(layout, blocks, delta);
  for (const auto& [p, answer] : an.answers) {
    if (answer != RankOracle(a, p)) {
      throw ArgumentError(fmt::format("structure answers Rank({}) = {}, array says {}",
                                      p, answer, RankOracle(a, p)));
    }
  }

  EncodingRecord record;
  record.delta = delta;
  record.published = an.published;
  record.qstar_id = an.qstar_id;
  record.joint_answers = an.joint_answers;
  if (config.mode == FootprintMode::kVerbatim) {
    record.foot_q0 = an.foot_q0.bits;
    record.foot_qstar = an.foot_qstar.bits;
  } else {
    const std::string context = JoinContext(an.published, an.qstar_id, an.joint_answers);
    EncodeFootprint(RequireTable(config.tables->FindQ0(context)), an.foot_q0.bits,
                    record.foot_q0);
    EncodeFootprint(
        RequireTable(config.tables->FindQStar(context + "|" + an.foot_q0.bits.ToString())),
        an.foot_qstar.bits, record.foot_qstar);
  }

  const RankAlgorithm& algorithm = *layout.algorithm;
  std::vector<uint64_t> probed =
      ProbesOfSet(algorithm, layout.memory, layout.published, an.q0);
  const std::vector<uint64_t> probed_star =
      ProbesOfSet(algorithm, layout.memory, layout.published, an.qstar.members);
  probed = MergePoints(probed, probed_star);
  const int w = layout.memory.word_bits();
  for (uint64_t addr = 0; addr < layout.memory.cell_count(); ++addr) {
    if (!std::binary_search(probed.begin(), probed.end(), addr)) {
      record.remaining_cells.Append(layout.memory.Get(addr), w);
    }
  }
  return record;
}

BitArray Decode(const EncodingRecord& record, const RankAlgorithm& algorithm,
                const QueryBlocks& blocks, const EncodingConfig& config) {
  const uint64_t n = algorithm.n();
  CheckBlocks(n, blocks);
  if (config.mode == FootprintMode::kEnsemble && !config.tables) {
    throw ArgumentError("ensemble mode needs code tables");
  }
  try {
    const int w = algorithm.word_bits();
    const uint64_t cell_count = algorithm.cell_count();
    const uint64_t delta = record.delta;
    if (delta == 0 || delta >= blocks.block_size() ||
        (config.mode == FootprintMode::kEnsemble && delta != config.tables->delta())) {
      throw CorruptEncoding(fmt::format("delta {} is not valid here", delta));
    }
    if (record.published.size() < config.published_base_bits) {
      throw CorruptEncoding("published part shorter than its base");
    }
    const PublishedBits published = PublishedBits::FromBits(
        record.published, config.published_base_bits, CeilLog2(cell_count), w);

    BitReader subset_in(record.qstar_id);
    const std::vector<uint64_t> excluded = ReadSubset(subset_in, blocks.k());
    if (subset_in.remaining() != 0) throw CorruptEncoding("subset part has extra bits");
    const std::vector<uint64_t> q0 = blocks.QDelta(0);
    std::vector<uint64_t> qstar;
    {
      const std::vector<uint64_t> qd = blocks.QDelta(delta);
      size_t e = 0;
      for (uint64_t b = 0; b < qd.size(); ++b) {
        if (e < excluded.size() && excluded[e] == b) {
          ++e;
        } else {
          qstar.push_back(qd[b]);
        }
      }
    }
    const std::vector<uint64_t> points = MergePoints(q0, qstar);
    const std::map<uint64_t, uint64_t> answers =
        DecodeAnswers(points, record.joint_answers);

    Footprint foot_q0{record.foot_q0, 0, w};
    Footprint foot_qstar{record.foot_qstar, 0, w};
    if (config.mode == FootprintMode::kEnsemble) {
      const std::string context =
          JoinContext(record.published, record.qstar_id, record.joint_answers);
      foot_q0.bits = DecodeFootprint(config.tables->FindQ0(context), record.foot_q0);
      foot_qstar.bits = DecodeFootprint(
          config.tables->FindQStar(context + "|" + foot_q0.bits.ToString()),
          record.foot_qstar);
    }

    std::vector<uint64_t> cells(cell_count, 0);
    std::vector<bool> known(cell_count, false);
    auto absorb = [&](const ReplayResult& replay) {
      for (const auto& [q, answer] : replay.answers) {
        if (answers.at(q) != answer) {
          throw CorruptEncoding(fmt::format("footprint answers Rank({}) = {}, part 3 says {}",
                                            q, answer, answers.at(q)));
        }
      }
      for (const auto& [address, content] : replay.cells) {
        if (address >= cell_count) throw CorruptEncoding("footprint cell out of range");
        cells[address] = content;
        known[address] = true;
      }
    };
    absorb(ReplayFromFootprint(foot_q0, published, q0, algorithm));
    if (qstar.empty()) {
      if (!foot_qstar.bits.empty()) throw CorruptEncoding("footprint for an empty Q*");
    } else {
      absorb(ReplayFromFootprint(foot_qstar, published, qstar, algorithm));
    }

    BitReader rest(record.remaining_cells);
    for (uint64_t addr = 0; addr < cell_count; ++addr) {
      if (known[addr]) continue;
      if (rest.remaining() < static_cast<size_t>(w)) {
        throw CorruptEncoding("remaining-cells part truncated");
      }
      cells[addr] = rest.Read(w);
    }
    if (rest.remaining() != 0) throw CorruptEncoding("remaining-cells part has extra bits");

    const CellMemory memory(w, std::move(cells));
    BitArray a(n);
    uint64_t prev = 0;
    for (uint64_t q = 1; q <= n; ++q) {
      const uint64_t r = RunQuery(algorithm, memory, published, q).answer;
      if (r != prev && r != prev + 1) {
        throw CorruptEncoding(fmt::format("rank jumps from {} to {} at {}", prev, r, q));
      }
      a.set(q, r == prev + 1);
      prev = r;
    }
    for (const auto& [p, answer] : answers) {
      if (RankOracle(a, p) != answer) {
        throw CorruptEncoding(fmt::format("decoded array disagrees with part 3 at {}", p));
      }
    }
    return a;
  } catch (const CorruptFootprint& e) {
    throw CorruptEncoding(e.what());
  } catch (const SimulationFault& e) {
    throw CorruptEncoding(e.what());
  } catch (const ArgumentError& e) {
    throw CorruptEncoding(e.what());
  } catch (const std::out_of_range& e) {
    throw CorruptEncoding(e.what());
  }
}

SizeAccounting AccountSizes(const std::vector<EncodingRecord>& records,
                            const AccountingInputs& inputs) {
  if (records.size() < kMinAccountingRecords) {
    throw Refusal(fmt::format("size accounting needs at least {} records, got {}",
                              kMinAccountingRecords, records.size()));
  }
  if (inputs.k == 0 || inputs.n == 0) throw ArgumentError("accounting needs n, k >= 1");
  SizeAccounting acc;
  acc.records = records.size();
  const int header = SubsetHeaderBits(inputs.k);
  double overlap = 0.0;
  for (const EncodingRecord& r : records) {
    const auto bits = r.component_bits();
    for (int i = 0; i < kEncodingComponents; ++i) {
      acc.mean_component[i] += static_cast<double>(bits[i]);
    }
    acc.mean_total += static_cast<double>(r.total_bits());
    BitReader in(r.qstar_id);
    overlap += static_cast<double>(in.Read(header)) / static_cast<double>(inputs.k);
  }
  const double count = static_cast<double>(records.size());
  for (double& m : acc.mean_component) {
    m /= count;
    acc.component_sum += m;
  }
  acc.mean_total /= count;
  acc.mean_overlap_fraction = overlap / count;

  const double eps = inputs.epsilon;
  const double kd = static_cast<double>(inputs.k);
  const double s = std::min(kd, std::ceil(eps * kd));
  const double lg_binom =
      (std::lgamma(kd + 1) - std::lgamma(s + 1) - std::lgamma(kd - s + 1)) / std::log(2.0);
  acc.component2_bound = lg_binom + 1.0 + header;
  acc.component2_within_bound = acc.mean_component[1] <= acc.component2_bound;
  const double eps_term = eps > 0.0 && eps < 1.0 ? kd * eps * std::log2(1.0 / eps) : 0.0;
  acc.predicted_total = static_cast<double>(inputs.n) + 3.0 * acc.mean_component[0] +
                        eps_term - inputs.deficit;
  acc.slack_vs_n = acc.mean_total - static_cast<double>(inputs.n);
  return acc;
}

}  // namespace rankprobe
