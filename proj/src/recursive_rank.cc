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
//
// The recursive structure is a counting tree of t levels. Level 0 nodes
// ("leaves") hold leaf_bits bits of A; a level l node has up to `fanout`
// children at level l-1.
//
// Every node has a value drawn from a fixed universe ordered by the node's
// count of ones: value = (count, index), index < N(count). The node writes the
// low M bits of the index to memory and passes
// spill = Koff(count) + (index >> M) up to its parent. Because spill values are
// grouped by count, the parent learns each child's count from its spill alone.
// A parent's value is the tuple of its children's spills, ranked among tuples
// with the same total count (a mixed-radix code over the per-count spill
// profiles), so the children's counts cost nothing beyond the data itself.
//
// The M-bit fields of all nodes form one bit stream (top level first) packed
// into cells after the directory, so a node costs at most ceil(M/w) + 1 reads.
// The top level stores, per node, its absolute rank and its spill in a packed
// directory. That directory is the redundancy region; the stream stays within
// a small fraction of a bit per node of the information content.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "rankprobe/errors.h"
#include "rankprobe/rank_structures.h"

namespace rankprobe {

namespace {

using u128 = unsigned __int128;

constexpr int kMaxLeafBits = 127;
// Largest log2 of a node universe we allow; keeps every product below 2^127.
constexpr double kMaxUniverseLog2 = 126.0;

const std::array<std::array<u128, kMaxLeafBits + 1>, kMaxLeafBits + 1>&
BinomialTable() {
  static const auto table = [] {
    std::array<std::array<u128, kMaxLeafBits + 1>, kMaxLeafBits + 1> t{};
    for (int m = 0; m <= kMaxLeafBits; ++m) {
      t[m][0] = 1;
      for (int j = 1; j <= m; ++j) t[m][j] = t[m - 1][j - 1] + t[m - 1][j];
    }
    return t;
  }();
  return table;
}

u128 Binomial(uint64_t m, uint64_t j) {
  if (j > m) return 0;
  return BinomialTable()[m][j];
}

double Log2(u128 x) {
  const uint64_t hi = static_cast<uint64_t>(x >> 64);
  const uint64_t lo = static_cast<uint64_t>(x);
  return std::log2(static_cast<long double>(hi) * 18446744073709551616.0L +
                   static_cast<long double>(lo));
}

int BitLength(u128 x) {
  int bits = 0;
  while (x != 0) {
    x >>= 1;
    ++bits;
  }
  return bits;
}

u128 CeilShift(u128 x, int bits) {
  if (bits == 0) return x;
  const u128 q = x >> bits;
  return (q << bits) == x ? q : q + 1;
}

u128 LowBits(u128 x, int bits) {
  if (bits == 0) return 0;
  if (bits >= 128) return x;
  return x & ((u128{1} << bits) - 1);
}

struct Shape {
  int level = 0;
  uint64_t size = 0;
  int memory_bits = 0;
  // Spill values per count and their prefix sums; offsets has size + 2 slots.
  std::vector<u128> spill_count;
  std::vector<u128> spill_offset;
  u128 spill_total = 0;
  // Internal nodes only.
  std::vector<int> children;
  // suffix[i][c]: number of spill tuples of children i.. with total count c.
  std::vector<std::vector<u128>> suffix;

  uint64_t CountOfSpill(u128 spill) const {
    auto it = std::upper_bound(spill_offset.begin(), spill_offset.end(), spill);
    return static_cast<uint64_t>(it - spill_offset.begin()) - 1;
  }

  u128 Suffix(size_t i, int64_t c) const {
    if (c < 0 || static_cast<size_t>(c) >= suffix[i].size()) return 0;
    return suffix[i][c];
  }
};

class RecursivePlan {
 public:
  RecursivePlan(uint64_t n, int w, int t, RecursiveParams p)
      : n_(n), w_(w), t_(t), fanout_(p.fanout), slack_(p.slack_bits) {
    leaf_bits_ = p.leaf_bits != 0 ? p.leaf_bits : w + w / 4;
    if (leaf_bits_ < 2 || leaf_bits_ > kMaxLeafBits) {
      throw ArgumentError("recursive leaf_bits must be in [2, 127]");
    }
    if (fanout_ < 2) throw ArgumentError("recursive fanout must be >= 2");
    if (t < 1) throw ArgumentError("recursive t must be >= 1");
    const int t_max = MaxRecursiveDepth(n, w, p);
    if (t > t_max) {
      throw ArgumentError("t=" + std::to_string(t) + " exceeds t_max=" +
                          std::to_string(t_max) + " for n=" +
                          std::to_string(n));
    }
    spans_.resize(t);
    nodes_.resize(t);
    full_shape_.resize(t);
    tail_shape_.resize(t);
    uint64_t span = leaf_bits_;
    for (int l = 0; l < t; ++l) {
      spans_[l] = span;
      nodes_[l] = (n + span - 1) / span;
      span *= fanout_;
    }
    for (int l = 0; l < t; ++l) {
      full_shape_[l] = ShapeFor(l, std::min(spans_[l], n));
      tail_shape_[l] = ShapeFor(l, n - (nodes_[l] - 1) * spans_[l]);
    }

    // Directory fields.
    const int top = t - 1;
    count_width_ = BitWidth(n);
    u128 max_spill = 0;
    for (int id : {full_shape_[top], tail_shape_[top]}) {
      max_spill = std::max(max_spill, shapes_[id].spill_total - 1);
    }
    spill_width_ = BitLength(max_spill);
    record_bits_ = count_width_ + spill_width_;
    directory_cells_ = (nodes_[top] * record_bits_ + w - 1) / w;

    level_bit_base_.resize(t);
    uint64_t next = 0;
    for (int l = top; l >= 0; --l) {
      level_bit_base_[l] = next;
      next += (nodes_[l] - 1) * shapes_[full_shape_[l]].memory_bits +
              shapes_[tail_shape_[l]].memory_bits;
    }
    stream_bits_ = next;
    cell_count_ = directory_cells_ + (stream_bits_ + w - 1) / w;

    uint64_t dir_worst = 0;
    for (uint64_t j = 0; j < nodes_[top]; ++j) {
      dir_worst = std::max(dir_worst, DirectoryCells(j).second);
    }
    worst_probes_ = dir_worst;
    for (int l = 0; l < t; ++l) {
      uint64_t level_worst = 0;
      for (uint64_t j = 0; j < nodes_[l]; ++j) {
        level_worst = std::max(level_worst, NodeCells(l, j).second);
      }
      worst_probes_ += level_worst;
    }
  }

  uint64_t n() const { return n_; }
  int w() const { return w_; }
  int t() const { return t_; }
  uint64_t cell_count() const { return cell_count_; }
  uint64_t worst_probes() const { return worst_probes_; }
  uint64_t directory_cells() const { return directory_cells_; }
  uint64_t leaf_bits() const { return leaf_bits_; }
  uint64_t fanout() const { return fanout_; }
  uint64_t nodes(int level) const { return nodes_[level]; }
  uint64_t span(int level) const { return spans_[level]; }
  int count_width() const { return count_width_; }
  int spill_width() const { return spill_width_; }
  int record_bits() const { return record_bits_; }

  const Shape& NodeShape(int level, uint64_t index) const {
    return shapes_[index + 1 == nodes_[level] ? tail_shape_[level]
                                              : full_shape_[level]];
  }
  uint64_t NodeSize(int level, uint64_t index) const {
    return std::min(spans_[level], n_ - index * spans_[level]);
  }
  // Position of the node's field inside the stream.
  uint64_t NodeBit(int level, uint64_t index) const {
    return level_bit_base_[level] + index * shapes_[full_shape_[level]].memory_bits;
  }
  // First cell and number of cells covering the node's field.
  std::pair<uint64_t, uint64_t> NodeCells(int level, uint64_t index) const {
    const int bits = NodeShape(level, index).memory_bits;
    if (bits == 0) return {0, 0};
    const uint64_t first = NodeBit(level, index);
    const uint64_t last = first + bits - 1;
    return {directory_cells_ + first / w_, last / w_ - first / w_ + 1};
  }
  uint64_t stream_bits() const { return stream_bits_; }
  const Shape& shape(int id) const { return shapes_[id]; }

  // First cell and number of cells covering directory record j.
  std::pair<uint64_t, uint64_t> DirectoryCells(uint64_t j) const {
    if (record_bits_ == 0) return {0, 0};
    const uint64_t first_bit = j * record_bits_;
    const uint64_t last_bit = first_bit + record_bits_ - 1;
    return {first_bit / w_, last_bit / w_ - first_bit / w_ + 1};
  }

 private:
  int ShapeFor(int level, uint64_t size) {
    const auto key = std::make_pair(level, size);
    if (auto it = shape_ids_.find(key); it != shape_ids_.end()) return it->second;
    Shape s;
    s.level = level;
    s.size = size;
    std::vector<u128> universe;  // N(c), c in [0, size]
    double log2_total = 0;
    if (level == 0) {
      universe.resize(size + 1);
      for (uint64_t c = 0; c <= size; ++c) universe[c] = Binomial(size, c);
      log2_total = static_cast<double>(size);
    } else {
      const uint64_t child_span = spans_[level - 1];
      const uint64_t count = (size + child_span - 1) / child_span;
      for (uint64_t i = 0; i < count; ++i) {
        const uint64_t child_size = std::min(child_span, size - i * child_span);
        s.children.push_back(ShapeFor(level - 1, child_size));
      }
      for (int id : s.children) log2_total += Log2(shapes_[id].spill_total);
      if (log2_total > kMaxUniverseLog2) {
        throw ArgumentError("recursive t=" + std::to_string(t_) +
                            " needs node codes wider than 126 bits");
      }
      s.suffix.resize(s.children.size() + 1);
      s.suffix.back() = {1};
      for (size_t i = s.children.size(); i-- > 0;) {
        const Shape& child = shapes_[s.children[i]];
        const std::vector<u128>& rest = s.suffix[i + 1];
        std::vector<u128> conv(child.size + rest.size(), 0);
        for (uint64_t a = 0; a <= child.size; ++a) {
          const u128 ka = child.spill_count[a];
          for (size_t b = 0; b < rest.size(); ++b) conv[a + b] += ka * rest[b];
        }
        s.suffix[i] = std::move(conv);
      }
      universe = s.suffix[0];
    }
    const double free_bits =
        log2_total - std::log2(static_cast<double>(size + 1)) - slack_;
    s.memory_bits = free_bits > 0 ? static_cast<int>(std::floor(free_bits)) : 0;
    s.spill_count.resize(size + 1);
    s.spill_offset.resize(size + 2);
    s.spill_offset[0] = 0;
    for (uint64_t c = 0; c <= size; ++c) {
      s.spill_count[c] = CeilShift(universe[c], s.memory_bits);
      s.spill_offset[c + 1] = s.spill_offset[c] + s.spill_count[c];
    }
    s.spill_total = s.spill_offset[size + 1];
    shapes_.push_back(std::move(s));
    const int id = static_cast<int>(shapes_.size()) - 1;
    shape_ids_.emplace(key, id);
    return id;
  }

  uint64_t n_;
  int w_;
  int t_;
  uint64_t fanout_;
  double slack_;
  uint64_t leaf_bits_ = 0;
  std::vector<uint64_t> spans_;
  std::vector<uint64_t> nodes_;
  std::vector<int> full_shape_;
  std::vector<int> tail_shape_;
  std::vector<uint64_t> level_bit_base_;
  uint64_t stream_bits_ = 0;
  std::vector<Shape> shapes_;
  std::map<std::pair<int, uint64_t>, int> shape_ids_;
  int count_width_ = 0;
  int spill_width_ = 0;
  int record_bits_ = 0;
  uint64_t directory_cells_ = 0;
  uint64_t cell_count_ = 0;
  uint64_t worst_probes_ = 0;
};

std::shared_ptr<const RecursivePlan> GetPlan(uint64_t n, int w, int t,
                                             const RecursiveParams& p) {
  using Key = std::tuple<uint64_t, int, int, uint64_t, uint64_t, double>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const RecursivePlan>> cache;
  const Key key{n, w, t, p.leaf_bits, p.fanout, p.slack_bits};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto plan = std::make_shared<const RecursivePlan>(n, w, t, p);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, plan);
  return plan;
}

// Path of Rank(k) through the tree: top node, then per level the node index
// and k's offset inside it.
struct PathStep {
  uint64_t node = 0;
  uint64_t offset = 0;
};

class RecursiveAlgorithm final : public RankAlgorithm {
 public:
  explicit RecursiveAlgorithm(std::shared_ptr<const RecursivePlan> plan)
      : RankAlgorithm(plan->n(), plan->w()), plan_(std::move(plan)) {}

  uint64_t cell_count() const override { return plan_->cell_count(); }
  uint64_t worst_probes() const override { return plan_->worst_probes(); }
  StructureKind kind() const override { return StructureKind::kRecursive; }

 protected:
  std::optional<uint64_t> AddressAt(uint64_t k, size_t step) const override {
    const int t = plan_->t();
    std::array<PathStep, 64> path;
    Walk(k, path);
    const auto [dir_first, dir_count] = plan_->DirectoryCells(path[t - 1].node);
    if (step < dir_count) return dir_first + step;
    step -= dir_count;
    for (int l = t - 1; l >= 0; --l) {
      const auto [first, count] = plan_->NodeCells(l, path[l].node);
      if (step < count) return first + step;
      step -= count;
    }
    return std::nullopt;
  }

  uint64_t Answer(uint64_t k, std::span<const ProbeStep> reads) const override {
    const int t = plan_->t();
    const int w = plan_->w();
    std::array<PathStep, 64> path;
    Walk(k, path);
    size_t cursor = 0;

    // Directory record.
    const uint64_t top = path[t - 1].node;
    const auto [dir_first, dir_count] = plan_->DirectoryCells(top);
    BitString window;
    for (uint64_t i = 0; i < dir_count; ++i) {
      window.Append(reads[cursor++].content, w);
    }
    const uint64_t shift = top * plan_->record_bits() - dir_first * w;
    uint64_t rank = window.Read(shift, plan_->count_width());
    const int sw = plan_->spill_width();
    const uint64_t spill_pos = shift + plan_->count_width();
    u128 spill = window.Read(spill_pos, std::min(sw, 64));
    if (sw > 64) spill |= u128{window.Read(spill_pos + 64, sw - 64)} << 64;

    for (int l = t - 1; l >= 0; --l) {
      const Shape& s = plan_->NodeShape(l, path[l].node);
      const auto [first, spanned] = plan_->NodeCells(l, path[l].node);
      BitString field;
      for (uint64_t i = 0; i < spanned; ++i) {
        field.Append(reads[cursor++].content, w);
      }
      const uint64_t at = spanned == 0
          ? 0
          : plan_->NodeBit(l, path[l].node) - (first - plan_->directory_cells()) * w;
      const int mb = s.memory_bits;
      u128 low = spanned == 0 ? 0 : field.Read(at, std::min(mb, 64));
      if (mb > 64) low |= u128{field.Read(at + 64, mb - 64)} << 64;
      const uint64_t count = s.CountOfSpill(spill);
      const u128 index = ((spill - s.spill_offset[count]) << s.memory_bits) | low;
      const uint64_t offset = path[l].offset;
      if (l == 0) {
        return rank + LeafPrefix(s.size, count, index, offset);
      }
      // Unrank children up to the one holding `offset`.
      const uint64_t child = std::min<uint64_t>(
          offset / plan_->span(l - 1), s.children.size() - 1);
      u128 rest = index;
      int64_t remaining = static_cast<int64_t>(count);
      for (uint64_t i = 0; i <= child; ++i) {
        const Shape& cs = plan_->shape(s.children[i]);
        for (uint64_t c = 0; c <= cs.size; ++c) {
          const u128 tail = s.Suffix(i + 1, remaining - static_cast<int64_t>(c));
          const u128 block = cs.spill_count[c] * tail;
          if (rest < block) {
            if (i == child) {
              spill = cs.spill_offset[c] + rest / tail;
            } else {
              rank += c;
              remaining -= static_cast<int64_t>(c);
              rest %= tail;
            }
            break;
          }
          rest -= block;
        }
      }
    }
    return rank;
  }

 private:
  void Walk(uint64_t k, std::array<PathStep, 64>& path) const {
    const int t = plan_->t();
    const int top = t - 1;
    uint64_t node = std::min(k / plan_->span(top), plan_->nodes(top) - 1);
    uint64_t offset = k - node * plan_->span(top);
    path[top] = {node, offset};
    for (int l = top; l > 0; --l) {
      const Shape& s = plan_->NodeShape(l, node);
      const uint64_t child = std::min<uint64_t>(offset / plan_->span(l - 1),
                                                s.children.size() - 1);
      offset -= child * plan_->span(l - 1);
      node = node * plan_->fanout() + child;
      path[l - 1] = {node, offset};
    }
  }

  // Ones among the first `offset` bits of a leaf whose colex combination
  // index is `index`.
  static uint64_t LeafPrefix(uint64_t size, uint64_t count, u128 index,
                             uint64_t offset) {
    uint64_t ones = 0;
    uint64_t p = size;
    for (uint64_t j = count; j >= 1; --j) {
      // Largest p' < p with C(p', j) <= index.
      do {
        --p;
      } while (Binomial(p, j) > index);
      index -= Binomial(p, j);
      if (p < offset) ++ones;
    }
    return ones;
  }

  std::shared_ptr<const RecursivePlan> plan_;
};

void WriteField(BitString& stream, uint64_t at, int bits, u128 low) {
  for (int i = 0; i < bits; ++i) {
    stream.Set(at + i, static_cast<bool>((low >> i) & 1));
  }
}

struct NodeCode {
  uint64_t count = 0;
  u128 spill = 0;
};

NodeCode Emit(const Shape& s, uint64_t count, u128 index, BitString& stream,
              uint64_t at) {
  WriteField(stream, at, s.memory_bits, LowBits(index, s.memory_bits));
  const u128 high = s.memory_bits == 0 ? index : index >> s.memory_bits;
  return {count, s.spill_offset[count] + high};
}

}  // namespace

int MaxRecursiveDepth(uint64_t n, int word_bits, RecursiveParams params) {
  const uint64_t leaf =
      params.leaf_bits != 0 ? params.leaf_bits : word_bits + word_bits / 4;
  const uint64_t fanout = std::max<uint64_t>(params.fanout, 2);
  int t = 1;
  uint64_t span = leaf;
  while (span < n) {
    span *= fanout;
    ++t;
  }
  return t;
}

StructureLayout BuildRecursive(const BitArray& a, int t, int word_bits,
                               RecursiveParams params) {
  if (word_bits < 1 || word_bits > 64) throw ArgumentError("bad word_bits");
  const uint64_t n = a.size();
  if (BitWidth(n) > 64) throw ArgumentError("n too large");
  auto plan = GetPlan(n, word_bits, t, params);
  const int w = word_bits;
  std::vector<uint64_t> cells(plan->cell_count(), 0);
  BitString stream;
  stream.Resize(plan->stream_bits());

  // Leaves.
  std::vector<NodeCode> level(plan->nodes(0));
  for (uint64_t i = 0; i < plan->nodes(0); ++i) {
    const uint64_t offset = i * plan->span(0);
    const uint64_t size = plan->NodeSize(0, i);
    u128 index = 0;
    uint64_t count = 0;
    for (uint64_t p = 0; p < size; ++p) {
      if (a.bits().Get(offset + p)) {
        ++count;
        index += Binomial(p, count);
      }
    }
    level[i] = Emit(plan->NodeShape(0, i), count, index, stream,
                    plan->NodeBit(0, i));
  }

  // Internal levels.
  for (int l = 1; l < t; ++l) {
    std::vector<NodeCode> next(plan->nodes(l));
    for (uint64_t i = 0; i < plan->nodes(l); ++i) {
      const Shape& s = plan->NodeShape(l, i);
      const uint64_t first = i * plan->fanout();
      uint64_t total = 0;
      for (size_t j = 0; j < s.children.size(); ++j) total += level[first + j].count;
      u128 index = 0;
      int64_t remaining = static_cast<int64_t>(total);
      for (size_t j = 0; j < s.children.size(); ++j) {
        const Shape& cs = plan->shape(s.children[j]);
        const NodeCode& code = level[first + j];
        for (uint64_t c = 0; c < code.count; ++c) {
          index += cs.spill_count[c] *
                   s.Suffix(j + 1, remaining - static_cast<int64_t>(c));
        }
        index += (code.spill - cs.spill_offset[code.count]) *
                 s.Suffix(j + 1, remaining - static_cast<int64_t>(code.count));
        remaining -= static_cast<int64_t>(code.count);
      }
      next[i] = Emit(s, total, index, stream, plan->NodeBit(l, i));
    }
    level = std::move(next);
  }

  // Directory of (absolute rank, spill) per top node.
  BitString directory;
  uint64_t rank = 0;
  for (const NodeCode& code : level) {
    directory.Append(rank, plan->count_width());
    const int sw = plan->spill_width();
    directory.Append(static_cast<uint64_t>(code.spill), std::min(sw, 64));
    if (sw > 64) directory.Append(static_cast<uint64_t>(code.spill >> 64), sw - 64);
    rank += code.count;
  }
  std::vector<uint64_t> region;
  for (uint64_t c = 0; c < plan->directory_cells(); ++c) {
    const uint64_t pos = c * w;
    const int width =
        static_cast<int>(std::min<uint64_t>(w, directory.size() - pos));
    cells[c] = directory.Read(pos, width);
    region.push_back(c);
  }
  for (uint64_t pos = 0; pos < stream.size(); pos += w) {
    const int width = static_cast<int>(std::min<uint64_t>(w, stream.size() - pos));
    cells[plan->directory_cells() + pos / w] = stream.Read(pos, width);
  }

  auto algorithm = std::make_shared<RecursiveAlgorithm>(plan);
  return StructureLayout{algorithm, CellMemory(w, std::move(cells)),
                         PublishedBits(), std::move(region)};
}

}  // namespace rankprobe
