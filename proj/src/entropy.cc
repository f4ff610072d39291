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

#include "rankprobe/entropy.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <unordered_map>

#include <fmt/format.h>

#include "rankprobe/cell_probe.h"
#include "rankprobe/errors.h"
#include "rankprobe/random.h"

namespace rankprobe {

namespace {

long double ComputeBinomialEntropy(uint64_t m) {
  if (m == 0) return 0.0L;
  const long double ln2 = std::numbers::ln2_v<long double>;
  const long double log_fact_m = std::lgammal(static_cast<long double>(m) + 1);
  // Neumaier summation over the lower half, mirrored.
  long double sum = 0.0L;
  long double comp = 0.0L;
  auto add = [&](long double x) {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  };
  for (uint64_t i = 0; 2 * i <= m; ++i) {
    const long double log2p =
        (log_fact_m - std::lgammal(static_cast<long double>(i) + 1) -
         std::lgammal(static_cast<long double>(m - i) + 1)) /
            ln2 -
        static_cast<long double>(m);
    const long double term = -std::exp2(log2p) * log2p;
    add(2 * i == m ? term : 2 * term);
  }
  return sum + comp;
}

// c * log2(c), with 0 log 0 = 0.
long double XLogX(uint64_t c) {
  if (c == 0) return 0.0L;
  const long double x = static_cast<long double>(c);
  return x * std::log2(x);
}

long double EntropyOfCounts(const std::vector<uint64_t>& counts) {
  uint64_t total = 0;
  long double s = 0.0L;
  for (uint64_t c : counts) {
    total += c;
    s += XLogX(c);
  }
  if (total == 0) return 0.0L;
  return std::log2(static_cast<long double>(total)) -
         s / static_cast<long double>(total);
}

struct QuerySets {
  uint64_t m = 0;
  std::vector<uint64_t> q0;
  std::vector<uint64_t> qstar;
  std::vector<uint64_t> joint;
};

QuerySets Validate(uint64_t n, uint64_t k, uint64_t delta,
                   const std::vector<uint64_t>& qstar) {
  QueryBlocks blocks(n, k);
  QuerySets sets;
  sets.m = blocks.block_size();
  if (delta >= sets.m) throw ArgumentError("delta must be < block size");
  sets.q0 = blocks.QDelta(0);
  sets.qstar = qstar;
  std::sort(sets.qstar.begin(), sets.qstar.end());
  if (std::adjacent_find(sets.qstar.begin(), sets.qstar.end()) !=
      sets.qstar.end()) {
    throw ArgumentError("qstar has repeated queries");
  }
  for (uint64_t q : sets.qstar) {
    if (q % sets.m != delta || q / sets.m >= k) {
      throw ArgumentError(fmt::format("query {} is not in Q_{}", q, delta));
    }
  }
  sets.joint = sets.q0;
  sets.joint.insert(sets.joint.end(), sets.qstar.begin(), sets.qstar.end());
  std::sort(sets.joint.begin(), sets.joint.end());
  sets.joint.erase(std::unique(sets.joint.begin(), sets.joint.end()),
                   sets.joint.end());
  return sets;
}

// Dense ids for answer tuples.
class TupleIds {
 public:
  uint32_t Id(const std::string& key) {
    auto [it, inserted] = ids_.try_emplace(key, static_cast<uint32_t>(ids_.size()));
    return it->second;
  }
  size_t size() const { return ids_.size(); }

 private:
  std::unordered_map<std::string, uint32_t> ids_;
};

std::string AnswerKey(const std::vector<uint64_t>& answers) {
  std::string key;
  key.reserve(answers.size() * 3);
  for (uint64_t a : answers) {
    do {
      key.push_back(static_cast<char>(a & 0x7f) | (a > 0x7f ? '\x80' : 0));
      a >>= 7;
    } while (a != 0);
  }
  return key;
}

// Joint answer counts for the exhaustive tabulation: one cell per distinct
// (Ans(Q_0), Ans(Q*)) pair.
struct JointTable {
  std::vector<uint64_t> count;
  std::vector<uint32_t> x;
  std::vector<uint32_t> y;
  std::vector<uint64_t> count_x;
  std::vector<uint64_t> count_y;
};

JointTable Tabulate(uint64_t n, const QuerySets& sets, const ArrayEvent& event) {
  TupleIds xs;
  TupleIds ys;
  std::unordered_map<uint64_t, uint32_t> cell_of;
  JointTable table;
  std::vector<uint64_t> ax(sets.q0.size());
  std::vector<uint64_t> ay(sets.qstar.size());
  for (uint64_t v = 0; v < (uint64_t{1} << n); ++v) {
    if (event && !event(BitArray::FromInteger(v, n))) continue;
    auto rank = [v](uint64_t p) {
      return static_cast<uint64_t>(
          std::popcount(p >= 64 ? v : v & ((uint64_t{1} << p) - 1)));
    };
    for (size_t i = 0; i < ax.size(); ++i) ax[i] = rank(sets.q0[i]);
    for (size_t i = 0; i < ay.size(); ++i) ay[i] = rank(sets.qstar[i]);
    const uint32_t xi = xs.Id(AnswerKey(ax));
    const uint32_t yi = ys.Id(AnswerKey(ay));
    const uint64_t key = (uint64_t{xi} << 32) | yi;
    auto [it, inserted] =
        cell_of.try_emplace(key, static_cast<uint32_t>(table.count.size()));
    if (inserted) {
      table.count.push_back(0);
      table.x.push_back(xi);
      table.y.push_back(yi);
    }
    ++table.count[it->second];
  }
  table.count_x.assign(xs.size(), 0);
  table.count_y.assign(ys.size(), 0);
  for (size_t c = 0; c < table.count.size(); ++c) {
    table.count_x[table.x[c]] += table.count[c];
    table.count_y[table.y[c]] += table.count[c];
  }
  return table;
}

void FillFromTable(const JointTable& t, EntropyReport& report) {
  report.h_q0 = static_cast<double>(EntropyOfCounts(t.count_x));
  report.h_qstar = static_cast<double>(EntropyOfCounts(t.count_y));
  const long double joint = EntropyOfCounts(t.count);
  report.h_joint = static_cast<double>(joint);
  report.deficit = static_cast<double>(EntropyOfCounts(t.count_x) +
                                       EntropyOfCounts(t.count_y) - joint);
}

// Mutual information of a JointTable under unit moves, maintained through
// F = sum f(c_xy) - sum f(c_x) - sum f(c_y) + f(N), I = F / N.
class MutualInformation {
 public:
  explicit MutualInformation(JointTable& t) : t_(t) {
    for (uint64_t c : t_.count) {
      f_ += XLogX(c);
      total_ += c;
    }
    for (uint64_t c : t_.count_x) f_ -= XLogX(c);
    for (uint64_t c : t_.count_y) f_ -= XLogX(c);
    f_ += XLogX(total_);
  }

  long double value() const {
    return total_ == 0 ? 0.0L : f_ / static_cast<long double>(total_);
  }
  uint64_t total() const { return total_; }

  void Move(size_t cell, int64_t d) {
    uint64_t& c = t_.count[cell];
    uint64_t& cx = t_.count_x[t_.x[cell]];
    uint64_t& cy = t_.count_y[t_.y[cell]];
    f_ -= XLogX(c) - XLogX(cx) - XLogX(cy) + XLogX(total_);
    c += d;
    cx += d;
    cy += d;
    total_ += d;
    f_ += XLogX(c) - XLogX(cx) - XLogX(cy) + XLogX(total_);
  }

  long double ValueAfter(size_t cell, int64_t d) {
    Move(cell, d);
    const long double v = value();
    Move(cell, -d);
    return v;
  }

 private:
  JointTable& t_;
  long double f_ = 0.0L;
  uint64_t total_ = 0;
};

}  // namespace

void LabConfig::Validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ArgumentError("epsilon must be in (0, 1)");
  }
  if (!(gamma >= 1.0)) throw ArgumentError("gamma must be >= 1");
  if (montecarlo_trials < 1) throw ArgumentError("trials must be >= 1");
}

long double BinomialEntropy(uint64_t m) {
  static std::mutex mu;
  static std::vector<long double> cache;
  constexpr uint64_t kCacheLimit = 1 << 16;
  if (m >= kCacheLimit) return ComputeBinomialEntropy(m);
  std::lock_guard<std::mutex> lock(mu);
  while (cache.size() <= m) cache.push_back(ComputeBinomialEntropy(cache.size()));
  return cache[m];
}

double BinomialEntropyEstimate(uint64_t m) {
  if (m == 0) throw ArgumentError("estimate needs m >= 1");
  return 0.5 * std::log2(std::numbers::pi * std::numbers::e *
                         static_cast<double>(m) / 2.0);
}

long double BlockDeficit(uint64_t m, uint64_t delta) {
  if (delta == 0 || delta >= m) throw ArgumentError("block deficit needs 0 < delta < m");
  return 2 * BinomialEntropy(m) - BinomialEntropy(delta) -
         BinomialEntropy(m - delta);
}

long double Q0Entropy(uint64_t n, uint64_t k) {
  QueryBlocks blocks(n, k);
  return static_cast<long double>(k - 1) * BinomialEntropy(blocks.block_size());
}

long double AnswerEntropy(std::vector<uint64_t> positions) {
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()),
                  positions.end());
  long double h = 0.0L;
  uint64_t previous = 0;
  for (uint64_t p : positions) {
    h += BinomialEntropy(p - previous);
    previous = p;
  }
  return h;
}

EntropyReport DeficitAnalytic(uint64_t n, uint64_t k, uint64_t delta,
                                    const std::vector<uint64_t>& qstar) {
  const QuerySets sets = Validate(n, k, delta, qstar);
  const uint64_t m = sets.m;
  EntropyReport report;
  report.n = n;
  report.k = k;
  report.delta = delta;
  report.qstar = sets.qstar;
  const long double h0 = AnswerEntropy(sets.q0);
  const long double hs = AnswerEntropy(sets.qstar);
  const long double hj = AnswerEntropy(sets.joint);
  report.h_q0 = static_cast<double>(h0);
  report.h_qstar = static_cast<double>(hs);
  report.h_joint = static_cast<double>(hj);
  report.deficit = static_cast<double>(h0 + hs - hj);

  // Each Q* query splits one Q_0 increment of length m into delta and
  // m - delta, and its own increment from the previous Q* query is compared
  // against the delta-part it shares with Q_0.
  report.per_block_deficits.assign(k, 0.0);
  std::vector<bool> in(k, false);
  for (uint64_t q : sets.qstar) in[q / m] = true;
  const long double hm = BinomialEntropy(m);
  const long double hd = BinomialEntropy(delta);
  const long double hr = BinomialEntropy(m - delta);
  std::optional<uint64_t> previous;
  for (uint64_t q : sets.qstar) {
    const uint64_t b = q / m;
    const long double inc =
        previous ? BinomialEntropy((b - *previous) * m) : BinomialEntropy(q);
    long double d = inc - hd;
    if (b >= 1 && in[b - 1]) d += hm - hr;
    if (b + 1 <= k - 1 && !in[b + 1]) d += hm - hr;
    report.per_block_deficits[b] = static_cast<double>(d);
    previous = b;
  }
  return report;
}

EntropyReport DeficitBruteforce(uint64_t n, uint64_t k, uint64_t delta,
                                      const std::vector<uint64_t>& qstar,
                                      const ArrayEvent& event) {
  if (n > kMaxBruteForceBits) {
    throw Refusal(fmt::format("brute force needs n <= {}, got {}",
                              kMaxBruteForceBits, n));
  }
  const QuerySets sets = Validate(n, k, delta, qstar);
  JointTable table = Tabulate(n, sets, event);
  if (table.count.empty()) throw Refusal("event contains no arrays");
  EntropyReport report;
  report.n = n;
  report.k = k;
  report.delta = delta;
  report.qstar = sets.qstar;
  FillFromTable(table, report);
  return report;
}

EntropyReport ConditionedDeficitMonteCarlo(uint64_t n, uint64_t k,
                                           uint64_t delta,
                                           const std::vector<uint64_t>& qstar,
                                           const ArrayEvent& event,
                                           const LabConfig& config) {
  config.Validate();
  const QuerySets sets = Validate(n, k, delta, qstar);
  SeededRng rng(config.rng_seed);
  TupleIds xs;
  TupleIds ys;
  TupleIds xys;
  struct Sample {
    uint32_t x, y, xy;
  };
  std::vector<Sample> samples;
  std::vector<uint64_t> ax(sets.q0.size());
  std::vector<uint64_t> ay(sets.qstar.size());
  for (uint64_t trial = 0; trial < config.montecarlo_trials; ++trial) {
    const BitArray a = BitArray::Random(n, rng);
    if (event && !event(a)) continue;
    for (size_t i = 0; i < ax.size(); ++i) ax[i] = RankOracle(a, sets.q0[i]);
    for (size_t i = 0; i < ay.size(); ++i) ay[i] = RankOracle(a, sets.qstar[i]);
    const std::string kx = AnswerKey(ax);
    const std::string ky = AnswerKey(ay);
    samples.push_back({xs.Id(kx), ys.Id(ky), xys.Id(kx + '|' + ky)});
  }
  const double rate = static_cast<double>(samples.size()) /
                      static_cast<double>(config.montecarlo_trials);
  if (samples.size() < kMinAccepted) {
    throw Refusal(fmt::format(
        "event accepted {} of {} trials (rate {:.6f}); need {} samples",
        samples.size(), config.montecarlo_trials, rate, kMinAccepted));
  }

  struct Estimate {
    long double hx, hy, hxy;
  };
  const long double ln2 = std::numbers::ln2_v<long double>;
  auto estimate = [&](const std::vector<uint32_t>& pick) {
    std::vector<uint64_t> cx(xs.size(), 0), cy(ys.size(), 0), cxy(xys.size(), 0);
    for (uint32_t i : pick) {
      ++cx[samples[i].x];
      ++cy[samples[i].y];
      ++cxy[samples[i].xy];
    }
    const long double total = static_cast<long double>(pick.size());
    auto corrected = [&](const std::vector<uint64_t>& c) {
      const auto support = std::count_if(c.begin(), c.end(),
                                         [](uint64_t v) { return v > 0; });
      return EntropyOfCounts(c) +
             static_cast<long double>(support - 1) / (2 * total * ln2);
    };
    return Estimate{corrected(cx), corrected(cy), corrected(cxy)};
  };

  std::vector<uint32_t> all(samples.size());
  for (uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  const Estimate point = estimate(all);

  constexpr int kBootstrap = 200;
  std::vector<double> deficits;
  deficits.reserve(kBootstrap);
  SeededRng boot = rng.Fork(1);
  std::vector<uint32_t> pick(samples.size());
  for (int r = 0; r < kBootstrap; ++r) {
    for (auto& p : pick) p = static_cast<uint32_t>(boot.Uniform(samples.size()));
    const Estimate e = estimate(pick);
    deficits.push_back(static_cast<double>(e.hx + e.hy - e.hxy));
  }
  std::sort(deficits.begin(), deficits.end());

  EntropyReport report;
  report.n = n;
  report.k = k;
  report.delta = delta;
  report.qstar = sets.qstar;
  report.h_q0 = static_cast<double>(point.hx);
  report.h_qstar = static_cast<double>(point.hy);
  report.h_joint = static_cast<double>(point.hxy);
  report.deficit = static_cast<double>(point.hx + point.hy - point.hxy);
  report.samples = samples.size();
  report.acceptance_rate = rate;
  report.ci_low = deficits[kBootstrap * 25 / 1000];
  report.ci_high = deficits[kBootstrap * 975 / 1000 - 1];
  return report;
}

AdversarialEventResult AdversarialEventSearch(uint64_t n, uint64_t k,
                                              uint64_t delta,
                                              const std::vector<uint64_t>& qstar,
                                              double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ArgumentError("epsilon must be in (0, 1)");
  }
  if (n > kMaxBruteForceBits) {
    throw Refusal(fmt::format("adversarial search needs n <= {}, got {}",
                              kMaxBruteForceBits, n));
  }
  const QuerySets sets = Validate(n, k, delta, qstar);
  AdversarialEventResult result;
  result.unconditioned = DeficitBruteforce(n, k, delta, qstar);

  JointTable table = Tabulate(n, sets, nullptr);
  const std::vector<uint64_t> original = table.count;
  result.total = uint64_t{1} << n;
  result.required_mass =
      std::exp2(-epsilon * static_cast<double>(sets.qstar.size()));
  const uint64_t keep = static_cast<uint64_t>(
      std::ceil(result.required_mass * static_cast<double>(result.total)));
  MutualInformation mi(table);

  // Greedy removal in batches; the batch shrinks to single arrays at the end.
  uint64_t to_remove = result.total - keep;
  const uint64_t batch = std::max<uint64_t>(1, to_remove / 4000);
  while (to_remove > 0) {
    const uint64_t step = std::min(batch, to_remove);
    size_t best = table.count.size();
    long double best_value = 0.0L;
    for (size_t c = 0; c < table.count.size(); ++c) {
      if (table.count[c] < step) continue;
      const long double v = mi.ValueAfter(c, -static_cast<int64_t>(step));
      if (best == table.count.size() || v < best_value) {
        best = c;
        best_value = v;
      }
    }
    if (best == table.count.size()) break;
    mi.Move(best, -static_cast<int64_t>(step));
    to_remove -= step;
    ++result.greedy_steps;
  }

  // Swaps: move one array's worth of mass from a kept cell to a cell with
  // removed mass whenever that lowers the deficit.
  constexpr uint64_t kMaxSwaps = 20000;
  while (result.swap_steps < kMaxSwaps) {
    const long double current = mi.value();
    size_t best_from = 0;
    size_t best_to = 0;
    long double best_value = current;
    // Cheapest removals first; only a few candidates are paired.
    std::vector<std::pair<long double, size_t>> removals;
    for (size_t c = 0; c < table.count.size(); ++c) {
      if (table.count[c] > 0) removals.push_back({mi.ValueAfter(c, -1), c});
    }
    const size_t top = std::min<size_t>(8, removals.size());
    std::partial_sort(removals.begin(), removals.begin() + top, removals.end());
    for (size_t r = 0; r < top; ++r) {
      const size_t from = removals[r].second;
      mi.Move(from, -1);
      for (size_t to = 0; to < table.count.size(); ++to) {
        if (to == from || table.count[to] >= original[to]) continue;
        const long double v = mi.ValueAfter(to, 1);
        if (v < best_value - 1e-15L) {
          best_value = v;
          best_from = from;
          best_to = to;
        }
      }
      mi.Move(from, 1);
    }
    if (best_value >= current - 1e-15L) break;
    mi.Move(best_from, -1);
    mi.Move(best_to, 1);
    ++result.swap_steps;
  }

  result.kept = mi.total();
  result.conditioned.n = n;
  result.conditioned.k = k;
  result.conditioned.delta = delta;
  result.conditioned.qstar = sets.qstar;
  FillFromTable(table, result.conditioned);
  result.ratio = result.unconditioned.deficit > 0
                     ? result.conditioned.deficit / result.unconditioned.deficit
                     : 1.0;
  return result;
}

std::vector<std::string> EntropyReportHeader() {
  return {"n",       "k",        "delta",   "qstar_size", "h_q0",
          "h_qstar", "h_joint",  "deficit", "samples",    "acceptance_rate",
          "ci_low",  "ci_high",  "per_block_deficits"};
}

std::vector<std::string> EntropyReportRow(const EntropyReport& r) {
  std::string blocks;
  for (size_t i = 0; i < r.per_block_deficits.size(); ++i) {
    if (i > 0) blocks += ';';
    blocks += fmt::format("{:.12f}", r.per_block_deficits[i]);
  }
  return {std::to_string(r.n),
          std::to_string(r.k),
          std::to_string(r.delta),
          std::to_string(r.qstar.size()),
          fmt::format("{:.12f}", r.h_q0),
          fmt::format("{:.12f}", r.h_qstar),
          fmt::format("{:.12f}", r.h_joint),
          fmt::format("{:.12f}", r.deficit),
          std::to_string(r.samples),
          fmt::format("{:.6f}", r.acceptance_rate),
          fmt::format("{:.12f}", r.ci_low),
          fmt::format("{:.12f}", r.ci_high),
          blocks};
}

}  // namespace rankprobe
