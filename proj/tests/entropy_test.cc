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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <map>

#include "rankprobe/cell_probe.h"
#include "rankprobe/errors.h"

namespace rankprobe {
namespace {

using u128 = unsigned __int128;

// Direct enumeration with exact integer binomials, m <= 120.
long double ExactEntropy(uint64_t m) {
  std::vector<u128> row(m + 1, 0);
  row[0] = 1;
  for (uint64_t r = 1; r <= m; ++r) {
    for (uint64_t j = r; j >= 1; --j) row[j] += row[j - 1];
  }
  long double h = 0.0L;
  const long double total = std::ldexp(1.0L, static_cast<int>(m));
  for (uint64_t j = 0; j <= m; ++j) {
    const long double p = static_cast<long double>(row[j]) / total;
    h -= p * std::log2(p);
  }
  return h;
}

// Probabilities by the ratio recurrence from the mode outward.
long double RecurrenceEntropy(uint64_t m) {
  std::vector<long double> w(m + 1);
  const uint64_t mid = m / 2;
  w[mid] = 1.0L;
  for (uint64_t j = mid; j < m; ++j) {
    w[j + 1] = w[j] * static_cast<long double>(m - j) / (j + 1);
  }
  for (uint64_t j = mid; j > 0; --j) {
    w[j - 1] = w[j] * static_cast<long double>(j) / (m - j + 1);
  }
  long double z = 0.0L;
  for (long double x : w) z += x;
  long double h = 0.0L;
  for (long double x : w) {
    const long double p = x / z;
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

// Entropy of a list of answer vectors, by counting.
double CountEntropy(const std::map<std::vector<int>, int>& counts, int total) {
  double h = 0.0;
  for (const auto& [key, c] : counts) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

// Deficit computed straight from the definition over all 2^n arrays.
double ReferenceDeficit(uint64_t n, const std::vector<uint64_t>& q0,
                        const std::vector<uint64_t>& qs,
                        bool (*keep)(uint64_t) = nullptr) {
  std::map<std::vector<int>, int> cx, cy, cxy;
  int total = 0;
  for (uint64_t v = 0; v < (uint64_t{1} << n); ++v) {
    if (keep && !keep(v)) continue;
    std::vector<int> x, y;
    for (uint64_t q : q0) x.push_back(std::popcount(v & ((uint64_t{1} << q) - 1)));
    for (uint64_t q : qs) y.push_back(std::popcount(v & ((uint64_t{1} << q) - 1)));
    std::vector<int> xy = x;
    xy.push_back(-1);
    xy.insert(xy.end(), y.begin(), y.end());
    ++cx[x];
    ++cy[y];
    ++cxy[xy];
    ++total;
  }
  return CountEntropy(cx, total) + CountEntropy(cy, total) -
         CountEntropy(cxy, total);
}

std::vector<uint64_t> Subset(const std::vector<uint64_t>& qd, uint32_t mask) {
  std::vector<uint64_t> out;
  for (size_t i = 0; i < qd.size(); ++i) {
    if (mask >> i & 1) out.push_back(qd[i]);
  }
  return out;
}

TEST(BinomialEntropy, SmallValues) {
  EXPECT_EQ(BinomialEntropy(0), 0.0L);
  EXPECT_NEAR(static_cast<double>(BinomialEntropy(1)), 1.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(BinomialEntropy(2)), 1.5, 1e-15);
  EXPECT_NEAR(static_cast<double>(BinomialEntropy(4)), 2.0306390622295662, 1e-12);
}

TEST(BinomialEntropy, MatchesExactEnumeration) {
  for (uint64_t m = 0; m <= 120; ++m) {
    EXPECT_NEAR(static_cast<double>(BinomialEntropy(m)),
                static_cast<double>(ExactEntropy(m)), 1e-12)
        << "m=" << m;
  }
}

TEST(BinomialEntropy, MatchesRecurrenceUpTo4096) {
  for (uint64_t m = 1; m <= 4096; m += (m < 200 ? 1 : 37)) {
    EXPECT_NEAR(static_cast<double>(BinomialEntropy(m)),
                static_cast<double>(RecurrenceEntropy(m)), 1e-10)
        << "m=" << m;
  }
}

TEST(BinomialEntropy, StrictlyIncreasing) {
  for (uint64_t m = 1; m < 3000; ++m) {
    EXPECT_LT(BinomialEntropy(m), BinomialEntropy(m + 1));
  }
}

TEST(Estimate, ClosedFormValues) {
  EXPECT_NEAR(BinomialEntropyEstimate(4), 2.0471, 1e-3);
  EXPECT_NEAR(BinomialEntropyEstimate(2), 1.5471, 1e-3);
  EXPECT_THROW(BinomialEntropyEstimate(0), ArgumentError);
  for (uint64_t m = 1; m < 5000; ++m) {
    EXPECT_LT(BinomialEntropyEstimate(m), BinomialEntropyEstimate(m + 1));
  }
}

TEST(Estimate, ErrorShrinksLikeOneOverM) {
  constexpr double kC = 0.07;
  for (uint64_t m = 4; m <= 4096; ++m) {
    const double err = std::fabs(BinomialEntropyEstimate(m) -
                                 static_cast<double>(RecurrenceEntropy(m)));
    ASSERT_LE(err, kC / static_cast<double>(m)) << "m=" << m;
  }
}

TEST(BlockDeficit, Examples) {
  EXPECT_NEAR(static_cast<double>(BlockDeficit(2, 1)), 1.0, 1e-15);
  const double h4 = static_cast<double>(ExactEntropy(4));
  const double h2 = static_cast<double>(ExactEntropy(2));
  EXPECT_NEAR(static_cast<double>(BlockDeficit(4, 2)), 2 * h4 - 2 * h2, 1e-12);
  EXPECT_NEAR(static_cast<double>(BlockDeficit(4, 2)), 1.0613, 1e-4);
  EXPECT_THROW(BlockDeficit(4, 0), ArgumentError);
  EXPECT_THROW(BlockDeficit(4, 4), ArgumentError);
}

TEST(BlockDeficit, MinimumAtHalfAndAtLeastOneBitSlack) {
  for (uint64_t m = 2; m <= 512; m += 2) {
    const long double at_half = BlockDeficit(m, m / 2);
    EXPECT_GE(static_cast<double>(at_half), 1.0 - 2.0 / m);
    for (uint64_t d = 1; d < m; ++d) {
      EXPECT_GE(BlockDeficit(m, d), at_half - 1e-12L) << m << " " << d;
    }
  }
}

TEST(Q0Entropy, MatchesBruteForceTabulation) {
  EXPECT_NEAR(static_cast<double>(Q0Entropy(16, 4)),
              3 * static_cast<double>(ExactEntropy(4)), 1e-12);
  EXPECT_EQ(Q0Entropy(16, 1), 0.0L);
  for (uint64_t k : {1u, 2u, 4u, 8u, 16u}) {
    const auto q0 = QueryBlocks(16, k).QDelta(0);
    EntropyReport r = DeficitBruteforce(16, k, 0, {});
    EXPECT_NEAR(r.h_q0, static_cast<double>(Q0Entropy(16, k)), 1e-9);
    EXPECT_NEAR(r.h_q0, static_cast<double>(AnswerEntropy(q0)), 1e-9);
  }
}

TEST(AnswerEntropy, SingleRankIsBinomial) {
  EXPECT_NEAR(static_cast<double>(AnswerEntropy({2})), 1.5, 1e-15);
  EXPECT_NEAR(static_cast<double>(AnswerEntropy({0, 1})), 1.0, 1e-15);
}

TEST(Bruteforce, TwoBitArray) {
  EntropyReport r = DeficitBruteforce(2, 1, 1, {1});
  EXPECT_NEAR(r.h_q0, 0.0, 1e-15);
  EXPECT_NEAR(r.h_qstar, 1.0, 1e-15);
  EXPECT_NEAR(r.deficit, 0.0, 1e-15);
}

TEST(Bruteforce, RefusesLargeN) {
  EXPECT_THROW(DeficitBruteforce(21, 3, 1, {}), Refusal);
}

TEST(Bruteforce, AgreesWithDefinitionAtTwelve) {
  const auto q0 = QueryBlocks(12, 3).QDelta(0);
  const auto qd = QueryBlocks(12, 3).QDelta(1);
  for (uint32_t mask = 0; mask < 8; ++mask) {
    const auto qs = Subset(qd, mask);
    EntropyReport r = DeficitBruteforce(12, 3, 1, qs);
    EXPECT_NEAR(r.deficit, ReferenceDeficit(12, q0, qs), 1e-9);
  }
}

TEST(Analytic, RejectsForeignQueries) {
  EXPECT_THROW(DeficitAnalytic(16, 4, 2, {3}), ArgumentError);
  EXPECT_THROW(DeficitAnalytic(16, 4, 2, {18}), ArgumentError);
  EXPECT_THROW(DeficitAnalytic(16, 4, 4, {}), ArgumentError);
  EXPECT_THROW(DeficitAnalytic(16, 4, 2, {2, 2}), ArgumentError);
}

TEST(Analytic, EmptyQStarHasNoDeficit) {
  EntropyReport r = DeficitAnalytic(16, 4, 2, {});
  EXPECT_NEAR(r.deficit, 0.0, 1e-15);
  for (double d : r.per_block_deficits) EXPECT_EQ(d, 0.0);
}

TEST(Analytic, FullQDeltaAtSixteen) {
  const auto qd = QueryBlocks(16, 4).QDelta(2);
  EntropyReport r = DeficitAnalytic(16, 4, 2, qd);
  EXPECT_GE(r.deficit, 3.0);
  EXPECT_NEAR(r.deficit, 3 * static_cast<double>(BlockDeficit(4, 2)), 1e-12);
  EXPECT_NEAR(r.per_block_deficits[0], 0.0, 1e-12);
  EntropyReport b = DeficitBruteforce(16, 4, 2, qd);
  EXPECT_NEAR(r.deficit, b.deficit, 1e-9);
  EXPECT_NEAR(r.h_q0, b.h_q0, 1e-9);
  EXPECT_NEAR(r.h_qstar, b.h_qstar, 1e-9);
  EXPECT_NEAR(r.h_joint, b.h_joint, 1e-9);
}

TEST(Analytic, AgreesWithBruteForceOnAllSubsets) {
  for (uint64_t k : {1u, 2u, 4u, 8u}) {
    QueryBlocks blocks(16, k);
    for (uint64_t delta = 0; delta < blocks.block_size(); ++delta) {
      const auto qd = blocks.QDelta(delta);
      for (uint32_t mask = 0; mask < (1u << k); ++mask) {
        const auto qs = Subset(qd, mask);
        EntropyReport a = DeficitAnalytic(16, k, delta, qs);
        EntropyReport b = DeficitBruteforce(16, k, delta, qs);
        ASSERT_NEAR(a.deficit, b.deficit, 1e-9) << k << " " << delta << " " << mask;
        ASSERT_GE(b.deficit, -1e-12);
      }
    }
  }
}

TEST(Analytic, PerBlockDeficitsSumToTotal) {
  for (uint64_t n : {16u, 100u, 4096u}) {
    for (uint64_t k : {1u, 3u, 4u, 16u}) {
      QueryBlocks blocks(n, k);
      for (uint64_t delta = 0; delta < blocks.block_size(); delta += 1 + delta / 3) {
        const auto qd = blocks.QDelta(delta);
        for (uint32_t mask = 0; mask < std::min<uint32_t>(1u << k, 512); mask += 7) {
          EntropyReport r = DeficitAnalytic(n, k, delta, Subset(qd, mask));
          double sum = 0;
          for (double d : r.per_block_deficits) sum += d;
          ASSERT_NEAR(sum, r.deficit, 1e-9);
        }
      }
    }
  }
}

TEST(Analytic, SubsetMonotoneAtSixteen) {
  const auto qd = QueryBlocks(16, 4).QDelta(2);
  for (uint32_t big = 0; big < 16; ++big) {
    const double outer = DeficitAnalytic(16, 4, 2, Subset(qd, big)).deficit;
    for (uint32_t small = big;; small = (small - 1) & big) {
      const double inner =
          DeficitAnalytic(16, 4, 2, Subset(qd, small)).deficit;
      EXPECT_LE(inner, outer + 1e-12);
      if (small == 0) break;
    }
  }
}

TEST(Analytic, DeficitBoundedBelowByNonFirstBlocks) {
  for (uint64_t k : {4u, 6u, 8u}) {
    for (uint64_t m : {4u, 10u, 64u}) {
      for (uint64_t delta = 1; delta < m; ++delta) {
        const auto qd = QueryBlocks(k * m, k).QDelta(delta);
        const double floor_per_block = static_cast<double>(BlockDeficit(m, delta));
        for (uint32_t mask = 1; mask < (1u << k); ++mask) {
          const auto qs = Subset(qd, mask);
          EntropyReport r = DeficitAnalytic(k * m, k, delta, qs);
          EXPECT_GE(r.deficit + 1e-9, (qs.size() - 1) * floor_per_block);
        }
      }
    }
  }
}

bool FirstBitZero(uint64_t v) { return (v & 1) == 0; }

TEST(Conditioned, FirstBitZeroKeepsMostOfTheDeficit) {
  const auto qd = QueryBlocks(16, 4).QDelta(2);
  auto event = [](const BitArray& a) { return !a.at(1); };
  EntropyReport plain = DeficitBruteforce(16, 4, 2, qd);
  EntropyReport cond = DeficitBruteforce(16, 4, 2, qd, event);
  EXPECT_NEAR(cond.deficit,
              ReferenceDeficit(16, QueryBlocks(16, 4).QDelta(0), qd, FirstBitZero),
              1e-9);
  EXPECT_GE(cond.deficit, 0.8 * plain.deficit);
}

TEST(Conditioned, EmptyEventRefused) {
  auto never = [](const BitArray&) { return false; };
  EXPECT_THROW(DeficitBruteforce(8, 2, 1, {1}, never), Refusal);
}

TEST(MonteCarlo, VacuousEventMatchesAnalytic) {
  const auto qd = QueryBlocks(16, 4).QDelta(2);
  LabConfig config;
  config.montecarlo_trials = 40000;
  config.rng_seed = 7;
  EntropyReport mc = ConditionedDeficitMonteCarlo(16, 4, 2, qd, nullptr, config);
  EntropyReport exact = DeficitAnalytic(16, 4, 2, qd);
  EXPECT_EQ(mc.samples, 40000u);
  EXPECT_DOUBLE_EQ(mc.acceptance_rate, 1.0);
  EXPECT_LE(mc.ci_low, mc.ci_high);
  EXPECT_LE(mc.ci_low - 0.02, exact.deficit);
  EXPECT_GE(mc.ci_high + 0.02, exact.deficit);
}

TEST(MonteCarlo, DeterministicForSeed) {
  const auto qd = QueryBlocks(64, 8).QDelta(3);
  LabConfig config;
  config.montecarlo_trials = 3000;
  auto event = [](const BitArray& a) { return a.at(5); };
  EntropyReport a = ConditionedDeficitMonteCarlo(64, 8, 3, qd, event, config);
  EntropyReport b = ConditionedDeficitMonteCarlo(64, 8, 3, qd, event, config);
  EXPECT_EQ(a.deficit, b.deficit);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_NEAR(a.acceptance_rate, 0.5, 0.05);
}

TEST(MonteCarlo, RareEventRefused) {
  LabConfig config;
  config.montecarlo_trials = 2000;
  auto rare = [](const BitArray& a) {
    for (uint64_t i = 1; i <= 12; ++i) {
      if (!a.at(i)) return false;
    }
    return true;
  };
  EXPECT_THROW(ConditionedDeficitMonteCarlo(64, 4, 1, {1}, rare, config), Refusal);
}

TEST(MonteCarlo, RejectsBadConfig) {
  LabConfig config;
  config.epsilon = 0;
  EXPECT_THROW(ConditionedDeficitMonteCarlo(16, 4, 1, {}, nullptr, config),
               ArgumentError);
}

TEST(Adversarial, EventKeepsRequiredMassAndHalfTheDeficit) {
  const auto qd = QueryBlocks(16, 4).QDelta(2);
  AdversarialEventResult r = AdversarialEventSearch(16, 4, 2, qd, 0.05);
  EXPECT_EQ(r.total, 65536u);
  EXPECT_GE(static_cast<double>(r.kept), r.required_mass * 65536);
  EXPECT_LT(r.conditioned.deficit, r.unconditioned.deficit);
  EXPECT_GE(r.ratio, 0.5);
  EXPECT_GT(r.greedy_steps, 0u);
}

TEST(Adversarial, RefusesLargeN) {
  EXPECT_THROW(AdversarialEventSearch(24, 4, 2, {}, 0.05), Refusal);
}

TEST(LabConfig, Validation) {
  LabConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.gamma = 0.5;
  EXPECT_THROW(c.Validate(), ArgumentError);
  c = LabConfig{};
  c.epsilon = 1.0;
  EXPECT_THROW(c.Validate(), ArgumentError);
}

}  // namespace
}  // namespace rankprobe
