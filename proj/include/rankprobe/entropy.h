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
// -----------------------------------------------------------------------------
// File: entropy.h
// -----------------------------------------------------------------------------
//
// Entropies of rank answers over a uniformly random array A, in bits.
//
// Rank answers at sorted positions p_1 < ... < p_r are in bijection with the
// increments Rank(p_i) - Rank(p_{i-1}), which are independent binomials. So
// H(Ans(Q)) is a sum of binomial entropies h_m, and the deficit
//
//   H(Ans(Q_0)) + H(Ans(Q*)) - H(Ans(Q_0), Ans(Q*))
//
// is the mutual information between the two answer sets. Query q is Rank(q),
// so Q_0 = {0, m, 2m, ...} and Rank(0) = 0 carries no information.

#ifndef RANKPROBE_ENTROPY_H_
#define RANKPROBE_ENTROPY_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rankprobe/bit_array.h"

namespace rankprobe {

struct LabConfig {
  double epsilon = 0.05;
  double gamma = 4.0;
  uint64_t montecarlo_trials = 20000;
  uint64_t rng_seed = 1;

  // Throws ArgumentError unless 0 < epsilon < 1, gamma >= 1, trials >= 1.
  void Validate() const;
};

struct EntropyReport {
  uint64_t n = 0;
  uint64_t k = 0;
  uint64_t delta = 0;
  std::vector<uint64_t> qstar;
  double h_q0 = 0.0;
  double h_qstar = 0.0;
  double h_joint = 0.0;
  double deficit = 0.0;
  // One entry per block b in [0, k); zero for blocks without a Q* query.
  // Filled by the analytic computation only.
  std::vector<double> per_block_deficits;

  // Sampling diagnostics; zero for exact computations.
  uint64_t samples = 0;
  double acceptance_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// H(Binomial(m, 1/2)) in bits.
long double BinomialEntropy(uint64_t m);

// 0.5 * log2(pi * e * m / 2). Throws ArgumentError for m = 0.
double BinomialEntropyEstimate(uint64_t m);

// 2 h_m - h_delta - h_{m - delta}. Throws ArgumentError unless 0 < delta < m.
long double BlockDeficit(uint64_t m, uint64_t delta);

// H(Ans(Q_0)) for k blocks of size m = floor(n / k): (k - 1) h_m.
long double Q0Entropy(uint64_t n, uint64_t k);

// H(Ans(Q)) from the increment decomposition; positions must be <= n.
long double AnswerEntropy(std::vector<uint64_t> positions);

// Throws ArgumentError unless every element of qstar is in Q_delta.
EntropyReport DeficitAnalytic(uint64_t n, uint64_t k, uint64_t delta,
                                    const std::vector<uint64_t>& qstar);

inline constexpr uint64_t kMaxBruteForceBits = 20;

using ArrayEvent = std::function<bool(const BitArray&)>;

// Tabulates the joint answer distribution over all 2^n arrays (restricted to
// `event` when given). Throws Refusal for n > 20 or an empty event.
EntropyReport DeficitBruteforce(uint64_t n, uint64_t k, uint64_t delta,
                                      const std::vector<uint64_t>& qstar,
                                      const ArrayEvent& event = nullptr);

// Rejection sampling of A given `event`, plug-in entropies with the
// Miller-Madow correction and a percentile bootstrap interval. Throws Refusal
// when fewer than kMinAccepted samples are accepted.
inline constexpr uint64_t kMinAccepted = 500;
EntropyReport ConditionedDeficitMonteCarlo(uint64_t n, uint64_t k,
                                           uint64_t delta,
                                           const std::vector<uint64_t>& qstar,
                                           const ArrayEvent& event,
                                           const LabConfig& config);

struct AdversarialEventResult {
  EntropyReport unconditioned;
  EntropyReport conditioned;
  // Arrays kept by the event and the required 2^(-eps * |Q*|) fraction.
  uint64_t kept = 0;
  uint64_t total = 0;
  double required_mass = 0.0;
  double ratio = 0.0;  // conditioned.deficit / unconditioned.deficit
  uint64_t greedy_steps = 0;
  uint64_t swap_steps = 0;
};

// Searches for an event of probability at least 2^(-epsilon * |Q*|) that
// minimizes the conditioned deficit. The deficit depends on the event only
// through how many arrays it keeps per joint answer cell, so the search moves
// array counts between cells: greedy removal from the cell of largest
// pointwise mutual information, then swaps until no move lowers the deficit.
// Exhaustive over arrays, so n <= 20; throws Refusal otherwise.
AdversarialEventResult AdversarialEventSearch(uint64_t n, uint64_t k,
                                              uint64_t delta,
                                              const std::vector<uint64_t>& qstar,
                                              double epsilon);

// Row-oriented views for the CLI.
std::vector<std::string> EntropyReportHeader();
std::vector<std::string> EntropyReportRow(const EntropyReport& report);

}  // namespace rankprobe

#endif  // RANKPROBE_ENTROPY_H_
