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

// rankprobe: command-line front end.
//
//   rankprobe build     --structure two_level --n 4096 --seed 7 --out a.rpl
//   rankprobe query     --structure two_level --in a.rpl --k-index 100
//   rankprobe stats     --structure recursive --n 65536 --t 3
//   rankprobe entropy   --n 16 --k 4 --delta 2 [--method bruteforce]
//   rankprobe encode    --structure two_level --n 4096 --k 64 --out r.rpe
//   rankprobe eliminate --structure recursive --n 4096 --t 4
//   rankprobe tradeoff  --structure recursive --n 1048576 --t 1..4
//
// Exit status: 0 success, 2 usage error, 3 refusal, 4 corrupt input,
// 1 anything else.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "rankprobe/bit_array.h"
#include "rankprobe/elimination.h"
#include "rankprobe/encoding.h"
#include "rankprobe/entropy.h"
#include "rankprobe/errors.h"
#include "rankprobe/random.h"
#include "rankprobe/rank_structures.h"

namespace rankprobe {
namespace {

using nlohmann::ordered_json;

struct Options {
  uint64_t n = 4096;
  uint64_t k = 64;
  std::optional<uint64_t> delta;
  std::string t = "1";
  int w = kDefaultWordBits;
  uint64_t seed = 1;
  std::string structure = "two_level";
  std::string out;
  std::string format = "csv";
  std::string in;
  uint64_t k_index = 0;
  std::optional<uint64_t> r;
  std::string method = "analytic";
  std::string mode = "verbatim";
  uint64_t records = 1;
  uint64_t samples = 100000;
};

// One result table: metadata lines plus rows of JSON scalars.
struct Table {
  ordered_json meta = ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<ordered_json>> rows;
};

std::string Scalar(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt::format("{:.6f}", v.get<double>());
  return v.dump();
}

void Render(const Table& table, const Options& opt) {
  std::ostringstream text;
  if (opt.format == "json") {
    ordered_json doc;
    doc["meta"] = table.meta;
    doc["rows"] = ordered_json::array();
    for (const auto& row : table.rows) {
      ordered_json obj;
      for (size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = row[i];
      doc["rows"].push_back(obj);
    }
    text << doc.dump(2) << "\n";
  } else {
    for (const auto& [key, value] : table.meta.items()) {
      text << "# " << key << "=" << Scalar(value) << "\n";
    }
    for (size_t i = 0; i < table.columns.size(); ++i) {
      text << (i ? "," : "") << table.columns[i];
    }
    text << "\n";
    for (const auto& row : table.rows) {
      for (size_t i = 0; i < row.size(); ++i) text << (i ? "," : "") << Scalar(row[i]);
      text << "\n";
    }
  }
  if (opt.out.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream file(opt.out);
    if (!file) throw ArgumentError("cannot write " + opt.out);
    file << text.str();
  }
}

ordered_json BaseMeta(const std::string& command, const Options& opt) {
  ordered_json meta;
  meta["tool"] = "rankprobe";
  meta["command"] = command;
  meta["seed"] = opt.seed;
  return meta;
}

// "3" or "1..4".
std::vector<int> ParseDepths(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) return {std::stoi(text)};
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (lo > hi) throw ArgumentError("empty depth range " + text);
    std::vector<int> out;
    for (int t = lo; t <= hi; ++t) out.push_back(t);
    return out;
  } catch (const std::logic_error&) {
    throw ArgumentError("bad depth '" + text + "'; expected T or A..B");
  }
}

int SingleDepth(const Options& opt) {
  const std::vector<int> ts = ParseDepths(opt.t);
  if (ts.size() != 1) throw ArgumentError("this command takes a single --t");
  return ts[0];
}

StructureFamily FamilyFor(StructureKind kind, int t, int w) {
  switch (kind) {
    case StructureKind::kNaive: return NaiveFamily(w);
    case StructureKind::kTwoLevel: return TwoLevelFamily({}, w);
    case StructureKind::kRecursive: return RecursiveFamily(t, w);
  }
  throw ArgumentError("unknown structure");
}

BitArray InputArray(const Options& opt, SeededRng& rng) {
  if (!opt.in.empty()) return LoadBitArray(opt.in);
  return BitArray::Random(opt.n, rng);
}

void AddStructureMeta(ordered_json& meta, const Options& opt, uint64_t n, int t) {
  meta["structure"] = opt.structure;
  meta["n"] = n;
  if (ParseStructureKind(opt.structure) == StructureKind::kRecursive) meta["t"] = t;
  meta["w"] = opt.w;
  meta["input"] = opt.in.empty() ? "random" : opt.in;
}

int RunBuild(const Options& opt) {
  SeededRng rng(opt.seed);
  const int t = SingleDepth(opt);
  const BitArray a = InputArray(opt, rng);
  const StructureLayout layout = FamilyFor(ParseStructureKind(opt.structure), t, opt.w)(a);
  Table table;
  table.meta = BaseMeta("build", opt);
  AddStructureMeta(table.meta, opt, a.size(), t);
  table.columns = {"cells", "memory_bits", "published_bits", "redundancy_bits",
                   "redundancy_region_cells", "worst_probes"};
  table.rows.push_back({layout.memory.cell_count(), layout.memory.total_bits(),
                        layout.published.length(), layout.redundancy_bits(),
                        layout.redundancy_region.size(), layout.algorithm->worst_probes()});
  if (!opt.out.empty()) {
    SaveBitArray(opt.out, a);
    Options to_stdout = opt;
    to_stdout.out.clear();
    table.meta["array_file"] = opt.out;
    Render(table, to_stdout);
  } else {
    Render(table, opt);
  }
  return 0;
}

int RunQuery(const Options& opt) {
  SeededRng rng(opt.seed);
  const int t = SingleDepth(opt);
  const BitArray a = InputArray(opt, rng);
  if (opt.k_index > a.size()) {
    throw ArgumentError(fmt::format("--k-index must lie in [0, {}]", a.size()));
  }
  const StructureLayout layout = FamilyFor(ParseStructureKind(opt.structure), t, opt.w)(a);
  const RankResult result = Rank(layout, opt.k_index);
  const uint64_t oracle = RankOracle(a, opt.k_index);
  Table table;
  table.meta = BaseMeta("query", opt);
  AddStructureMeta(table.meta, opt, a.size(), t);
  table.columns = {"k", "rank", "oracle", "match", "probes"};
  table.rows.push_back({opt.k_index, result.answer, oracle, result.answer == oracle,
                        result.trace.probe_count()});
  Render(table, opt);
  return result.answer == oracle ? 0 : 1;
}

int RunStats(const Options& opt) {
  SeededRng rng(opt.seed);
  const int t = SingleDepth(opt);
  const BitArray a = InputArray(opt, rng);
  const StructureLayout layout = FamilyFor(ParseStructureKind(opt.structure), t, opt.w)(a);
  QuerySample sample;
  sample.exhaustive = a.size() <= opt.samples;
  sample.samples = opt.samples;
  sample.seed = rng.Fork(1).Next();
  const StructureStats s = ComputeStats(layout, sample);
  Table table;
  table.meta = BaseMeta("stats", opt);
  AddStructureMeta(table.meta, opt, a.size(), t);
  table.meta["query_sweep"] = sample.exhaustive ? "exhaustive" : "sampled";
  table.columns = {"redundancy_bits", "worst_probes", "observed_worst", "avg_probes",
                   "queries"};
  table.rows.push_back({s.redundancy_bits, s.worst_probes, s.observed_worst,
                        s.avg_probes, s.queries_measured});
  Render(table, opt);
  return 0;
}

std::vector<ordered_json> ReportCells(const EntropyReport& report) {
  std::vector<ordered_json> cells;
  for (const std::string& v : EntropyReportRow(report)) cells.emplace_back(v);
  return cells;
}

int RunEntropy(const Options& opt) {
  const QueryBlocks blocks(opt.n, opt.k);
  const uint64_t delta = opt.delta.value_or(blocks.block_size() / 2);
  const std::vector<uint64_t> qstar = blocks.QDelta(delta);
  LabConfig config;
  config.rng_seed = opt.seed;
  Table table;
  table.meta = BaseMeta("entropy", opt);
  table.meta["method"] = opt.method;
  table.meta["qstar"] = "all of Q_delta";
  table.columns = EntropyReportHeader();
  if (opt.method == "analytic") {
    table.rows.push_back(ReportCells(DeficitAnalytic(opt.n, opt.k, delta, qstar)));
  } else if (opt.method == "bruteforce") {
    table.rows.push_back(ReportCells(DeficitBruteforce(opt.n, opt.k, delta, qstar)));
  } else if (opt.method == "adversarial") {
    const AdversarialEventResult r =
        AdversarialEventSearch(opt.n, opt.k, delta, qstar, config.epsilon);
    table.meta["epsilon"] = config.epsilon;
    table.meta["kept"] = r.kept;
    table.meta["total"] = r.total;
    table.meta["required_mass"] = r.required_mass;
    table.meta["ratio"] = r.ratio;
    table.rows.push_back(ReportCells(r.unconditioned));
    table.rows.push_back(ReportCells(r.conditioned));
  } else {
    throw ArgumentError("--method must be analytic, bruteforce or adversarial");
  }
  Render(table, opt);
  return 0;
}

int RunEncode(const Options& opt) {
  SeededRng rng(opt.seed);
  const int t = SingleDepth(opt);
  const StructureFamily family = FamilyFor(ParseStructureKind(opt.structure), t, opt.w);
  const uint64_t n = opt.in.empty() ? opt.n : LoadBitArray(opt.in).size();
  const QueryBlocks blocks(n, opt.k);
  EncodingConfig config;
  config.delta = opt.delta;
  if (opt.mode == "ensemble") {
    if (!opt.delta) throw ArgumentError("ensemble mode needs a fixed --delta");
    config.mode = FootprintMode::kEnsemble;
    config.tables = BuildEnsembleTables(family, blocks, *opt.delta);
  } else if (opt.mode != "verbatim") {
    throw ArgumentError("--mode must be verbatim or ensemble");
  }
  if (opt.records == 0) throw ArgumentError("--records must be >= 1");
  if (opt.records > 1 && !opt.in.empty()) {
    throw ArgumentError("--records > 1 draws random arrays; drop --in");
  }

  Table table;
  table.meta = BaseMeta("encode", opt);
  AddStructureMeta(table.meta, opt, n, t);
  table.meta["k"] = opt.k;
  table.meta["mode"] = opt.mode;
  std::vector<EncodingRecord> records;
  double deficit = 0.0;
  table.columns = {"record", "delta", "published", "qstar_id", "joint_answers",
                   "foot_q0", "foot_qstar", "remaining_cells", "total", "round_trip"};
  for (uint64_t i = 0; i < opt.records; ++i) {
    const BitArray a = InputArray(opt, rng);
    const StructureLayout layout = family(a);
    EncodingRecord record = Encode(a, layout, blocks, config);
    const bool ok = Decode(record, *layout.algorithm, blocks, config) == a;
    deficit += DeficitAnalytic(n, opt.k, record.delta,
                                     ComputeQStar(layout, blocks, record.delta).members)
                   .deficit;
    const auto bits = record.component_bits();
    table.rows.push_back({i, record.delta, bits[0], bits[1], bits[2], bits[3], bits[4],
                          bits[5], record.total_bits(), ok});
    if (!ok) throw CorruptEncoding(fmt::format("record {} failed to round-trip", i));
    records.push_back(std::move(record));
  }
  if (opt.records == 1) {
    if (!opt.out.empty()) {
      SaveEncodingRecord(opt.out, records[0]);
      table.meta["record_file"] = opt.out;
    }
    Options to_stdout = opt;
    to_stdout.out.clear();
    Render(table, to_stdout);
    return 0;
  }
  const SizeAccounting acc = AccountSizes(
      records, {n, opt.k, LabConfig{}.epsilon, deficit / static_cast<double>(opt.records)});
  Table summary;
  summary.meta = table.meta;
  summary.meta["records"] = acc.records;
  summary.columns = {"quantity", "value"};
  const char* names[] = {"published", "qstar_id", "joint_answers",
                         "foot_q0", "foot_qstar", "remaining_cells"};
  for (int i = 0; i < kEncodingComponents; ++i) {
    summary.rows.push_back({std::string("mean_") + names[i], acc.mean_component[i]});
  }
  summary.rows.push_back({"mean_total", acc.mean_total});
  summary.rows.push_back({"component_sum", acc.component_sum});
  summary.rows.push_back({"mean_overlap_fraction", acc.mean_overlap_fraction});
  summary.rows.push_back({"component2_bound", acc.component2_bound});
  summary.rows.push_back({"component2_within_bound", acc.component2_within_bound});
  summary.rows.push_back({"mean_deficit", deficit / static_cast<double>(opt.records)});
  summary.rows.push_back({"predicted_total", acc.predicted_total});
  summary.rows.push_back({"slack_vs_n", acc.slack_vs_n});
  Render(summary, opt);
  return 0;
}

int RunEliminate(const Options& opt) {
  const int t = SingleDepth(opt);
  const StructureFamily family = FamilyFor(ParseStructureKind(opt.structure), t, opt.w);
  EliminationOptions options;
  options.gamma = LabConfig{}.gamma;
  const EliminationTrajectory traj = RunElimination(family, opt.n, opt.r, options, opt.seed);
  Table table;
  table.meta = BaseMeta("eliminate", opt);
  AddStructureMeta(table.meta, opt, opt.n, t);
  table.meta["array"] = "one fixed random array per trajectory";
  table.meta["gamma"] = options.gamma;
  table.meta["P_0"] = traj.initial_bits;
  table.meta["saturation_bits"] = traj.saturation_bits;
  table.meta["termination"] = TerminationName(traj.termination);
  table.meta["rounds_to_saturation"] =
      traj.rounds_to_saturation ? std::to_string(*traj.rounds_to_saturation) : "none";
  table.columns = {"i", "P_i", "k_i", "overlap_prob", "avg_before", "avg_after",
                   "cells_published"};
  for (const RoundStats& s : traj.rounds) {
    table.rows.push_back({s.index, s.published_bits, s.blocks, s.overlap_prob,
                          s.avg_before, s.avg_after, s.cells_published});
  }
  Render(table, opt);
  return 0;
}

int RunTradeoff(const Options& opt) {
  SeededRng rng(opt.seed);
  const BitArray a = InputArray(opt, rng);
  const StructureKind kind = ParseStructureKind(opt.structure);
  Table table;
  table.meta = BaseMeta("tradeoff", opt);
  table.meta["structure"] = opt.structure;
  table.meta["n"] = a.size();
  table.meta["w"] = opt.w;
  table.meta["avg_probes_queries"] = opt.samples;
  table.columns = {"t", "redundancy_bits", "worst_probes", "avg_probes", "cells"};
  for (int t : ParseDepths(opt.t)) {
    const StructureLayout layout = FamilyFor(kind, t, opt.w)(a);
    QuerySample sample;
    sample.exhaustive = false;
    sample.samples = opt.samples;
    sample.seed = rng.Fork(static_cast<uint64_t>(t)).Next();
    const StructureStats s = ComputeStats(layout, sample);
    table.rows.push_back({t, s.redundancy_bits, s.worst_probes, s.avg_probes,
                          layout.memory.cell_count()});
  }
  Render(table, opt);
  return 0;
}

}  // namespace
}  // namespace rankprobe

int main(int argc, char** argv) {
  using namespace rankprobe;
  CLI::App app{"Redundancy versus query time for rank structures in the cell-probe model"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--n", opt.n, "array length")->check(CLI::PositiveNumber);
    sub->add_option("--k", opt.k, "number of query blocks")->check(CLI::PositiveNumber);
    sub->add_option("--delta", opt.delta, "offset of Q_delta inside each block");
    sub->add_option("--t", opt.t, "recursive depth, T or A..B");
    sub->add_option("--w", opt.w, "word bits")->check(CLI::Range(1, 64));
    sub->add_option("--seed", opt.seed, "seed for every random draw");
    sub->add_option("--structure", opt.structure, "naive, two_level or recursive")
        ->check(CLI::IsMember({"naive", "two_level", "recursive"}));
    sub->add_option("--out", opt.out, "output file");
    sub->add_option("--format", opt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--in", opt.in, "input array file (RPL1)");
  };

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"build", "build a structure; --out saves the array", RunBuild},
      {"query", "answer one rank query through the simulator", RunQuery},
      {"stats", "redundancy and probe statistics", RunStats},
      {"entropy", "entropy deficit of Q0 and Q_delta", RunEntropy},
      {"encode", "six-part encoding with round-trip check", RunEncode},
      {"eliminate", "cell publishing trajectory", RunEliminate},
      {"tradeoff", "redundancy and probes across depths", RunTradeoff},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    common(sub);
    subs.emplace_back(sub, &c);
  }
  subs[1].first->add_option("--k-index", opt.k_index, "query position k for Rank(k)")
      ->required();
  subs[2].first->add_option("--samples", opt.samples, "sampled queries above this n");
  subs[3].first->add_option("--method", opt.method, "analytic, bruteforce or adversarial");
  subs[4].first->add_option("--mode", opt.mode, "verbatim or ensemble");
  subs[4].first->add_option("--records", opt.records, "random arrays to encode");
  subs[5].first->add_option("--r", opt.r, "initial published bits (default: redundancy)");
  subs[6].first->add_option("--samples", opt.samples, "queries for the probe average");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const auto& [sub, command] : subs) {
      if (sub->parsed()) return command->run(opt);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Refusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 3;
  } catch (const CorruptEncoding& e) {
    std::cerr << "corrupt input: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
