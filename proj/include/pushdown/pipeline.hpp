// Copyright 2026 The Pushdown Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pushdown/client_filter.hpp"
#include "pushdown/cost_model.hpp"
#include "pushdown/error.hpp"
#include "pushdown/optimizer.hpp"
#include "pushdown/plan.hpp"
#include "pushdown/query_engine.hpp"
#include "pushdown/store.hpp"
#include "pushdown/workload.hpp"

namespace pushdown {

enum class Stage { kUsage, kCalibrate, kSelect, kFilter, kLoad, kQuery, kGenWorkload, kGenData };

inline const char* StageName(Stage s) {
  switch (s) {
    case Stage::kUsage: return "usage";
    case Stage::kCalibrate: return "calibrate";
    case Stage::kSelect: return "select";
    case Stage::kFilter: return "filter";
    case Stage::kLoad: return "load";
    case Stage::kQuery: return "query";
    case Stage::kGenWorkload: return "gen-workload";
    case Stage::kGenData: return "gen-data";
  }
  return "unknown";
}

// Process exit status for a failure in `s`.
inline int StageExitCode(Stage s) {
  switch (s) {
    case Stage::kUsage: return 2;
    case Stage::kCalibrate: return 10;
    case Stage::kSelect: return 11;
    case Stage::kFilter: return 12;
    case Stage::kLoad: return 13;
    case Stage::kQuery: return 14;
    case Stage::kGenWorkload: return 15;
    case Stage::kGenData: return 16;
  }
  return 1;
}

class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& what)
      : std::runtime_error(std::string(StageName(stage)) + ": " + what), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

template <typename F>
auto RunStage(Stage stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

// Seeded reservoir sample of the non-blank lines of an NDJSON file.
inline std::vector<std::string> SampleLines(const std::filesystem::path& path, std::size_t n, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  Rng rng(SplitMix64(seed ^ 0x5eedULL));
  std::vector<std::string> sample;
  std::string line;
  std::uint64_t seen = 0;
  while (std::getline(in, line)) {
    if (IsBlankLine(line)) continue;
    ++seen;
    if (sample.size() < n) {
      sample.push_back(line);
    } else {
      auto j = rng.Below(seen);
      if (j < n) sample[j] = line;
    }
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "read failure on " + path.string());
  return sample;
}

inline double MeanLength(const std::vector<std::string>& lines) {
  if (lines.empty()) throw Error(ErrorKind::kValidation, "empty sample");
  double total = 0;
  for (const auto& l : lines) total += static_cast<double>(l.size());
  return total / static_cast<double>(lines.size());
}

// Distinct compilable simple predicates of a workload, in canonical order.
inline std::vector<SimplePredicate> DistinctPredicates(const Workload& workload) {
  std::map<std::string, SimplePredicate> seen;
  for (const auto& q : workload) {
    for (const auto& c : q.clauses) {
      for (const auto& d : c.disjuncts) {
        try {
          Compile(d);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::kUnsupportedPredicate) continue;
          throw;
        }
        seen.emplace(d.Serialize(), d);
      }
    }
  }
  std::vector<SimplePredicate> out;
  for (auto& [k, v] : seen) out.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// Stage helpers shared by the CLI subcommands and the pipeline

struct FilterSummary {
  ChunkManifest manifest;
  double eval_seconds = 0.0;
  double total_seconds = 0.0;
};

inline FilterSummary FilterFile(const std::filesystem::path& data, const SelectionPlan& plan,
                                const std::filesystem::path& out_dir, std::size_t chunk_size, unsigned threads) {
  std::ifstream in(data, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + data.string());
  FilterSummary summary;
  auto started = std::chrono::steady_clock::now();
  ChunkWriter writer(out_dir, plan.Hash(), chunk_size);
  FilterStream(
      in, plan.Compile(), chunk_size, [&](Chunk&& c, ChunkBitvectors&& bv) { writer.Write(c, bv); }, threads,
      &summary.eval_seconds);
  summary.manifest = writer.Commit();
  summary.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

struct LoadSummary {
  std::size_t total_rows = 0;
  std::size_t loaded_rows = 0;
  std::size_t rejected_rows = 0;
  double loading_ratio = 1.0;
  double seconds = 0.0;
};

inline LoadSummary LoadFile(const std::filesystem::path& chunk_dir, const SelectionPlan& plan,
                            const std::filesystem::path& store_dir) {
  auto started = std::chrono::steady_clock::now();
  auto store = LoadChunkDirectory(chunk_dir, plan);
  store.Save(store_dir);
  LoadSummary s;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  s.total_rows = store.total_rows();
  s.loaded_rows = store.loaded_rows();
  s.rejected_rows = store.rejects().size();
  s.loading_ratio = store.loading_ratio();
  return s;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct PipelineConfig {
  std::filesystem::path data;
  Workload workload;
  std::vector<double> budgets = {0.0, 0.25, 0.5, 1.0};
  std::uint64_t seed = 42;
  std::size_t chunk_size = kDefaultChunkSize;
  unsigned threads = 1;
  std::filesystem::path run_dir = "run";
  Algorithm algorithm = Algorithm::kBestOfTwo;
  std::optional<CostCoefficients> coefficients;  // microbenchmarked when absent
  std::size_t sample_size = 20000;
  int calibration_reps = 5;
  int query_reps = 3;
};

struct QueryRecord {
  std::size_t index = 0;
  std::uint64_t count = 0;
  double latency_s = 0.0;  // minimum over repetitions
  bool covered = false;
  std::vector<std::uint32_t> matched;
  std::uint64_t rows_scanned = 0;
  std::uint64_t rows_skipped = 0;
  std::uint64_t blocks_touched = 0;
  std::uint64_t residual_rows_parsed = 0;
};

struct BudgetReport {
  double budget_us = 0.0;
  std::string plan_hash;
  std::size_t selected = 0;
  double objective = 0.0;
  double plan_cost_us = 0.0;
  double prefilter_time_s = 0.0;  // predicate evaluation only
  double filter_total_s = 0.0;    // including chunk reads and writes
  double load_time_s = 0.0;
  double query_time_s = 0.0;      // sum of per-query latencies
  double loading_ratio = 1.0;
  std::size_t total_rows = 0;
  std::size_t loaded_rows = 0;
  std::size_t rejected_rows = 0;
  std::vector<QueryRecord> queries;

  double total_time_s() const { return prefilter_time_s + load_time_s + query_time_s; }
};

struct BenchReport {
  static constexpr int kVersion = 1;
  std::uint64_t seed = 0;
  std::string data;
  std::size_t chunk_size = 0;
  std::string algorithm;
  CostCoefficients coefficients;
  std::string coefficients_source;
  double object_len = 0.0;
  std::size_t query_count = 0;
  double skewness = 0.0;
  std::vector<BudgetReport> budgets;
};

inline std::string BudgetDirName(double budget) {
  std::ostringstream s;
  s << "budget-" << budget;
  return s.str();
}

inline BudgetReport RunBudget(const PipelineConfig& config, const Workload& workload, double budget,
                              const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  BudgetReport r;
  r.budget_us = budget;
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto plan = RunStage(Stage::kSelect, [&] {
    // Budget 0 is the baseline: nothing is pushed down.
    SelectionPlan p = budget > 0.0 ? Select({workload, budget}, config.algorithm)
                                   : SelectionPlan{{}, 0.0, 0.0, 0.0, config.algorithm, config.algorithm};
    SavePlan(dir / "plan.json", p);
    return p;
  });
  r.plan_hash = plan.Hash();
  r.selected = plan.selected.size();
  r.objective = plan.objective_value;
  r.plan_cost_us = plan.total_cost;

  auto filtered = RunStage(Stage::kFilter,
                           [&] { return FilterFile(config.data, plan, dir / "chunks", config.chunk_size, config.threads); });
  r.prefilter_time_s = filtered.eval_seconds;
  r.filter_total_s = filtered.total_seconds;

  auto loaded = RunStage(Stage::kLoad, [&] { return LoadFile(dir / "chunks", plan, dir / "store"); });
  r.load_time_s = loaded.seconds;
  r.loading_ratio = loaded.loading_ratio;
  r.total_rows = loaded.total_rows;
  r.loaded_rows = loaded.loaded_rows;
  r.rejected_rows = loaded.rejected_rows;

  RunStage(Stage::kQuery, [&] {
    auto store = Store::Open(dir / "store");
    for (std::size_t i = 0; i < workload.size(); ++i) {
      QueryRecord q;
      q.index = i;
      q.latency_s = std::numeric_limits<double>::infinity();
      for (int rep = 0; rep < std::max(1, config.query_reps); ++rep) {
        auto started = std::chrono::steady_clock::now();
        auto result = ExecuteCount(store, workload[i], plan, config.threads);
        q.latency_s = std::min(q.latency_s,
                               std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
        q.count = result.count;
        q.covered = result.info.covered;
        q.matched = result.info.matched_clause_ids;
        q.rows_scanned = result.rows_scanned;
        q.rows_skipped = result.rows_skipped;
        q.blocks_touched = result.blocks_touched;
        q.residual_rows_parsed = result.residual_rows_parsed;
      }
      r.query_time_s += q.latency_s;
      r.queries.push_back(std::move(q));
    }
    return 0;
  });
  return r;
}

// Selectivities are estimated and costs predicted once; every budget then runs
// select -> filter -> load -> query in its own directory under run_dir.
inline BenchReport RunPipeline(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  if (config.data.empty() || config.workload.empty()) {
    throw StageError(Stage::kUsage, "pipeline needs a data file and a non-empty workload");
  }
  BenchReport report;
  report.seed = config.seed;
  report.data = config.data.string();
  report.chunk_size = config.chunk_size;
  report.algorithm = AlgorithmName(config.algorithm);
  report.query_count = config.workload.size();

  Workload workload = config.workload;
  std::vector<std::string> sample;
  RunStage(Stage::kCalibrate, [&] {
    fs::create_directories(config.run_dir);
    sample = SampleLines(config.data, config.sample_size, config.seed);
    if (sample.empty()) throw Error(ErrorKind::kValidation, "data file has no objects");
    report.object_len = MeanLength(sample);
    if (config.coefficients) {
      report.coefficients = *config.coefficients;
      report.coefficients_source = "given";
    } else {
      auto calibration = Calibrate(MeasureSyntheticCalibration({}, config.calibration_reps, config.seed));
      calibration.host_label = "pipeline-synthetic";
      WriteJsonFile(config.run_dir / "coefficients.json", CalibrationToJson(calibration));
      report.coefficients = calibration.coefficients;
      report.coefficients_source = "calibrated";
    }
    return 0;
  });
  RunStage(Stage::kSelect, [&] {
    EstimateSelectivities(workload, sample);
    AssignCosts(workload, report.coefficients, report.object_len);
    WriteJsonFile(config.run_dir / "workload.json", WorkloadToJson(workload));
    report.skewness = ComputeStats(workload).skewness;
    return 0;
  });
  for (double b : config.budgets) {
    if (!(b >= 0.0)) throw StageError(Stage::kUsage, "budgets must be non-negative");
    report.budgets.push_back(RunBudget(config, workload, b, config.run_dir / BudgetDirName(b)));
  }
  return report;
}

inline nlohmann::json QueryRecordToJson(const QueryRecord& q) {
  return {{"index", q.index},
          {"count", q.count},
          {"latency_s", q.latency_s},
          {"covered", q.covered},
          {"matched_clause_ids", q.matched},
          {"rows_scanned", q.rows_scanned},
          {"rows_skipped", q.rows_skipped},
          {"blocks_touched", q.blocks_touched},
          {"residual_rows_parsed", q.residual_rows_parsed}};
}

inline nlohmann::json ReportToJson(const BenchReport& r) {
  nlohmann::json budgets = nlohmann::json::array();
  for (const auto& b : r.budgets) {
    nlohmann::json queries = nlohmann::json::array();
    for (const auto& q : b.queries) queries.push_back(QueryRecordToJson(q));
    budgets.push_back({{"budget_us", b.budget_us},
                       {"plan_hash", b.plan_hash},
                       {"selected", b.selected},
                       {"objective", b.objective},
                       {"plan_cost_us", b.plan_cost_us},
                       {"prefilter_time_s", b.prefilter_time_s},
                       {"filter_total_s", b.filter_total_s},
                       {"load_time_s", b.load_time_s},
                       {"query_time_s", b.query_time_s},
                       {"total_time_s", b.total_time_s()},
                       {"loading_ratio", b.loading_ratio},
                       {"total_rows", b.total_rows},
                       {"loaded_rows", b.loaded_rows},
                       {"rejected_rows", b.rejected_rows},
                       {"queries", queries}});
  }
  const auto& k = r.coefficients;
  return {{"version", BenchReport::kVersion},
          {"seed", r.seed},
          {"data", r.data},
          {"chunk_size", r.chunk_size},
          {"algorithm", r.algorithm},
          {"coefficients", {{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}, {"k4", k.k4}, {"c", k.c}}},
          {"coefficients_source", r.coefficients_source},
          {"object_len", r.object_len},
          {"queries", r.query_count},
          {"skewness", r.skewness},
          {"timing_note",
           "wall-clock seconds; no fsync is issued. prefilter_time_s covers predicate evaluation only, "
           "load_time_s covers chunk reads, partial loading and block writes, query latencies are the "
           "minimum over repetitions"},
          {"budgets", budgets}};
}

// Two flat tables: one row per budget and one row per (budget, query).
inline std::pair<std::string, std::string> ReportToCsv(const BenchReport& r) {
  std::ostringstream budgets, queries;
  budgets << "budget_us,selected,objective,plan_cost_us,prefilter_time_s,load_time_s,query_time_s,total_time_s,"
             "loading_ratio,total_rows,loaded_rows,rejected_rows\n";
  queries << "budget_us,query,count,latency_s,covered,rows_scanned,rows_skipped,blocks_touched,"
             "residual_rows_parsed\n";
  for (const auto& b : r.budgets) {
    budgets << b.budget_us << ',' << b.selected << ',' << b.objective << ',' << b.plan_cost_us << ','
            << b.prefilter_time_s << ',' << b.load_time_s << ',' << b.query_time_s << ',' << b.total_time_s() << ','
            << b.loading_ratio << ',' << b.total_rows << ',' << b.loaded_rows << ',' << b.rejected_rows << '\n';
    for (const auto& q : b.queries) {
      queries << b.budget_us << ',' << q.index << ',' << q.count << ',' << q.latency_s << ',' << (q.covered ? 1 : 0)
              << ',' << q.rows_scanned << ',' << q.rows_skipped << ',' << q.blocks_touched << ','
              << q.residual_rows_parsed << '\n';
    }
  }
  return {budgets.str(), queries.str()};
}

}  // namespace pushdown
