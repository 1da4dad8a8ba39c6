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

// Command-line driver: calibrate, select, filter, load, query, gen-workload,
// gen-data and pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pushdown/corpus.hpp"
#include "pushdown/cost_model.hpp"
#include "pushdown/optimizer.hpp"
#include "pushdown/pipeline.hpp"
#include "pushdown/predicate_text.hpp"
#include "pushdown/query_engine.hpp"
#include "pushdown/store.hpp"
#include "pushdown/workload.hpp"
#include "pushdown/workload_io.hpp"

namespace fs = std::filesystem;
using namespace pushdown;

namespace {

struct Globals {
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string run_dir = "run";
};

fs::path InRunDir(const Globals& g, const std::string& given, const char* fallback) {
  return given.empty() ? fs::path(g.run_dir) / fallback : fs::path(given);
}

// Predicate sources: a pool document, a workload, or a single query.
Workload LoadPredicateSource(const fs::path& path) {
  auto j = ReadJsonFile(path);
  if (j.contains("templates")) {
    Workload w;
    for (auto& c : PoolFromJson(j).Flatten()) w.push_back(Query{{c}, 1.0});
    return w;
  }
  return WorkloadFromJson(j);
}

void PrintJson(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

int CmdCalibrate(const Globals& g, const std::string& sample_path, const std::string& predicates_path, int reps,
                 std::size_t sample_size, bool synthetic, const std::string& host_label, const std::string& out) {
  std::vector<CalibrationSample> samples;
  if (synthetic) {
    samples = MeasureSyntheticCalibration({}, reps, g.seed);
  } else {
    if (sample_path.empty() || predicates_path.empty()) {
      throw StageError(Stage::kUsage, "calibrate needs --sample and --predicates, or --synthetic");
    }
    auto sample = SampleLines(sample_path, sample_size, g.seed);
    samples = MeasureCalibrationSamples(sample, DistinctPredicates(LoadPredicateSource(predicates_path)), reps);
  }
  auto result = Calibrate(samples);
  result.host_label = host_label;
  auto j = CalibrationToJson(result);
  auto path = InRunDir(g, out, "coefficients.json");
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  WriteJsonFile(path, j);
  if (result.coefficients.c < 0) std::cerr << "note: fitted intercept c is negative\n";
  PrintJson(j);
  return 0;
}

int CmdSelect(const Globals& g, const std::string& workload_path, double budget, const std::string& algorithm,
              const std::string& coefficients, const std::string& sample_path, std::optional<double> object_len,
              const std::string& out) {
  auto workload = LoadWorkload(workload_path);
  if (!sample_path.empty()) {
    auto sample = SampleLines(sample_path, 20000, g.seed);
    EstimateSelectivities(workload, sample);
    if (!object_len) object_len = MeanLength(sample);
  }
  if (!coefficients.empty()) {
    if (!object_len) throw Error(ErrorKind::kValidation, "--coefficients needs --object-len or --sample");
    AssignCosts(workload, LoadCoefficients(coefficients), *object_len);
  }
  auto plan = Select({workload, budget}, ParseAlgorithm(algorithm));
  auto path = InRunDir(g, out, "plan.json");
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  SavePlan(path, plan);
  std::cout << "selected " << plan.selected.size() << " clauses, f=" << plan.objective_value
            << ", cost=" << plan.total_cost << "us, plan " << plan.Hash() << "\n";
  return 0;
}

int CmdFilter(const Globals& g, const std::string& data, const std::string& plan_path, const std::string& out,
              std::size_t chunk_size) {
  auto plan = LoadPlan(InRunDir(g, plan_path, "plan.json"));
  auto summary = FilterFile(data, plan, InRunDir(g, out, "chunks"), chunk_size, g.threads);
  std::cout << summary.manifest.chunks.size() << " chunks, " << summary.manifest.total_objects() << " objects, "
            << summary.eval_seconds << "s evaluating\n";
  return 0;
}

int CmdLoad(const Globals& g, const std::string& chunks, const std::string& plan_path, const std::string& store) {
  auto plan = LoadPlan(InRunDir(g, plan_path, "plan.json"));
  auto s = LoadFile(InRunDir(g, chunks, "chunks"), plan, InRunDir(g, store, "store"));
  std::cout << "loaded " << s.loaded_rows << "/" << s.total_rows << " rows (ratio " << s.loading_ratio << "), "
            << s.rejected_rows << " rejected\n";
  return 0;
}

int CmdQuery(const Globals& g, const std::string& store_dir, const std::string& plan_path,
             const std::string& query_path, const std::string& where, bool explain) {
  auto plan = LoadPlan(InRunDir(g, plan_path, "plan.json"));
  auto store = Store::Open(InRunDir(g, store_dir, "store"));
  Workload queries;
  if (!where.empty()) {
    queries.push_back(ParseQueryText(where));
  } else if (!query_path.empty()) {
    queries = WorkloadFromJson(ReadJsonFile(query_path));
  } else {
    throw StageError(Stage::kUsage, "query needs --query or --where");
  }
  for (const auto& q : queries) {
    auto r = ExecuteCount(store, q, plan, g.threads);
    std::cout << r.count << "\n";
    if (explain) {
      std::cout << "  covered: " << (r.info.covered ? "yes" : "no") << "\n  matched clause ids:";
      for (auto id : r.info.matched_clause_ids) std::cout << ' ' << id;
      std::cout << "\n  blocks touched: " << r.blocks_touched << "\n  rows scanned: " << r.rows_scanned
                << "\n  rows skipped: " << r.rows_skipped << "\n  residual rows parsed: " << r.residual_rows_parsed
                << "\n  residual rejects: " << r.residual_rejects << "\n";
    }
  }
  return 0;
}

int CmdGenWorkload(const Globals& g, const std::string& pool_path, const std::string& profile, std::size_t n,
                   double expected, const std::string& dist, const std::string& out, const std::string& pool_out) {
  PoolSpec pool;
  if (!pool_path.empty()) {
    pool = PoolFromJson(ReadJsonFile(pool_path));
  } else {
    pool = MakePool(profile);
  }
  if (!pool_out.empty()) WriteJsonFile(pool_out, PoolToJson(pool));
  WorkloadSpec spec;
  spec.num_queries = n;
  spec.expected_predicates = expected;
  spec.distribution = ParseDistribution(dist);
  spec.seed = g.seed;
  auto workload = GenerateWorkload(pool, spec);
  auto path = InRunDir(g, out, "workload.json");
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  WriteJsonFile(path, WorkloadToJson(workload));
  auto stats = ComputeStats(workload);
  std::cout << stats.queries << " queries, predicates/query min " << stats.min_predicates << " max "
            << stats.max_predicates << " mean "
            << static_cast<double>(stats.total_predicates) / static_cast<double>(std::max<std::size_t>(1, stats.queries))
            << ", skewness " << stats.skewness << "\n";
  return 0;
}

int CmdGenData(const Globals& g, std::size_t objects, double megabytes, double malformed, const std::string& out) {
  CorpusSpec spec;
  spec.seed = g.seed;
  spec.malformed_rate = malformed;
  // Objects average a little under 500 bytes.
  spec.objects = megabytes > 0 ? static_cast<std::size_t>(megabytes * 1e6 / 480.0) : objects;
  auto path = InRunDir(g, out, "data.ndjson");
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::kIo, "cannot create " + path.string());
  auto bytes = GenerateCorpus(f, spec);
  std::cout << spec.objects << " objects, " << bytes << " bytes\n";
  return 0;
}

int CmdPipeline(const Globals& g, const std::string& data, const std::string& workload_path,
                const std::vector<double>& budgets, const std::string& coefficients, const std::string& algorithm,
                std::size_t chunk_size, int query_reps, const std::string& report_path, bool csv) {
  PipelineConfig config;
  config.data = data;
  config.workload = RunStage(Stage::kUsage, [&] { return LoadWorkload(workload_path); });
  config.budgets = budgets;
  config.seed = g.seed;
  config.threads = g.threads;
  config.run_dir = g.run_dir;
  config.chunk_size = chunk_size;
  config.query_reps = query_reps;
  config.algorithm = RunStage(Stage::kUsage, [&] { return ParseAlgorithm(algorithm); });
  if (!coefficients.empty()) config.coefficients = RunStage(Stage::kUsage, [&] { return LoadCoefficients(coefficients); });
  auto report = RunPipeline(config);
  auto path = report_path.empty() ? fs::path(g.run_dir) / "report.json" : fs::path(report_path);
  WriteJsonFile(path, ReportToJson(report));
  if (csv) {
    auto [b, q] = ReportToCsv(report);
    io::WriteFileAtomic(path.parent_path() / "budgets.csv", b);
    io::WriteFileAtomic(path.parent_path() / "queries.csv", q);
  }
  std::cout << "budget_us  selected  loading_ratio  prefilter_s  load_s  query_s\n";
  for (const auto& b : report.budgets) {
    std::cout << b.budget_us << "  " << b.selected << "  " << b.loading_ratio << "  " << b.prefilter_time_s << "  "
              << b.load_time_s << "  " << b.query_time_s << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Client-assisted JSON loading: predicate pushdown, partial loading and data skipping"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1U, 256U));
  app.add_option("--run-dir", g.run_dir, "Directory for stage outputs")->capture_default_str();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Fit cost-model coefficients on this host");
  std::string cal_sample, cal_preds, cal_out, cal_host = "local";
  int cal_reps = 5;
  std::size_t cal_size = 5000;
  bool cal_synthetic = false;
  cal->add_option("--sample", cal_sample, "NDJSON sample");
  cal->add_option("--predicates", cal_preds, "Pool, workload or query file");
  cal->add_flag("--synthetic", cal_synthetic, "Time a generated grid of pattern and object lengths instead");
  cal->add_option("--reps", cal_reps, "Timing repetitions")->capture_default_str();
  cal->add_option("--sample-size", cal_size, "Objects drawn from the sample")->capture_default_str();
  cal->add_option("--host-label", cal_host, "Label stored with the coefficients");
  cal->add_option("--out", cal_out, "Output file (default <run-dir>/coefficients.json)");

  // select
  auto* sel = app.add_subcommand("select", "Choose the pushdown clauses under a budget");
  std::string sel_workload, sel_alg = "best_of_two", sel_coef, sel_sample, sel_out;
  double sel_budget = 0;
  std::optional<double> sel_len;
  sel->add_option("--workload", sel_workload)->required();
  sel->add_option("--budget", sel_budget, "Per-object client budget in microseconds")->required();
  sel->add_option("--algorithm", sel_alg, "naive, ratio or best_of_two")->capture_default_str();
  sel->add_option("--coefficients", sel_coef, "Cost-model coefficients; otherwise workload costs are used");
  sel->add_option("--sample", sel_sample, "NDJSON sample for selectivity estimation");
  sel->add_option("--object-len", sel_len, "Average object length in bytes");
  sel->add_option("--out", sel_out, "Output plan (default <run-dir>/plan.json)");

  // filter
  auto* fil = app.add_subcommand("filter", "Evaluate the plan on raw NDJSON and write chunks");
  std::string fil_data, fil_plan, fil_out;
  std::size_t fil_chunk = kDefaultChunkSize;
  fil->add_option("--data", fil_data)->required();
  fil->add_option("--plan", fil_plan);
  fil->add_option("--out", fil_out, "Chunk directory (default <run-dir>/chunks)");
  fil->add_option("--chunk-size", fil_chunk)->capture_default_str()->check(CLI::PositiveNumber);

  // load
  auto* lod = app.add_subcommand("load", "Partially load chunks into a columnar store");
  std::string lod_chunks, lod_plan, lod_store;
  lod->add_option("--chunks", lod_chunks);
  lod->add_option("--plan", lod_plan);
  lod->add_option("--store", lod_store);

  // query
  auto* qry = app.add_subcommand("query", "COUNT(*) over a store");
  std::string q_store, q_plan, q_file, q_where;
  bool q_explain = false;
  qry->add_option("--store", q_store);
  qry->add_option("--plan", q_plan);
  qry->add_option("--query", q_file, "Query or workload file");
  qry->add_option("--where", q_where, "Query text, e.g. 'stars = 5 AND business.city = \"City001\"'");
  qry->add_flag("--explain", q_explain, "Print coverage and skipping statistics");

  // gen-workload
  auto* gw = app.add_subcommand("gen-workload", "Draw a synthetic query workload from a predicate pool");
  std::string gw_pool, gw_profile = "selective", gw_dist = "uniform", gw_out, gw_pool_out;
  std::size_t gw_n = 200;
  double gw_expected = 3.0;
  gw->add_option("--pool", gw_pool, "Pool file");
  gw->add_option("--profile", gw_profile, "Built-in pool when --pool is absent: selective or broad")
      ->capture_default_str();
  gw->add_option("--n", gw_n)->capture_default_str();
  gw->add_option("--expected", gw_expected, "Expected predicates per query")->capture_default_str();
  gw->add_option("--dist", gw_dist, "uniform or zipfian:<s>")->capture_default_str();
  gw->add_option("--out", gw_out);
  gw->add_option("--pool-out", gw_pool_out, "Also write the pool used");

  // gen-data
  auto* gd = app.add_subcommand("gen-data", "Write a synthetic NDJSON corpus");
  std::size_t gd_objects = 10000;
  double gd_mb = 0, gd_bad = 0;
  std::string gd_out;
  gd->add_option("--objects", gd_objects)->capture_default_str();
  gd->add_option("--mb", gd_mb, "Approximate size in megabytes (overrides --objects)");
  gd->add_option("--malformed-rate", gd_bad, "Fraction of truncated lines")->check(CLI::Range(0.0, 1.0));
  gd->add_option("--out", gd_out);

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "Run select, filter, load and query for each budget");
  std::string pl_data, pl_workload, pl_coef, pl_alg = "best_of_two", pl_report;
  std::vector<double> pl_budgets = {0.0, 0.25, 0.5, 1.0};
  std::size_t pl_chunk = kDefaultChunkSize;
  int pl_reps = 3;
  bool pl_csv = false;
  pl->add_option("--data", pl_data)->required();
  pl->add_option("--workload", pl_workload)->required();
  pl->add_option("--budgets", pl_budgets, "Comma-separated budgets in microseconds")
      ->delimiter(',')
      ->capture_default_str();
  pl->add_option("--coefficients", pl_coef, "Fixed coefficients; calibrated on the data otherwise");
  pl->add_option("--algorithm", pl_alg)->capture_default_str();
  pl->add_option("--chunk-size", pl_chunk)->capture_default_str()->check(CLI::PositiveNumber);
  pl->add_option("--query-reps", pl_reps)->capture_default_str();
  pl->add_option("--report", pl_report, "Report path (default <run-dir>/report.json)");
  pl->add_flag("--csv", pl_csv, "Also write budgets.csv and queries.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    auto rc = app.exit(e);
    return rc == 0 ? 0 : StageExitCode(Stage::kUsage);
  }

  try {
    if (*cal) return RunStage(Stage::kCalibrate, [&] {
        return CmdCalibrate(g, cal_sample, cal_preds, cal_reps, cal_size, cal_synthetic, cal_host, cal_out);
      });
    if (*sel) return RunStage(Stage::kSelect, [&] {
        return CmdSelect(g, sel_workload, sel_budget, sel_alg, sel_coef, sel_sample, sel_len, sel_out);
      });
    if (*fil) return RunStage(Stage::kFilter, [&] { return CmdFilter(g, fil_data, fil_plan, fil_out, fil_chunk); });
    if (*lod) return RunStage(Stage::kLoad, [&] { return CmdLoad(g, lod_chunks, lod_plan, lod_store); });
    if (*qry) return RunStage(Stage::kQuery, [&] { return CmdQuery(g, q_store, q_plan, q_file, q_where, q_explain); });
    if (*gw) return RunStage(Stage::kGenWorkload, [&] {
        return CmdGenWorkload(g, gw_pool, gw_profile, gw_n, gw_expected, gw_dist, gw_out, gw_pool_out);
      });
    if (*gd) return RunStage(Stage::kGenData, [&] { return CmdGenData(g, gd_objects, gd_mb, gd_bad, gd_out); });
    if (*pl) return CmdPipeline(g, pl_data, pl_workload, pl_budgets, pl_coef, pl_alg, pl_chunk, pl_reps, pl_report,
                                pl_csv);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return StageExitCode(e.stage());
  }
  return 0;
}
