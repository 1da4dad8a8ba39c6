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

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pushdown/client_filter.hpp"
#include "pushdown/error.hpp"
#include "pushdown/predicate.hpp"
#include "pushdown/workload_io.hpp"

namespace pushdown {

// Per-object substring-search cost:
//   T = sel*(k1*len(p) + k2*len(t)) + (1-sel)*(k3*len(p) + k4*len(t)) + c
// with lengths in bytes and T in microseconds.
struct CostCoefficients {
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0;
  double c = 0;

  friend bool operator==(const CostCoefficients&, const CostCoefficients&) = default;
};

struct CalibrationSample {
  double pattern_len = 0;
  double object_len = 0;
  double selectivity = 0;
  double measured_cost = 0;
};

inline double PredictCost(const CostCoefficients& k, double pattern_len, double object_len, double selectivity) {
  if (!(selectivity >= 0.0 && selectivity <= 1.0)) {
    throw Error(ErrorKind::kValidation, "selectivity outside [0,1]");
  }
  return selectivity * (k.k1 * pattern_len + k.k2 * object_len) +
         (1.0 - selectivity) * (k.k3 * pattern_len + k.k4 * object_len) + k.c;
}

// Bytes searched for by one compiled disjunct.
inline std::size_t PatternLength(const CompiledDisjunct& d) {
  std::size_t n = 0;
  for (const auto& p : d.patterns) n += p.pattern_a.size() + (p.pattern_b ? p.pattern_b->size() : 0);
  return n;
}

// A disjunction costs the sum of its disjuncts. Each disjunct is priced with
// the clause's selectivity.
inline double PredictClauseCost(const CostCoefficients& k, const ConjunctiveClause& clause, double object_len) {
  double total = 0.0;
  for (const auto& d : CompileClause(clause).disjuncts) {
    total += PredictCost(k, static_cast<double>(PatternLength(d)), object_len, clause.selectivity);
  }
  return total;
}

// Fills eval_cost for every pushable clause in the workload.
inline void AssignCosts(Workload& workload, const CostCoefficients& k, double object_len) {
  for (auto& q : workload) {
    for (auto& c : q.clauses) {
      if (IsCompilable(c)) c.eval_cost = std::max(0.0, PredictClauseCost(k, c, object_len));
    }
  }
}

// R^2 = 1 - sum (yhat - y)^2 / sum (yhat - ybar)^2, with ybar the mean of the
// observed values.
inline double RSquared(const std::vector<double>& predicted, const std::vector<double>& actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw Error(ErrorKind::kValidation, "R^2 needs equal-length non-empty series");
  }
  double mean = 0.0;
  for (auto y : actual) mean += y;
  mean /= static_cast<double>(actual.size());
  double sse = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    spread += (predicted[i] - mean) * (predicted[i] - mean);
  }
  if (spread == 0.0) throw Error(ErrorKind::kUndefined, "R^2 undefined: predictions do not vary around the mean");
  return 1.0 - sse / spread;
}

// Textbook R^2 = 1 - SSE / sum (y - ybar)^2.
inline double RSquaredConventional(const std::vector<double>& predicted, const std::vector<double>& actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw Error(ErrorKind::kValidation, "R^2 needs equal-length non-empty series");
  }
  double mean = 0.0;
  for (auto y : actual) mean += y;
  mean /= static_cast<double>(actual.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  if (sst == 0.0) throw Error(ErrorKind::kUndefined, "R^2 undefined: observations are constant");
  return 1.0 - sse / sst;
}

struct CalibrationResult {
  CostCoefficients coefficients;
  double r_squared = 0.0;
  std::optional<double> r_squared_conventional;
  std::string host_label;
  std::size_t sample_count = 0;
};

inline constexpr std::array<const char*, 5> kRegressorNames = {"sel*len(p)", "sel*len(t)", "(1-sel)*len(p)",
                                                               "(1-sel)*len(t)", "intercept"};

inline std::array<double, 5> Regressors(const CalibrationSample& s) {
  return {s.selectivity * s.pattern_len, s.selectivity * s.object_len, (1.0 - s.selectivity) * s.pattern_len,
          (1.0 - s.selectivity) * s.object_len, 1.0};
}

// Ordinary least squares over the five regressors.
inline CalibrationResult Calibrate(const std::vector<CalibrationSample>& samples) {
  if (samples.size() < 6) throw Error(ErrorKind::kCalibration, "need at least 6 samples");
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd x(n, 5);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto r = Regressors(samples[static_cast<std::size_t>(i)]);
    for (int j = 0; j < 5; ++j) x(i, j) = r[static_cast<std::size_t>(j)];
    y(i) = samples[static_cast<std::size_t>(i)].measured_cost;
  }
  // Scale columns to unit norm so the rank test is independent of units.
  Eigen::VectorXd norms = x.colwise().norm();
  for (int j = 0; j < 5; ++j) {
    if (norms(j) == 0.0) {
      throw Error(ErrorKind::kCalibration, std::string("regressor ") + kRegressorNames[j] + " is identically zero");
    }
  }
  Eigen::MatrixXd scaled = x * norms.cwiseInverse().asDiagonal();
  constexpr double kRankThreshold = 1e-10;
  for (int j = 1; j <= 5; ++j) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled.leftCols(j));
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < j) {
      throw Error(ErrorKind::kCalibration, std::string("design matrix is rank deficient: regressor ") +
                                               kRegressorNames[static_cast<std::size_t>(j - 1)] +
                                               " is a combination of the others (vary pattern and object lengths)");
    }
  }
  Eigen::VectorXd beta_scaled = scaled.colPivHouseholderQr().solve(y);
  Eigen::VectorXd beta = beta_scaled.cwiseQuotient(norms);

  CalibrationResult result;
  result.coefficients = {beta(0), beta(1), beta(2), beta(3), beta(4)};
  result.sample_count = samples.size();
  std::vector<double> predicted, actual;
  for (const auto& s : samples) {
    predicted.push_back(PredictCost(result.coefficients, s.pattern_len, s.object_len, s.selectivity));
    actual.push_back(s.measured_cost);
  }
  result.r_squared = RSquared(predicted, actual);
  try {
    result.r_squared_conventional = RSquaredConventional(predicted, actual);
  } catch (const Error&) {
    result.r_squared_conventional.reset();
  }
  return result;
}

// Times every simple predicate over length buckets of the sample. Buckets give
// the fit distinct values of len(t).
inline std::vector<CalibrationSample> MeasureCalibrationSamples(std::vector<std::string> sample,
                                                                const std::vector<SimplePredicate>& predicates,
                                                                int reps = 5, std::size_t buckets = 4) {
  if (sample.empty()) throw Error(ErrorKind::kValidation, "empty calibration sample");
  buckets = std::clamp<std::size_t>(buckets, 1, sample.size());
  std::stable_sort(sample.begin(), sample.end(),
                   [](const std::string& a, const std::string& b) { return a.size() < b.size(); });
  std::vector<CalibrationSample> out;
  for (std::size_t b = 0; b < buckets; ++b) {
    auto lo = sample.size() * b / buckets;
    auto hi = sample.size() * (b + 1) / buckets;
    std::vector<std::string> bucket(sample.begin() + static_cast<std::ptrdiff_t>(lo),
                                    sample.begin() + static_cast<std::ptrdiff_t>(hi));
    double avg_len = 0;
    for (const auto& o : bucket) avg_len += static_cast<double>(o.size());
    avg_len /= static_cast<double>(bucket.size());
    for (const auto& pred : predicates) {
      ConjunctiveClause single;
      single.disjuncts.push_back(pred);
      auto compiled = CompileClause(single);
      auto cost = MeasureFilterCost(bucket, compiled, reps);
      out.push_back({static_cast<double>(PatternLength(compiled.disjuncts.front())), avg_len, cost.match_fraction,
                     cost.us_per_object});
    }
  }
  return out;
}

// Microbenchmark grid: one sample per (pattern length, object length,
// selectivity) cell, each timed over `objects` synthetic objects of the form
// {"f":"<lowercase filler>"} with a lowercase pattern planted in the chosen
// fraction of them. Filler and pattern share an alphabet so the search does
// real comparison work rather than a single memchr sweep.
struct SyntheticGrid {
  std::vector<std::size_t> pattern_lens = {4, 8, 16, 32, 64};
  std::vector<std::size_t> object_lens = {128, 256, 512, 1024, 2048};
  std::vector<double> selectivities = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t objects = 2000;
};

inline std::vector<CalibrationSample> MeasureSyntheticCalibration(const SyntheticGrid& grid, int reps,
                                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto below = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  std::size_t max_len = 0;
  for (auto l : grid.object_lens) max_len = std::max(max_len, l);
  std::string filler(max_len * 16, ' ');
  for (auto& ch : filler) ch = below(6) == 0 ? ' ' : static_cast<char>('a' + below(26));
  std::vector<CalibrationSample> out;
  for (auto plen : grid.pattern_lens) {
    ConjunctiveClause clause;
    std::string pattern;
    do {
      pattern.clear();
      for (std::size_t i = 0; i < plen; ++i) pattern.push_back(static_cast<char>('a' + below(26)));
    } while (filler.find(pattern) != std::string::npos);
    clause.disjuncts.push_back(SimplePredicate::Like("f", "%" + pattern + "%"));
    auto compiled = CompileClause(clause);
    for (auto olen : grid.object_lens) {
      if (olen < plen + 8) throw Error(ErrorKind::kValidation, "object length too small for pattern");
      const std::size_t body = olen - 8;  // {"f":""}
      for (auto sel : grid.selectivities) {
        const auto planted = static_cast<std::size_t>(std::llround(sel * static_cast<double>(grid.objects)));
        std::vector<bool> plant(grid.objects, false);
        std::fill(plant.begin(), plant.begin() + static_cast<std::ptrdiff_t>(planted), true);
        std::shuffle(plant.begin(), plant.end(), rng);
        std::vector<std::string> objects;
        objects.reserve(grid.objects);
        for (std::size_t i = 0; i < grid.objects; ++i) {
          std::string text = filler.substr(below(filler.size() - body + 1), body);
          if (plant[i]) text.replace(below(body - plen + 1), plen, pattern);
          objects.push_back("{\"f\":\"" + text + "\"}");
        }
        auto cost = MeasureFilterCost(objects, compiled, reps);
        out.push_back({static_cast<double>(plen), static_cast<double>(olen), cost.match_fraction, cost.us_per_object});
      }
    }
  }
  return out;
}

inline nlohmann::json CalibrationToJson(const CalibrationResult& r) {
  const auto& k = r.coefficients;
  nlohmann::json j = {{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}, {"k4", k.k4}, {"c", k.c},
                      {"r_squared", r.r_squared}, {"host_label", r.host_label},
                      {"samples", r.sample_count}};
  j["r_squared_conventional"] = r.r_squared_conventional ? nlohmann::json(*r.r_squared_conventional) : nlohmann::json(nullptr);
  return j;
}

inline CostCoefficients CoefficientsFromJson(const nlohmann::json& j) {
  try {
    return {j.at("k1").get<double>(), j.at("k2").get<double>(), j.at("k3").get<double>(), j.at("k4").get<double>(),
            j.at("c").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("bad coefficients document: ") + e.what());
  }
}

inline CostCoefficients LoadCoefficients(const std::filesystem::path& path) {
  return CoefficientsFromJson(ReadJsonFile(path));
}

}  // namespace pushdown
