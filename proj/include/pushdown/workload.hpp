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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "pushdown/block.hpp"
#include "pushdown/error.hpp"
#include "pushdown/predicate.hpp"
#include "pushdown/query_engine.hpp"
#include "pushdown/workload_io.hpp"

namespace pushdown {

// ---------------------------------------------------------------------------
// Seeded randomness. SplitMix64 gives every query its own stream so the
// generated workload does not depend on generation order.

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n).
  std::uint64_t Below(std::uint64_t n) { return n == 0 ? 0 : Next() % n; }

  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Predicate pools and workload specs

struct PoolTemplate {
  std::string name;
  std::vector<ConjunctiveClause> candidates;
};

struct PoolSpec {
  std::vector<PoolTemplate> templates;

  std::vector<ConjunctiveClause> Flatten() const {
    std::vector<ConjunctiveClause> out;
    for (const auto& t : templates) out.insert(out.end(), t.candidates.begin(), t.candidates.end());
    return out;
  }
};

inline nlohmann::json PoolToJson(const PoolSpec& pool) {
  nlohmann::json templates = nlohmann::json::array();
  for (const auto& t : pool.templates) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : t.candidates) cands.push_back(ClauseToJson(c));
    templates.push_back({{"name", t.name}, {"candidates", cands}});
  }
  return {{"templates", templates}};
}

inline PoolSpec PoolFromJson(const nlohmann::json& j) {
  try {
    PoolSpec pool;
    for (const auto& tj : j.at("templates")) {
      PoolTemplate t;
      t.name = tj.value("name", "");
      for (const auto& c : tj.at("candidates")) t.candidates.push_back(ClauseFromJson(c));
      if (t.candidates.empty()) throw Error(ErrorKind::kValidation, "template '" + t.name + "' has no candidates");
      pool.templates.push_back(std::move(t));
    }
    return pool;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("bad pool document: ") + e.what());
  }
}

struct Distribution {
  enum class Kind { kUniform, kZipfian };
  Kind kind = Kind::kUniform;
  double exponent = 1.0;

  static Distribution Uniform() { return {Kind::kUniform, 0.0}; }
  static Distribution Zipfian(double s) { return {Kind::kZipfian, s}; }

  std::string ToString() const {
    if (kind == Kind::kUniform) return "uniform";
    auto s = nlohmann::json(exponent).dump();
    return "zipfian:" + s;
  }
};

// "uniform" or "zipfian:<s>".
inline Distribution ParseDistribution(std::string_view text) {
  if (text == "uniform") return Distribution::Uniform();
  if (text.starts_with("zipfian")) {
    double s = 1.0;
    if (text.size() > 7) {
      if (text[7] != ':') throw Error(ErrorKind::kValidation, "expected zipfian:<s>");
      auto n = json::ParseNumber(text.substr(8));
      if (!n || *n <= 0) throw Error(ErrorKind::kValidation, "bad zipfian exponent");
      s = *n;
    }
    return Distribution::Zipfian(s);
  }
  throw Error(ErrorKind::kValidation, "unknown distribution '" + std::string(text) + "'");
}

struct WorkloadSpec {
  std::size_t num_queries = 200;
  double expected_predicates = 3.0;
  Distribution distribution = Distribution::Uniform();
  std::uint64_t seed = 42;
};

// Per-predicate inclusion probabilities summing to `expected`. Zipfian weights
// are rank^-s over a seeded rank permutation; any probability above 1 is
// clamped and the excess redistributed over the remaining predicates.
inline std::vector<double> InclusionProbabilities(std::size_t pool_size, double expected, const Distribution& dist,
                                                  std::uint64_t seed) {
  if (pool_size == 0) throw Error(ErrorKind::kValidation, "empty predicate pool");
  if (!(expected >= 1.0)) throw Error(ErrorKind::kValidation, "expected predicates per query must be >= 1");
  if (expected > static_cast<double>(pool_size)) {
    throw Error(ErrorKind::kValidation, "expected predicates per query exceeds pool size");
  }
  std::vector<double> weight(pool_size, 1.0);
  if (dist.kind == Distribution::Kind::kZipfian) {
    std::vector<std::size_t> rank(pool_size);
    std::iota(rank.begin(), rank.end(), 0);
    Rng rng(SplitMix64(seed ^ 0x5a17f00dULL));
    for (std::size_t i = pool_size; i > 1; --i) std::swap(rank[i - 1], rank[rng.Below(i)]);
    for (std::size_t r = 0; r < pool_size; ++r) {
      weight[rank[r]] = std::pow(static_cast<double>(r + 1), -dist.exponent);
    }
  }
  std::vector<double> p(pool_size, 0.0);
  std::vector<bool> clamped(pool_size, false);
  double remaining = expected;
  while (true) {
    double free_weight = 0.0;
    for (std::size_t i = 0; i < pool_size; ++i) {
      if (!clamped[i]) free_weight += weight[i];
    }
    bool changed = false;
    for (std::size_t i = 0; i < pool_size; ++i) {
      if (clamped[i]) continue;
      p[i] = remaining * weight[i] / free_weight;
      if (p[i] >= 1.0) {
        p[i] = 1.0;
        clamped[i] = true;
        remaining -= 1.0;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return p;
}

// Each query draws every pool clause independently; empty draws are redrawn.
inline Workload GenerateWorkload(const PoolSpec& pool, const WorkloadSpec& spec) {
  auto clauses = pool.Flatten();
  auto p = InclusionProbabilities(clauses.size(), spec.expected_predicates, spec.distribution, spec.seed);
  Workload out;
  out.reserve(spec.num_queries);
  for (std::size_t q = 0; q < spec.num_queries; ++q) {
    Rng rng(SplitMix64(spec.seed ^ SplitMix64(q + 1)));
    Query query;
    while (query.clauses.empty()) {
      for (std::size_t i = 0; i < clauses.size(); ++i) {
        if (rng.Bernoulli(p[i])) query.clauses.push_back(clauses[i]);
      }
    }
    out.push_back(std::move(query));
  }
  return out;
}

// sum (X_i - mean)^3 / ((N - 1) * sigma^3) with sigma the population standard
// deviation; 0 when all counts are equal.
inline double SkewnessFactor(const std::vector<double>& counts) {
  const auto n = counts.size();
  if (n < 2) throw Error(ErrorKind::kValidation, "skewness needs at least two predicates");
  double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0;
  for (auto x : counts) {
    m2 += (x - mean) * (x - mean);
    m3 += (x - mean) * (x - mean) * (x - mean);
  }
  double sigma = std::sqrt(m2 / static_cast<double>(n));
  if (sigma == 0.0) return 0.0;
  return m3 / (static_cast<double>(n - 1) * sigma * sigma * sigma);
}

// Query counts per distinct clause of the workload, in canonical order.
inline std::vector<double> PredicateQueryCounts(const Workload& workload) {
  std::map<std::string, double> counts;
  for (const auto& q : workload) {
    std::vector<std::string> keys;
    for (const auto& c : q.clauses) keys.push_back(Canonicalize(c).Serialize());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (auto& k : keys) counts[k] += 1.0;
  }
  std::vector<double> out;
  for (const auto& [k, v] : counts) out.push_back(v);
  return out;
}

inline double SkewnessFactor(const Workload& workload) { return SkewnessFactor(PredicateQueryCounts(workload)); }

struct WorkloadStats {
  std::size_t queries = 0;
  std::size_t total_predicates = 0;
  std::size_t distinct_predicates = 0;
  std::size_t min_predicates = 0;
  std::size_t max_predicates = 0;
  double skewness = 0.0;
};

inline WorkloadStats ComputeStats(const Workload& workload) {
  WorkloadStats s;
  s.queries = workload.size();
  s.min_predicates = workload.empty() ? 0 : SIZE_MAX;
  for (const auto& q : workload) {
    s.total_predicates += q.clauses.size();
    s.min_predicates = std::min(s.min_predicates, q.clauses.size());
    s.max_predicates = std::max(s.max_predicates, q.clauses.size());
  }
  auto counts = PredicateQueryCounts(workload);
  s.distinct_predicates = counts.size();
  s.skewness = counts.size() >= 2 ? SkewnessFactor(counts) : 0.0;
  return s;
}

// Exact match fraction of a clause over a sample, by full parse. Lines that
// are not valid JSON objects are left out of the denominator.
inline double EstimateSelectivity(const ConjunctiveClause& clause, const std::vector<std::string>& sample) {
  if (sample.empty()) throw Error(ErrorKind::kValidation, "empty sample");
  Query q;
  q.clauses.push_back(clause);
  auto prepared = PrepareQuery(q);
  std::size_t valid = 0, matched = 0;
  for (const auto& line : sample) {
    std::vector<FlatField> fields;
    try {
      fields = FlattenObject(line);
    } catch (const Error&) {
      continue;
    }
    ++valid;
    if (detail::VerifyFlat(prepared, fields)) ++matched;
  }
  if (valid == 0) throw Error(ErrorKind::kValidation, "sample has no valid objects");
  return static_cast<double>(matched) / static_cast<double>(valid);
}

// Re-estimates every clause's selectivity on a sample; flattening is done once.
inline void EstimateSelectivities(Workload& workload, const std::vector<std::string>& sample) {
  if (sample.empty()) throw Error(ErrorKind::kValidation, "empty sample");
  std::vector<std::vector<FlatField>> rows;
  for (const auto& line : sample) {
    try {
      rows.push_back(FlattenObject(line));
    } catch (const Error&) {
    }
  }
  if (rows.empty()) throw Error(ErrorKind::kValidation, "sample has no valid objects");
  std::map<std::string, double> cache;
  for (auto& q : workload) {
    for (auto& c : q.clauses) {
      auto key = Canonicalize(c).Serialize();
      auto it = cache.find(key);
      if (it == cache.end()) {
        Query single;
        single.clauses.push_back(c);
        double sel = 0.0;
        try {
          auto prepared = PrepareQuery(single);
          std::size_t matched = 0;
          for (const auto& r : rows) matched += detail::VerifyFlat(prepared, r) ? 1 : 0;
          sel = static_cast<double>(matched) / static_cast<double>(rows.size());
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kUnsupportedPredicate) throw;
          sel = 1.0;
        }
        it = cache.emplace(key, sel).first;
      }
      c.selectivity = it->second;
    }
  }
}

}  // namespace pushdown
