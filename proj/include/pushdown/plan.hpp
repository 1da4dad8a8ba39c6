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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pushdown/predicate.hpp"
#include "pushdown/workload_io.hpp"

namespace pushdown {

enum class Algorithm { kNaive, kRatio, kBestOfTwo };

constexpr std::string_view AlgorithmName(Algorithm a) {
  switch (a) {
    case Algorithm::kNaive: return "naive";
    case Algorithm::kRatio: return "ratio";
    case Algorithm::kBestOfTwo: return "best_of_two";
  }
  return "?";
}

inline Algorithm ParseAlgorithm(std::string_view name) {
  for (auto a : {Algorithm::kNaive, Algorithm::kRatio, Algorithm::kBestOfTwo}) {
    if (AlgorithmName(a) == name) return a;
  }
  throw Error(ErrorKind::kValidation, "unknown algorithm '" + std::string(name) + "'");
}

// The set of clauses pushed down to clients. Clause ids are dense from 0 in
// selection order.
struct SelectionPlan {
  std::vector<ConjunctiveClause> selected;
  double objective_value = 0.0;
  double total_cost = 0.0;
  double budget = 0.0;
  Algorithm algorithm = Algorithm::kBestOfTwo;
  // Which greedy produced the plan when algorithm is best_of_two.
  Algorithm chosen = Algorithm::kRatio;

  bool empty() const { return selected.empty(); }

  // FNV-1a over the ids and canonical clause forms; identifies the pushdown
  // configuration that produced a chunk set or store.
  std::string Hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    };
    for (const auto& c : selected) {
      mix(std::to_string(c.id));
      mix(":");
      mix(c.Serialize());
      mix("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  std::vector<CompiledClause> Compile() const {
    std::vector<CompiledClause> out;
    out.reserve(selected.size());
    for (const auto& c : selected) out.push_back(CompileClause(c));
    return out;
  }
};

inline nlohmann::json PlanToJson(const SelectionPlan& plan) {
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : plan.selected) {
    auto j = ClauseToJson(c);
    j["id"] = c.id;
    nlohmann::json patterns = nlohmann::json::array();
    for (const auto& d : CompileClause(c).disjuncts) {
      for (const auto& p : d.patterns) {
        nlohmann::json pj = {{"mode", p.mode == MatchMode::kFindSubstring ? "find_substring" : "find_key_then_value"},
                             {"pattern_a", p.pattern_a}};
        if (p.pattern_b) pj["pattern_b"] = *p.pattern_b;
        patterns.push_back(pj);
      }
    }
    j["patterns"] = patterns;
    clauses.push_back(j);
  }
  return {{"version", 1},
          {"algorithm", std::string(AlgorithmName(plan.algorithm))},
          {"chosen", std::string(AlgorithmName(plan.chosen))},
          {"budget_us", plan.budget},
          {"objective", plan.objective_value},
          {"total_cost_us", plan.total_cost},
          {"plan_hash", plan.Hash()},
          {"clauses", clauses}};
}

inline SelectionPlan PlanFromJson(const nlohmann::json& j) {
  try {
    SelectionPlan plan;
    plan.algorithm = ParseAlgorithm(j.value("algorithm", "best_of_two"));
    plan.chosen = ParseAlgorithm(j.value("chosen", std::string(AlgorithmName(plan.algorithm))));
    plan.budget = j.value("budget_us", 0.0);
    plan.objective_value = j.value("objective", 0.0);
    plan.total_cost = j.value("total_cost_us", 0.0);
    for (const auto& cj : j.at("clauses")) {
      auto c = ClauseFromJson(cj);
      c.id = cj.at("id").get<std::uint32_t>();
      plan.selected.push_back(std::move(c));
    }
    if (j.contains("plan_hash") && j.at("plan_hash").get<std::string>() != plan.Hash()) {
      throw Error(ErrorKind::kValidation, "plan hash does not match its clauses");
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("bad plan document: ") + e.what());
  }
}

inline SelectionPlan LoadPlan(const std::filesystem::path& path) { return PlanFromJson(ReadJsonFile(path)); }

inline void SavePlan(const std::filesystem::path& path, const SelectionPlan& plan) {
  WriteJsonFile(path, PlanToJson(plan));
}

}  // namespace pushdown
