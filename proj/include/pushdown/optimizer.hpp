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

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pushdown/error.hpp"
#include "pushdown/plan.hpp"
#include "pushdown/predicate.hpp"

namespace pushdown {

inline constexpr double kTieTolerance = 1e-12;

struct SelectionRequest {
  Workload workload;
  double budget = 0.0;  // microseconds per object
};

// f(q, S) = 1 - prod of sel(p) over the query's clauses present in S. Clauses
// are compared by canonical form.
inline double ClauseBenefit(const Query& query, const std::vector<ConjunctiveClause>& selected) {
  std::set<std::string> in_s;
  for (const auto& c : selected) in_s.insert(Canonicalize(c).Serialize());
  std::set<std::string> seen;
  double product = 1.0;
  for (const auto& c : query.clauses) {
    auto key = Canonicalize(c).Serialize();
    if (in_s.count(key) && seen.insert(key).second) product *= c.selectivity;
  }
  return 1.0 - product;
}

// f(S) = sum over queries of f(q, S) * freq(q).
inline double Objective(const Workload& workload, const std::vector<ConjunctiveClause>& selected) {
  double total = 0.0;
  for (const auto& q : workload) total += ClauseBenefit(q, selected) * q.frequency;
  return total;
}

// Index form of a workload: deduplicated pushable clauses in canonical
// serialization order, and for each query the candidates it contains.
class SelectionProblem {
 public:
  explicit SelectionProblem(const Workload& workload) {
    std::map<std::string, ConjunctiveClause> unique;
    for (const auto& q : workload) {
      ValidateQuery(q);
      for (const auto& c : q.clauses) {
        auto canon = Canonicalize(c);
        auto key = canon.Serialize();
        if (unique.count(key) || !IsCompilable(canon)) continue;
        unique.emplace(std::move(key), std::move(canon));
      }
    }
    std::map<std::string, std::size_t> index;
    for (auto& [key, clause] : unique) {
      index.emplace(key, candidates_.size());
      candidates_.push_back(std::move(clause));
    }
    containing_.resize(candidates_.size());
    for (const auto& q : workload) {
      std::set<std::size_t> members;
      for (const auto& c : q.clauses) {
        auto it = index.find(Canonicalize(c).Serialize());
        if (it != index.end()) members.insert(it->second);
      }
      auto qi = frequency_.size();
      frequency_.push_back(q.frequency);
      query_members_.emplace_back(members.begin(), members.end());
      for (auto m : members) containing_[m].push_back(qi);
    }
  }

  std::size_t size() const { return candidates_.size(); }
  const std::vector<ConjunctiveClause>& candidates() const { return candidates_; }
  const ConjunctiveClause& candidate(std::size_t i) const { return candidates_[i]; }
  std::size_t query_count() const { return frequency_.size(); }
  const std::vector<std::size_t>& queries_containing(std::size_t i) const { return containing_[i]; }
  const std::vector<std::size_t>& members(std::size_t q) const { return query_members_[q]; }
  double frequency(std::size_t q) const { return frequency_[q]; }

  double Objective(const std::vector<std::size_t>& selected) const {
    std::vector<bool> in_s(size(), false);
    for (auto i : selected) in_s[i] = true;
    double total = 0.0;
    for (std::size_t q = 0; q < query_count(); ++q) {
      double product = 1.0;
      for (auto m : query_members_[q]) {
        if (in_s[m]) product *= candidates_[m].selectivity;
      }
      total += (1.0 - product) * frequency_[q];
    }
    return total;
  }

  double Cost(const std::vector<std::size_t>& selected) const {
    double total = 0.0;
    for (auto i : selected) total += candidates_[i].eval_cost;
    return total;
  }

 private:
  std::vector<ConjunctiveClause> candidates_;
  std::vector<double> frequency_;
  std::vector<std::vector<std::size_t>> query_members_;
  std::vector<std::vector<std::size_t>> containing_;
};

namespace detail {

// One greedy pass. Each step takes the budget-feasible candidate with the
// best score (marginal gain, or gain per unit cost), lowest index on ties.
inline std::vector<std::size_t> Greedy(const SelectionProblem& problem, double budget, bool by_ratio) {
  const auto n = problem.size();
  std::vector<double> residual(problem.query_count(), 1.0);  // prod of sel over S_i
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> order;
  double used = 0.0;
  while (true) {
    std::size_t best = n;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const auto& c = problem.candidate(i);
      if (used + c.eval_cost > budget) continue;
      double gain = 0.0;
      for (auto q : problem.queries_containing(i)) {
        gain += problem.frequency(q) * residual[q] * (1.0 - c.selectivity);
      }
      double score = gain;
      if (by_ratio) score = c.eval_cost == 0.0 ? std::numeric_limits<double>::infinity() : gain / c.eval_cost;
      bool better = best == n || (std::isinf(score) && !std::isinf(best_score)) ||
                    (!std::isinf(score) && score > best_score + kTieTolerance);
      if (better) {
        best = i;
        best_score = score;
      }
    }
    if (best == n) break;
    taken[best] = true;
    order.push_back(best);
    used += problem.candidate(best).eval_cost;
    for (auto q : problem.queries_containing(best)) residual[q] *= problem.candidate(best).selectivity;
  }
  return order;
}

inline SelectionPlan MakePlan(const SelectionProblem& problem, const std::vector<std::size_t>& order,
                              double budget, Algorithm algorithm, Algorithm chosen) {
  SelectionPlan plan;
  plan.budget = budget;
  plan.algorithm = algorithm;
  plan.chosen = chosen;
  std::uint32_t next_id = 0;
  for (auto i : order) {
    auto c = problem.candidate(i);
    c.id = next_id++;
    plan.selected.push_back(std::move(c));
  }
  plan.objective_value = problem.Objective(order);
  plan.total_cost = problem.Cost(order);
  return plan;
}

inline void ValidateRequest(const SelectionRequest& request) {
  if (!(request.budget >= 0.0)) throw Error(ErrorKind::kValidation, "budget must be non-negative");
}

}  // namespace detail

inline SelectionPlan SelectNaive(const SelectionRequest& request) {
  detail::ValidateRequest(request);
  SelectionProblem problem(request.workload);
  return detail::MakePlan(problem, detail::Greedy(problem, request.budget, false), request.budget,
                          Algorithm::kNaive, Algorithm::kNaive);
}

inline SelectionPlan SelectRatio(const SelectionRequest& request) {
  detail::ValidateRequest(request);
  SelectionProblem problem(request.workload);
  return detail::MakePlan(problem, detail::Greedy(problem, request.budget, true), request.budget,
                          Algorithm::kRatio, Algorithm::kRatio);
}

// Runs both greedy variants and keeps the higher objective. On a tie the
// cheaper plan wins, then the ratio plan.
inline SelectionPlan SelectBest(const SelectionRequest& request) {
  detail::ValidateRequest(request);
  SelectionProblem problem(request.workload);
  auto naive = detail::Greedy(problem, request.budget, false);
  auto ratio = detail::Greedy(problem, request.budget, true);
  double f_naive = problem.Objective(naive);
  double f_ratio = problem.Objective(ratio);
  bool pick_naive = false;
  if (f_naive > f_ratio + kTieTolerance) {
    pick_naive = true;
  } else if (std::abs(f_naive - f_ratio) <= kTieTolerance) {
    pick_naive = problem.Cost(naive) < problem.Cost(ratio);
  }
  return detail::MakePlan(problem, pick_naive ? naive : ratio, request.budget, Algorithm::kBestOfTwo,
                          pick_naive ? Algorithm::kNaive : Algorithm::kRatio);
}

inline SelectionPlan Select(const SelectionRequest& request, Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kNaive: return SelectNaive(request);
    case Algorithm::kRatio: return SelectRatio(request);
    case Algorithm::kBestOfTwo: return SelectBest(request);
  }
  return SelectBest(request);
}

}  // namespace pushdown
