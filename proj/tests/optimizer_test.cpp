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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pushdown/optimizer.hpp"

namespace pushdown {
namespace {

ConjunctiveClause Clause(const std::string& field, double sel, double cost) {
  ConjunctiveClause c;
  c.disjuncts.push_back(SimplePredicate::Eq(field, "v"));
  c.selectivity = sel;
  c.eval_cost = cost;
  return c;
}

Query Q(std::vector<ConjunctiveClause> clauses, double freq = 1.0) { return {std::move(clauses), freq}; }

// Random instance: n clauses named c00.., each query draws 1-3 of them.
Workload RandomWorkload(std::mt19937_64& rng, int n, int queries) {
  std::uniform_real_distribution<double> sel(0.0, 1.0), cost(0.05, 1.0), freq(0.1, 3.0);
  std::vector<ConjunctiveClause> pool;
  for (int i = 0; i < n; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "c%02d", i);
    pool.push_back(Clause(name, sel(rng), cost(rng)));
  }
  Workload w;
  for (int q = 0; q < queries; ++q) {
    std::vector<ConjunctiveClause> cs;
    int k = 1 + static_cast<int>(rng() % 3);
    for (int j = 0; j < k; ++j) cs.push_back(pool[rng() % pool.size()]);
    w.push_back(Q(cs, freq(rng)));
  }
  return w;
}

std::vector<std::string> Names(const std::vector<ConjunctiveClause>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.disjuncts[0].field_path());
  return out;
}

// Straightforward greedy written against the set objective; candidates are the
// distinct clauses in name order.
std::vector<std::string> OracleGreedy(const Workload& w, double budget, bool by_ratio) {
  std::map<std::string, ConjunctiveClause> unique;
  for (const auto& q : w)
    for (const auto& c : q.clauses) unique.emplace(c.disjuncts[0].field_path(), c);
  std::vector<ConjunctiveClause> chosen;
  std::vector<std::string> names;
  double used = 0;
  while (true) {
    double base = Objective(w, chosen);
    std::string best;
    double best_score = -1;
    for (const auto& [name, c] : unique) {
      if (std::find(names.begin(), names.end(), name) != names.end()) continue;
      if (used + c.eval_cost > budget) continue;
      auto with = chosen;
      with.push_back(c);
      double gain = Objective(w, with) - base;
      double score = by_ratio ? gain / c.eval_cost : gain;
      if (best.empty() || score > best_score + 1e-12) {
        best = name;
        best_score = score;
      }
    }
    if (best.empty()) break;
    names.push_back(best);
    chosen.push_back(unique.at(best));
    used += unique.at(best).eval_cost;
  }
  return names;
}

TEST(Benefit, Examples) {
  auto a = Clause("a", 0.5, 1), b = Clause("b", 0.2, 1), z = Clause("z", 0.0, 1);
  Query q = Q({a, b});
  EXPECT_DOUBLE_EQ(ClauseBenefit(q, {}), 0.0);
  EXPECT_DOUBLE_EQ(ClauseBenefit(q, {a}), 0.5);
  EXPECT_DOUBLE_EQ(ClauseBenefit(q, {a, b}), 0.9);
  EXPECT_DOUBLE_EQ(ClauseBenefit(Q({z}), {z}), 1.0);
  // Clauses outside the query contribute nothing.
  EXPECT_DOUBLE_EQ(ClauseBenefit(q, {z}), 0.0);
}

TEST(Objective, LinearInFrequency) {
  auto a = Clause("a", 0.5, 1), b = Clause("b", 0.2, 1);
  Workload w = {Q({a, b}, 2.0), Q({b}, 3.0)};
  EXPECT_DOUBLE_EQ(Objective(w, {a, b}), 2.0 * 0.9 + 3.0 * 0.8);
  SelectionProblem p(w);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p.Objective({0, 1}), Objective(w, {a, b}), 1e-12);
  EXPECT_NEAR(p.Objective({1}), Objective(w, {b}), 1e-12);
}

TEST(Objective, MatchesRecomputationOnRandomInstances) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    auto w = RandomWorkload(rng, 8, 15);
    SelectionProblem p(w);
    for (int s = 0; s < 20; ++s) {
      std::vector<std::size_t> idx;
      std::vector<ConjunctiveClause> cs;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (rng() & 1) {
          idx.push_back(i);
          cs.push_back(p.candidate(i));
        }
      }
      EXPECT_NEAR(p.Objective(idx), Objective(w, cs), 1e-9);
    }
  }
}

TEST(Select, ZeroBudgetGivesEmptyPlan) {
  Workload w = {Q({Clause("a", 0.1, 0.5)})};
  for (auto alg : {Algorithm::kNaive, Algorithm::kRatio, Algorithm::kBestOfTwo}) {
    auto plan = Select({w, 0.0}, alg);
    EXPECT_TRUE(plan.empty());
    EXPECT_EQ(plan.objective_value, 0.0);
  }
}

TEST(Select, NegativeBudgetRejected) {
  Workload w = {Q({Clause("a", 0.1, 0.5)})};
  EXPECT_THROW(SelectBest({w, -1.0}), Error);
}

TEST(Select, SingleAffordableClause) {
  Workload w = {Q({Clause("a", 0.1, 0.5), Clause("b", 0.1, 2.0)})};
  auto plan = SelectBest({w, 1.0});
  ASSERT_EQ(plan.selected.size(), 1u);
  EXPECT_EQ(plan.selected[0].disjuncts[0].field_path(), "a");
  EXPECT_EQ(plan.selected[0].id, 0u);
  EXPECT_NEAR(plan.objective_value, 0.9, 1e-12);
  EXPECT_NEAR(plan.total_cost, 0.5, 1e-12);
}

TEST(Select, EqualBenefitPrefersCheaperUnderRatio) {
  Workload w = {Q({Clause("a", 0.5, 2.0)}), Q({Clause("b", 0.5, 1.0)})};
  auto plan = SelectRatio({w, 2.0});
  ASSERT_EQ(plan.selected.size(), 1u);
  EXPECT_EQ(plan.selected[0].disjuncts[0].field_path(), "b");
}

TEST(Select, ZeroCostClauseTakenFirstByRatio) {
  Workload w = {Q({Clause("a", 0.1, 0.5)}), Q({Clause("b", 0.9, 0.0)})};
  auto plan = SelectRatio({w, 1.0});
  ASSERT_EQ(plan.selected.size(), 2u);
  EXPECT_EQ(plan.selected[0].disjuncts[0].field_path(), "b");
}

TEST(Select, NaiveCanBeatRatio) {
  Workload w = {Q({Clause("big", 0.0, 1.0)}), Q({Clause("cheap", 0.98, 0.01)})};
  auto naive = SelectNaive({w, 1.0});
  auto ratio = SelectRatio({w, 1.0});
  EXPECT_NEAR(naive.objective_value, 1.0, 1e-12);
  EXPECT_NEAR(ratio.objective_value, 0.02, 1e-12);
  auto best = SelectBest({w, 1.0});
  EXPECT_EQ(best.chosen, Algorithm::kNaive);
  EXPECT_EQ(best.algorithm, Algorithm::kBestOfTwo);
  EXPECT_NEAR(best.objective_value, 1.0, 1e-12);
}

TEST(Select, RatioCanBeatNaive) {
  Workload w = {Q({Clause("big", 0.0, 1.0)}), Q({Clause("x", 0.05, 0.5)}), Q({Clause("y", 0.05, 0.5)})};
  EXPECT_NEAR(SelectNaive({w, 1.0}).objective_value, 1.0, 1e-12);
  EXPECT_NEAR(SelectRatio({w, 1.0}).objective_value, 1.9, 1e-12);
  auto best = SelectBest({w, 1.0});
  EXPECT_EQ(best.chosen, Algorithm::kRatio);
  EXPECT_NEAR(best.objective_value, 1.9, 1e-12);
}

TEST(Select, UnpushableClausesAreNotCandidates) {
  ConjunctiveClause lt;
  lt.disjuncts.push_back(SimplePredicate("age", PredicateOp::kLess, Literal::Number("3")));
  lt.selectivity = 0.0;
  Workload w = {Q({lt, Clause("a", 0.5, 0.1)})};
  auto plan = SelectBest({w, 10.0});
  ASSERT_EQ(plan.selected.size(), 1u);
  EXPECT_EQ(plan.selected[0].disjuncts[0].field_path(), "a");
}

TEST(Select, DuplicateClausesCountOnce) {
  auto a = Clause("a", 0.5, 0.3);
  Workload w = {Q({a, a}), Q({a})};
  SelectionProblem p(w);
  EXPECT_EQ(p.size(), 1u);
  EXPECT_NEAR(p.Objective({0}), 1.0, 1e-12);
}

TEST(Select, GreedyTracesMatchOracle) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    auto w = RandomWorkload(rng, 8, 12);
    double budget = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    EXPECT_EQ(Names(SelectNaive({w, budget}).selected), OracleGreedy(w, budget, false));
    EXPECT_EQ(Names(SelectRatio({w, budget}).selected), OracleGreedy(w, budget, true));
  }
}

TEST(Select, FeasibleAndDeterministic) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    auto w = RandomWorkload(rng, 10, 20);
    double budget = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    auto a = SelectBest({w, budget});
    auto b = SelectBest({w, budget});
    EXPECT_LE(a.total_cost, budget + 1e-12);
    EXPECT_EQ(PlanToJson(a).dump(), PlanToJson(b).dump());
    EXPECT_EQ(a.Hash(), b.Hash());
  }
}

TEST(Select, BestOfTwoWithinBoundOfOptimum) {
  const double bound = (1.0 - std::exp(-1.0)) / 2.0;
  std::mt19937_64 rng(31);
  for (int t = 0; t < 60; ++t) {
    auto w = RandomWorkload(rng, 9, 14);
    SelectionProblem p(w);
    double budget = std::uniform_real_distribution<double>(0.2, 2.5)(rng);
    double opt = 0;
    for (std::uint32_t mask = 0; mask < (1U << p.size()); ++mask) {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < p.size(); ++i)
        if (mask >> i & 1) s.push_back(i);
      if (p.Cost(s) <= budget) opt = std::max(opt, p.Objective(s));
    }
    auto plan = SelectBest({w, budget});
    EXPECT_GE(plan.objective_value, bound * opt - 1e-12);
  }
}

TEST(Objective, MonotoneAndSubmodular) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    auto w = RandomWorkload(rng, 8, 10);
    SelectionProblem p(w);
    std::vector<std::size_t> s, big;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto r = rng() % 3;
      if (r == 0) s.push_back(i);
      if (r <= 1) big.push_back(i);
    }
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (std::find(big.begin(), big.end(), x) != big.end()) continue;
      auto sx = s, bx = big;
      sx.push_back(x);
      bx.push_back(x);
      EXPECT_LE(p.Objective(s), p.Objective(big) + 1e-12);
      EXPECT_GE(p.Objective(sx) - p.Objective(s), p.Objective(bx) - p.Objective(big) - 1e-9);
    }
  }
}

}  // namespace
}  // namespace pushdown
