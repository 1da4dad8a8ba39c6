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

// JSON interchange for predicates, clauses and workloads:
//   {"queries":[{"frequency":1.0,"clauses":[{"disjuncts":[
//       {"field":"name","op":"eq","value":"Bob"}],"selectivity":0.01}]}]}

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

#include "pushdown/binary_io.hpp"
#include "pushdown/error.hpp"
#include "pushdown/predicate.hpp"

namespace pushdown {

inline Literal LiteralFromJson(const nlohmann::json& j) {
  if (j.is_string()) return Literal::String(j.get<std::string>());
  if (j.is_boolean()) return Literal::Boolean(j.get<bool>());
  if (j.is_number()) return Literal::Number(j.dump());
  throw Error(ErrorKind::kValidation, "unsupported literal " + j.dump());
}

inline nlohmann::json LiteralToJson(const Literal& lit) {
  switch (lit.kind) {
    case Literal::Kind::kString: return lit.text;
    case Literal::Kind::kBoolean: return lit.text == "true";
    case Literal::Kind::kNumber: return nlohmann::json::parse(lit.text);
  }
  return nullptr;
}

inline SimplePredicate PredicateFromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("field") || !j.contains("op")) {
    throw Error(ErrorKind::kValidation, "predicate needs 'field' and 'op': " + j.dump());
  }
  auto op = ParseOpName(j.at("op").get<std::string>());
  std::optional<Literal> operand;
  if (j.contains("value") && !j.at("value").is_null()) operand = LiteralFromJson(j.at("value"));
  return {j.at("field").get<std::string>(), op, std::move(operand)};
}

inline nlohmann::json PredicateToJson(const SimplePredicate& p) {
  nlohmann::json j = {{"field", p.field_path()}, {"op", std::string(OpName(p.op()))}};
  if (p.operand()) j["value"] = LiteralToJson(*p.operand());
  return j;
}

inline ConjunctiveClause ClauseFromJson(const nlohmann::json& j) {
  ConjunctiveClause c;
  if (!j.contains("disjuncts") || !j.at("disjuncts").is_array()) {
    throw Error(ErrorKind::kValidation, "clause needs a 'disjuncts' array");
  }
  for (const auto& d : j.at("disjuncts")) c.disjuncts.push_back(PredicateFromJson(d));
  c.selectivity = j.value("selectivity", 1.0);
  c.eval_cost = j.value("cost", 0.0);
  c.id = j.value("id", 0U);
  return Canonicalize(std::move(c));
}

inline nlohmann::json ClauseToJson(const ConjunctiveClause& c) {
  nlohmann::json d = nlohmann::json::array();
  for (const auto& p : c.disjuncts) d.push_back(PredicateToJson(p));
  return {{"disjuncts", d}, {"selectivity", c.selectivity}, {"cost", c.eval_cost}};
}

inline Query QueryFromJson(const nlohmann::json& j) {
  Query q;
  q.frequency = j.value("frequency", 1.0);
  for (const auto& c : j.at("clauses")) q.clauses.push_back(ClauseFromJson(c));
  ValidateQuery(q);
  return q;
}

inline nlohmann::json QueryToJson(const Query& q) {
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : q.clauses) clauses.push_back(ClauseToJson(c));
  return {{"frequency", q.frequency}, {"clauses", clauses}};
}

inline Workload WorkloadFromJson(const nlohmann::json& j) {
  Workload w;
  if (j.contains("queries")) {
    for (const auto& q : j.at("queries")) w.push_back(QueryFromJson(q));
  } else if (j.contains("clauses")) {
    w.push_back(QueryFromJson(j));  // a single query document
  } else {
    throw Error(ErrorKind::kValidation, "expected 'queries' or 'clauses'");
  }
  return w;
}

inline nlohmann::json WorkloadToJson(const Workload& w) {
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : w) queries.push_back(QueryToJson(q));
  return {{"queries", queries}};
}

inline nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  auto text = io::ReadFile(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, path.string() + ": " + e.what());
  }
}

inline void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j) {
  io::WriteFileAtomic(path, j.dump(2) + "\n");
}

inline Workload LoadWorkload(const std::filesystem::path& path) {
  try {
    return WorkloadFromJson(ReadJsonFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, path.string() + ": " + e.what());
  }
}

}  // namespace pushdown
