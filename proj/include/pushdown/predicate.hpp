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

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pushdown/error.hpp"
#include "pushdown/json_text.hpp"

namespace pushdown {

enum class PredicateOp {
  kExactString,    // eq
  kSubstringLike,  // like
  kKeyPresence,    // present
  kKeyValueEq,     // kv_eq
  // Range and inequality operators are representable so workloads can carry
  // them, but they can be neither pushed down nor verified.
  kLess,
  kLessEqual,
  kGreater,
  kGreaterEqual,
  kNotEqual,
};

constexpr std::string_view OpName(PredicateOp op) {
  switch (op) {
    case PredicateOp::kExactString: return "eq";
    case PredicateOp::kSubstringLike: return "like";
    case PredicateOp::kKeyPresence: return "present";
    case PredicateOp::kKeyValueEq: return "kv_eq";
    case PredicateOp::kLess: return "lt";
    case PredicateOp::kLessEqual: return "le";
    case PredicateOp::kGreater: return "gt";
    case PredicateOp::kGreaterEqual: return "ge";
    case PredicateOp::kNotEqual: return "ne";
  }
  return "?";
}

inline PredicateOp ParseOpName(std::string_view name) {
  for (auto op : {PredicateOp::kExactString, PredicateOp::kSubstringLike, PredicateOp::kKeyPresence,
                  PredicateOp::kKeyValueEq, PredicateOp::kLess, PredicateOp::kLessEqual,
                  PredicateOp::kGreater, PredicateOp::kGreaterEqual, PredicateOp::kNotEqual}) {
    if (OpName(op) == name) return op;
  }
  throw Error(ErrorKind::kValidation, "unknown operator '" + std::string(name) + "'");
}

constexpr bool IsPushable(PredicateOp op) {
  return op == PredicateOp::kExactString || op == PredicateOp::kSubstringLike ||
         op == PredicateOp::kKeyPresence || op == PredicateOp::kKeyValueEq;
}

struct Literal {
  enum class Kind { kString, kNumber, kBoolean };

  Kind kind = Kind::kString;
  // Decoded content for strings; the canonical JSON token for numbers and
  // booleans ("10", "2.5", "true").
  std::string text;

  static Literal String(std::string s) { return {Kind::kString, std::move(s)}; }
  static Literal Number(std::string token) { return {Kind::kNumber, std::move(token)}; }
  static Literal Boolean(bool b) { return {Kind::kBoolean, b ? "true" : "false"}; }

  // The literal as it appears in canonical JSON.
  std::string ToJson() const { return kind == Kind::kString ? json::Quote(text) : text; }

  friend bool operator==(const Literal&, const Literal&) = default;
};

inline std::vector<std::string_view> SplitPath(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    parts.push_back(path.substr(start, dot == std::string_view::npos ? path.size() - start : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

inline void ValidateFieldPath(std::string_view path) {
  if (path.empty()) throw Error(ErrorKind::kValidation, "empty field path");
  for (auto part : SplitPath(path)) {
    if (part.empty()) {
      throw Error(ErrorKind::kValidation, "malformed field path '" + std::string(path) + "'");
    }
  }
}

class SimplePredicate {
 public:
  SimplePredicate(std::string field_path, PredicateOp op, std::optional<Literal> operand = std::nullopt)
      : field_path_(std::move(field_path)), op_(op), operand_(std::move(operand)) {
    ValidateFieldPath(field_path_);
    if (op_ == PredicateOp::kKeyPresence) {
      if (operand_) throw Error(ErrorKind::kValidation, "presence predicate takes no operand");
    } else {
      if (!operand_) throw Error(ErrorKind::kValidation, "operator '" + std::string(OpName(op_)) + "' needs an operand");
      if (operand_->text.empty()) throw Error(ErrorKind::kValidation, "empty operand");
    }
    if (op_ == PredicateOp::kSubstringLike && operand_->kind != Literal::Kind::kString) {
      throw Error(ErrorKind::kValidation, "LIKE needs a string operand");
    }
  }

  static SimplePredicate Eq(std::string field, std::string value) {
    return {std::move(field), PredicateOp::kExactString, Literal::String(std::move(value))};
  }
  static SimplePredicate Like(std::string field, std::string pattern) {
    return {std::move(field), PredicateOp::kSubstringLike, Literal::String(std::move(pattern))};
  }
  static SimplePredicate Present(std::string field) {
    return {std::move(field), PredicateOp::kKeyPresence};
  }
  static SimplePredicate KeyValue(std::string field, Literal value) {
    return {std::move(field), PredicateOp::kKeyValueEq, std::move(value)};
  }

  const std::string& field_path() const { return field_path_; }
  PredicateOp op() const { return op_; }
  const std::optional<Literal>& operand() const { return operand_; }

  // Unambiguous canonical form: ["field","op",literal].
  std::string Serialize() const {
    std::string out = "[" + json::Quote(field_path_) + "," + json::Quote(OpName(op_));
    if (operand_) out += "," + operand_->ToJson();
    out += "]";
    return out;
  }

  friend bool operator==(const SimplePredicate&, const SimplePredicate&) = default;

 private:
  std::string field_path_;
  PredicateOp op_;
  std::optional<Literal> operand_;
};

// A disjunction of simple predicates; one conjunct of a query and the unit of
// pushdown.
struct ConjunctiveClause {
  std::vector<SimplePredicate> disjuncts;
  std::uint32_t id = 0;
  double selectivity = 1.0;
  double eval_cost = 0.0;  // microseconds per object

  std::string Serialize() const {
    std::string out = "[";
    for (std::size_t i = 0; i < disjuncts.size(); ++i) {
      if (i) out += ",";
      out += disjuncts[i].Serialize();
    }
    out += "]";
    return out;
  }

  bool IsPushable() const {
    return std::all_of(disjuncts.begin(), disjuncts.end(),
                       [](const SimplePredicate& p) { return pushdown::IsPushable(p.op()); });
  }
};

inline void ValidateClause(const ConjunctiveClause& clause) {
  if (clause.disjuncts.empty()) throw Error(ErrorKind::kValidation, "clause has no disjuncts");
  if (!(clause.selectivity >= 0.0 && clause.selectivity <= 1.0)) {
    throw Error(ErrorKind::kValidation, "selectivity outside [0,1]");
  }
  if (!(clause.eval_cost >= 0.0)) throw Error(ErrorKind::kValidation, "negative evaluation cost");
  for (const auto& d : clause.disjuncts) ValidateFieldPath(d.field_path());
}

// Sorts disjuncts by serialized form and drops duplicates. Idempotent.
inline ConjunctiveClause Canonicalize(ConjunctiveClause clause) {
  ValidateClause(clause);
  std::vector<std::pair<std::string, SimplePredicate>> keyed;
  keyed.reserve(clause.disjuncts.size());
  for (auto& d : clause.disjuncts) keyed.emplace_back(d.Serialize(), std::move(d));
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              keyed.end());
  clause.disjuncts.clear();
  for (auto& [key, d] : keyed) clause.disjuncts.push_back(std::move(d));
  return clause;
}

inline bool SameClause(const ConjunctiveClause& a, const ConjunctiveClause& b) {
  return Canonicalize(a).Serialize() == Canonicalize(b).Serialize();
}

struct Query {
  std::vector<ConjunctiveClause> clauses;
  double frequency = 1.0;
};

inline void ValidateQuery(const Query& q) {
  if (q.clauses.empty()) throw Error(ErrorKind::kValidation, "query has no clauses");
  if (!(q.frequency >= 0.0)) throw Error(ErrorKind::kValidation, "negative query frequency");
  for (const auto& c : q.clauses) ValidateClause(c);
}

using Workload = std::vector<Query>;

// ---------------------------------------------------------------------------
// Pattern compilation

enum class MatchMode { kFindSubstring, kFindKeyThenValue };

struct CompiledPattern {
  MatchMode mode = MatchMode::kFindSubstring;
  std::string pattern_a;
  std::optional<std::string> pattern_b;

  static CompiledPattern Substring(std::string a) { return {MatchMode::kFindSubstring, std::move(a), std::nullopt}; }
  static CompiledPattern KeyThenValue(std::string key, std::string value) {
    return {MatchMode::kFindKeyThenValue, std::move(key), std::move(value)};
  }

  friend bool operator==(const CompiledPattern&, const CompiledPattern&) = default;
};

// Splits a LIKE operand into its literal core and anchoring. Only leading and
// trailing '%' are supported.
struct LikePattern {
  std::string core;
  bool open_start = false;  // leading '%'
  bool open_end = false;    // trailing '%'
};

inline LikePattern ParseLike(std::string_view operand) {
  LikePattern like;
  if (!operand.empty() && operand.front() == '%') {
    like.open_start = true;
    operand.remove_prefix(1);
  }
  if (!operand.empty() && operand.back() == '%') {
    like.open_end = true;
    operand.remove_suffix(1);
  }
  if (operand.find_first_of("%_") != std::string_view::npos) {
    throw Error(ErrorKind::kUnsupportedPredicate,
                "LIKE wildcards are only supported as a leading/trailing '%'");
  }
  if (operand.empty()) throw Error(ErrorKind::kUnsupportedPredicate, "LIKE pattern has no literal part");
  like.core = std::string(operand);
  return like;
}

inline std::string LeafKey(std::string_view path) {
  auto dot = path.rfind('.');
  return std::string(dot == std::string_view::npos ? path : path.substr(dot + 1));
}

inline std::vector<CompiledPattern> Compile(const SimplePredicate& pred) {
  switch (pred.op()) {
    case PredicateOp::kExactString:
      // Strings match on their quoted encoding; other literals on the bare token.
      return {CompiledPattern::Substring(pred.operand()->ToJson())};
    case PredicateOp::kSubstringLike:
      return {CompiledPattern::Substring(json::Escape(ParseLike(pred.operand()->text).core))};
    case PredicateOp::kKeyPresence:
      return {CompiledPattern::Substring(json::Quote(LeafKey(pred.field_path())))};
    case PredicateOp::kKeyValueEq: {
      auto value = pred.operand()->ToJson();
      // The value span ends at the next ',' or '}', so a value containing
      // either could never be found.
      if (value.find_first_of(",}") != std::string::npos) {
        throw Error(ErrorKind::kUnsupportedPredicate, "key-value operand contains ',' or '}'");
      }
      return {CompiledPattern::KeyThenValue(json::Quote(LeafKey(pred.field_path())), std::move(value))};
    }
    default:
      throw Error(ErrorKind::kUnsupportedPredicate,
                  "range and inequality predicates cannot be evaluated on raw text: " + pred.Serialize());
  }
}

struct CompiledDisjunct {
  SimplePredicate predicate;
  std::vector<CompiledPattern> patterns;
};

struct CompiledClause {
  std::uint32_t id = 0;
  std::vector<CompiledDisjunct> disjuncts;
};

// Any uncompilable disjunct rejects the whole clause.
inline CompiledClause CompileClause(const ConjunctiveClause& clause) {
  CompiledClause out;
  out.id = clause.id;
  for (const auto& d : clause.disjuncts) out.disjuncts.push_back({d, Compile(d)});
  return out;
}

inline bool IsCompilable(const ConjunctiveClause& clause) {
  try {
    CompileClause(clause);
    return true;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kUnsupportedPredicate) return false;
    throw;
  }
}

}  // namespace pushdown
