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

// A small textual form for clauses and queries, e.g.
//   name in ("Bob", "John") AND age = 10 AND text LIKE "%tasty%"
// String literals compared with '=' become exact-string predicates; numeric
// and boolean literals become key-value predicates.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "pushdown/error.hpp"
#include "pushdown/json_text.hpp"
#include "pushdown/predicate.hpp"

namespace pushdown {

namespace detail {

class TextParser {
 public:
  explicit TextParser(std::string_view text) : text_(text) {}

  Query ParseQuery() {
    Query q;
    q.clauses.push_back(ParseConjunct());
    while (AcceptKeyword("and")) q.clauses.push_back(ParseConjunct());
    ExpectEnd();
    return q;
  }

  ConjunctiveClause ParseSingleClause() {
    auto clause = ParseDisjunction();
    ExpectEnd();
    return clause;
  }

 private:
  ConjunctiveClause ParseConjunct() {
    SkipSpace();
    if (Accept('(')) {
      auto clause = ParseDisjunction();
      if (!Accept(')')) Fail("expected ')'");
      return clause;
    }
    return ParseDisjunction();
  }

  ConjunctiveClause ParseDisjunction() {
    ConjunctiveClause clause;
    ParseTerm(clause.disjuncts);
    while (AcceptKeyword("or")) ParseTerm(clause.disjuncts);
    return Canonicalize(std::move(clause));
  }

  void ParseTerm(std::vector<SimplePredicate>& out) {
    auto field = ParsePath();
    if (AcceptKeyword("in")) {
      if (!Accept('(')) Fail("expected '(' after IN");
      do {
        out.push_back(EqualityPredicate(field, ParseLiteral()));
      } while (Accept(','));
      if (!Accept(')')) Fail("expected ')'");
      return;
    }
    if (AcceptKeyword("like")) {
      auto lit = ParseLiteral();
      if (lit.kind != Literal::Kind::kString) Fail("LIKE needs a string literal");
      out.push_back(SimplePredicate::Like(field, lit.text));
      return;
    }
    if (AcceptKeyword("is")) {
      if (!AcceptKeyword("not") || !AcceptKeyword("null")) Fail("expected IS NOT NULL");
      out.push_back(SimplePredicate::Present(field));
      return;
    }
    SkipSpace();
    if (AcceptOp("!=") || AcceptOp("<>")) {
      if (AcceptKeyword("null")) {
        out.push_back(SimplePredicate::Present(field));
      } else {
        out.push_back({field, PredicateOp::kNotEqual, ParseLiteral()});
      }
      return;
    }
    if (AcceptOp("==") || AcceptOp("=")) {
      out.push_back(EqualityPredicate(field, ParseLiteral()));
      return;
    }
    if (AcceptOp("<=")) return out.push_back({field, PredicateOp::kLessEqual, ParseLiteral()});
    if (AcceptOp(">=")) return out.push_back({field, PredicateOp::kGreaterEqual, ParseLiteral()});
    if (AcceptOp("<")) return out.push_back({field, PredicateOp::kLess, ParseLiteral()});
    if (AcceptOp(">")) return out.push_back({field, PredicateOp::kGreater, ParseLiteral()});
    Fail("expected an operator after '" + field + "'");
  }

  static SimplePredicate EqualityPredicate(const std::string& field, Literal lit) {
    if (lit.kind == Literal::Kind::kString) return {field, PredicateOp::kExactString, std::move(lit)};
    return {field, PredicateOp::kKeyValueEq, std::move(lit)};
  }

  std::string ParsePath() {
    SkipSpace();
    auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_' || text_[pos_] == '.' || text_[pos_] == '$')) {
      ++pos_;
    }
    if (start == pos_) Fail("expected a field name");
    auto path = std::string(text_.substr(start, pos_ - start));
    ValidateFieldPath(path);
    return path;
  }

  Literal ParseLiteral() {
    SkipSpace();
    if (pos_ >= text_.size()) Fail("expected a literal");
    if (text_[pos_] == '"') {
      auto start = pos_++;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\') ++pos_;
        ++pos_;
      }
      if (pos_ >= text_.size()) Fail("unterminated string literal");
      ++pos_;
      auto decoded = json::DecodeString(text_.substr(start, pos_ - start));
      if (!decoded) Fail("bad string literal");
      return Literal::String(*decoded);
    }
    if (AcceptKeyword("true")) return Literal::Boolean(true);
    if (AcceptKeyword("false")) return Literal::Boolean(false);
    auto start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                   std::string_view("+-.eE").find(text_[pos_]) != std::string_view::npos)) {
      ++pos_;
    }
    auto token = text_.substr(start, pos_ - start);
    if (!json::ParseNumber(token)) Fail("bad literal '" + std::string(token) + "'");
    return Literal::Number(std::string(token));
  }

  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool Accept(char c) {
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool AcceptOp(std::string_view op) {
    SkipSpace();
    if (text_.substr(pos_, op.size()) == op) {
      pos_ += op.size();
      return true;
    }
    return false;
  }

  bool AcceptKeyword(std::string_view kw) {
    SkipSpace();
    if (pos_ + kw.size() > text_.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(text_[pos_ + i])) != kw[i]) return false;
    }
    auto end = pos_ + kw.size();
    if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
      return false;
    }
    pos_ = end;
    return true;
  }

  void ExpectEnd() {
    SkipSpace();
    if (pos_ != text_.size()) Fail("unexpected trailing input");
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorKind::kValidation, what + " at offset " + std::to_string(pos_) + " in '" +
                                            std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Query ParseQueryText(std::string_view text) { return detail::TextParser(text).ParseQuery(); }

inline ConjunctiveClause ParseClauseText(std::string_view text) {
  return detail::TextParser(text).ParseSingleClause();
}

}  // namespace pushdown
