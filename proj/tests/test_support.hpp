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

// Shared helpers for the test binaries: temporary directories, an oracle that
// evaluates predicates on nlohmann::json documents, and random generators for
// objects and predicates.

#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pushdown/predicate.hpp"

namespace pushdown::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("pushdown-" + tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Oracle: predicate truth on a fully parsed document.

inline const nlohmann::json* Resolve(const nlohmann::json& doc, const std::string& path) {
  const nlohmann::json* cur = &doc;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(key);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

inline bool OracleLike(const std::string& value, const std::string& pattern) {
  bool open_start = !pattern.empty() && pattern.front() == '%';
  bool open_end = pattern.size() > (open_start ? 1U : 0U) && pattern.back() == '%';
  std::string core = pattern.substr(open_start ? 1 : 0);
  if (open_end) core.pop_back();
  if (open_start && open_end) return value.find(core) != std::string::npos;
  if (open_start) return value.size() >= core.size() && value.compare(value.size() - core.size(), core.size(), core) == 0;
  if (open_end) return value.rfind(core, 0) == 0;
  return value == core;
}

inline bool OracleMatch(const nlohmann::json& doc, const SimplePredicate& p) {
  const auto* v = Resolve(doc, p.field_path());
  if (p.op() == PredicateOp::kKeyPresence) return v != nullptr && !v->is_null();
  if (v == nullptr) return false;
  const auto& lit = *p.operand();
  if (p.op() == PredicateOp::kSubstringLike) return v->is_string() && OracleLike(v->get<std::string>(), lit.text);
  switch (lit.kind) {
    case Literal::Kind::kString: return v->is_string() && v->get<std::string>() == lit.text;
    case Literal::Kind::kBoolean: return v->is_boolean() && v->get<bool>() == (lit.text == "true");
    case Literal::Kind::kNumber: return v->is_number() && v->get<double>() == std::stod(lit.text);
  }
  return false;
}

inline bool OracleClause(const nlohmann::json& doc, const ConjunctiveClause& c) {
  for (const auto& d : c.disjuncts) {
    if (OracleMatch(doc, d)) return true;
  }
  return false;
}

inline bool OracleQuery(const nlohmann::json& doc, const Query& q) {
  for (const auto& c : q.clauses) {
    if (!OracleClause(doc, c)) return false;
  }
  return true;
}

// Parses a line for the oracle; nullopt when it is not a JSON object.
inline std::optional<nlohmann::json> OracleParse(const std::string& line) {
  auto doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  return doc;
}

// ---------------------------------------------------------------------------
// Random documents and predicates

inline const std::vector<std::string>& FuzzKeys() {
  static const std::vector<std::string> keys = {"a", "b", "name", "age", "tags", "x_y", "nick name", "k\"q", "é"};
  return keys;
}

inline std::string RandomString(std::mt19937_64& rng) {
  static const std::vector<std::string> atoms = {"a", "b", "Bob", "o", ",", "}", "{", ":", "\"", "\\", " ", "%",
                                                 "_", "é", "日本", "\n", "\t", "\x01", "10", "true", "null", "[", "]"};
  std::string s;
  auto n = rng() % 7;
  for (std::size_t i = 0; i < n; ++i) s += atoms[rng() % atoms.size()];
  return s;
}

inline nlohmann::json RandomScalar(std::mt19937_64& rng) {
  switch (rng() % 7) {
    case 0: return RandomString(rng);
    case 1: return static_cast<std::int64_t>(rng() % 2000) - 1000;
    // Odd numerators keep fractional values non-integral, so each number has
    // one canonical rendering.
    case 2: return static_cast<double>(2 * (static_cast<std::int64_t>(rng() % 20000) - 10000) + 1) / 8.0;
    case 3: return (rng() & 1) != 0;
    case 4: return nullptr;
    case 5: return static_cast<std::int64_t>(rng() % 200);
    default: return RandomString(rng);
  }
}

inline nlohmann::json RandomValue(std::mt19937_64& rng, int depth) {
  auto r = rng() % 10;
  if (depth < 2 && r == 0) {
    nlohmann::json obj = nlohmann::json::object();
    auto n = rng() % 4;
    for (std::size_t i = 0; i < n; ++i) obj[FuzzKeys()[rng() % FuzzKeys().size()]] = RandomValue(rng, depth + 1);
    return obj;
  }
  if (depth < 2 && r == 1) {
    nlohmann::json arr = nlohmann::json::array();
    auto n = rng() % 4;
    for (std::size_t i = 0; i < n; ++i) arr.push_back(RandomValue(rng, depth + 1));
    return arr;
  }
  return RandomScalar(rng);
}

inline nlohmann::json RandomObject(std::mt19937_64& rng) {
  nlohmann::json obj = nlohmann::json::object();
  auto n = rng() % 7;
  for (std::size_t i = 0; i < n; ++i) obj[FuzzKeys()[rng() % FuzzKeys().size()]] = RandomValue(rng, 0);
  return obj;
}

// Every path to a value in the document, dot-joined.
inline void CollectPaths(const nlohmann::json& doc, const std::string& prefix, std::vector<std::string>& out) {
  if (!doc.is_object()) return;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto path = prefix.empty() ? it.key() : prefix + "." + it.key();
    out.push_back(path);
    CollectPaths(it.value(), path, out);
  }
}

inline std::optional<Literal> LiteralFor(const nlohmann::json& v) {
  if (v.is_string()) return Literal::String(v.get<std::string>());
  if (v.is_boolean()) return Literal::Boolean(v.get<bool>());
  if (v.is_number()) return Literal::Number(v.dump());
  return std::nullopt;
}

// A predicate of the requested kind (0 eq, 1 like, 2 present, 3 kv_eq) over the
// document, usually built from a value it contains so the oracle often says
// true. Returns nullopt when the draw cannot produce a valid predicate.
inline std::optional<SimplePredicate> RandomPredicate(const nlohmann::json& doc, int kind, std::mt19937_64& rng) {
  std::vector<std::string> paths;
  CollectPaths(doc, "", paths);
  std::string field;
  const nlohmann::json* value = nullptr;
  if (!paths.empty() && rng() % 5 != 0) {
    field = paths[rng() % paths.size()];
    value = Resolve(doc, field);
  } else {
    field = FuzzKeys()[rng() % FuzzKeys().size()];
  }
  try {
    switch (kind) {
      case 0:
      case 3: {
        std::optional<Literal> lit;
        if (value && rng() % 4 != 0) lit = LiteralFor(*value);
        if (!lit) {
          auto s = RandomScalar(rng);
          lit = LiteralFor(s);
        }
        if (!lit || (lit->kind == Literal::Kind::kString && lit->text.empty())) return std::nullopt;
        if (kind == 0) return SimplePredicate(field, PredicateOp::kExactString, *lit);
        return SimplePredicate::KeyValue(field, *lit);
      }
      case 1: {
        std::string base = value && value->is_string() ? value->get<std::string>() : RandomString(rng);
        if (base.empty()) return std::nullopt;
        auto from = rng() % base.size();
        auto len = 1 + rng() % (base.size() - from);
        std::string core = base.substr(from, len);
        switch (rng() % 4) {
          case 0: return SimplePredicate::Like(field, "%" + core + "%");
          case 1: return SimplePredicate::Like(field, base.substr(0, len) + "%");
          case 2: return SimplePredicate::Like(field, "%" + base.substr(base.size() - len));
          default: return SimplePredicate::Like(field, base);
        }
      }
      default: return SimplePredicate::Present(field);
    }
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace pushdown::testing
