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
#include <atomic>
#include <exception>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pushdown/bitvector.hpp"
#include "pushdown/block.hpp"
#include "pushdown/error.hpp"
#include "pushdown/json_text.hpp"
#include "pushdown/plan.hpp"
#include "pushdown/predicate.hpp"
#include "pushdown/store.hpp"

namespace pushdown {

// ---------------------------------------------------------------------------
// Full predicate semantics on parsed values

struct FieldValue {
  enum class State { kMissing, kObject, kText };
  State state = State::kMissing;
  std::string_view text;  // verbatim JSON when state == kText

  static FieldValue Missing() { return {}; }
  static FieldValue Object() { return {State::kObject, {}}; }
  static FieldValue Text(std::string_view t) { return {State::kText, t}; }
};

// A simple predicate prepared for repeated evaluation.
class Verifier {
 public:
  explicit Verifier(const SimplePredicate& pred) : path_(pred.field_path()), op_(pred.op()) {
    if (!IsPushable(op_)) {
      throw Error(ErrorKind::kUnsupportedPredicate, "cannot verify operator '" + std::string(OpName(op_)) + "'");
    }
    if (pred.operand()) literal_ = *pred.operand();
    if (op_ == PredicateOp::kSubstringLike) like_ = ParseLike(literal_.text);
    if (literal_.kind == Literal::Kind::kNumber) {
      number_ = json::ParseNumber(literal_.text);
      if (!number_) throw Error(ErrorKind::kValidation, "bad numeric literal '" + literal_.text + "'");
    }
  }

  const std::string& path() const { return path_; }

  bool operator()(const FieldValue& v) const {
    if (op_ == PredicateOp::kKeyPresence) {
      return v.state == FieldValue::State::kObject ||
             (v.state == FieldValue::State::kText && json::Classify(v.text) != json::ValueKind::kNull);
    }
    if (v.state != FieldValue::State::kText) return false;
    if (op_ == PredicateOp::kSubstringLike) {
      auto s = StringValue(v.text);
      if (!s) return false;
      std::string_view sv = *s;
      const auto& core = like_.core;
      if (like_.open_start && like_.open_end) return sv.find(core) != std::string_view::npos;
      if (like_.open_end) return sv.starts_with(core);
      if (like_.open_start) return sv.ends_with(core);
      return sv == core;
    }
    switch (literal_.kind) {
      case Literal::Kind::kString: {
        auto text = json::TrimWhitespace(v.text);
        if (text.size() >= 2 && text.front() == '"' && text.find('\\') == std::string_view::npos) {
          return text.substr(1, text.size() - 2) == literal_.text;
        }
        auto s = json::DecodeString(text);
        return s && *s == literal_.text;
      }
      case Literal::Kind::kNumber: {
        auto n = json::ParseNumber(v.text);
        return n && *n == *number_;
      }
      case Literal::Kind::kBoolean: {
        auto kind = json::Classify(v.text);
        return literal_.text == "true" ? kind == json::ValueKind::kTrue : kind == json::ValueKind::kFalse;
      }
    }
    return false;
  }

 private:
  static std::optional<std::string> StringValue(std::string_view text) { return json::DecodeString(text); }

  std::string path_;
  PredicateOp op_;
  Literal literal_;
  LikePattern like_;
  std::optional<double> number_;
};

struct PreparedQuery {
  std::vector<std::vector<Verifier>> clauses;  // conjunction of disjunctions
};

// Rejects queries whose operators have no exact semantics here.
inline PreparedQuery PrepareQuery(const Query& query) {
  ValidateQuery(query);
  PreparedQuery out;
  for (const auto& c : query.clauses) {
    std::vector<Verifier> ds;
    for (const auto& d : c.disjuncts) ds.emplace_back(d);
    out.clauses.push_back(std::move(ds));
  }
  return out;
}

// Field lookup over a flattened row: the exact path, or any nested path below
// it, which means the field holds a non-empty object.
inline FieldValue LookupFlat(const std::vector<FlatField>& fields, std::string_view path) {
  bool nested = false;
  for (const auto& [p, v] : fields) {
    if (p == path) return FieldValue::Text(v);
    if (p.size() > path.size() && p.starts_with(path) && p[path.size()] == '.') nested = true;
  }
  return nested ? FieldValue::Object() : FieldValue::Missing();
}

namespace detail {

struct ColumnLocator {
  const Column* exact = nullptr;
  std::vector<const Column*> nested;

  FieldValue At(std::size_t row) const {
    if (exact) {
      if (auto v = exact->value(row)) return FieldValue::Text(*v);
    }
    for (const auto* c : nested) {
      if (c->value(row)) return FieldValue::Object();
    }
    return FieldValue::Missing();
  }
};

inline ColumnLocator Locate(const ColumnarBlock& block, std::string_view path) {
  ColumnLocator loc;
  for (const auto& c : block.columns) {
    const auto& name = c.name();
    if (name == path) {
      loc.exact = &c;
    } else if (name.size() > path.size() && name.starts_with(path) && name[path.size()] == '.') {
      loc.nested.push_back(&c);
    }
  }
  return loc;
}

// Verifier bound to one block's columns.
class BlockVerifier {
 public:
  BlockVerifier(const PreparedQuery& query, const ColumnarBlock& block) : query_(query) {
    for (const auto& clause : query.clauses) {
      std::vector<ColumnLocator> locs;
      for (const auto& v : clause) locs.push_back(Locate(block, v.path()));
      locators_.push_back(std::move(locs));
    }
  }

  bool operator()(std::size_t row) const {
    for (std::size_t c = 0; c < query_.clauses.size(); ++c) {
      bool any = false;
      for (std::size_t d = 0; d < query_.clauses[c].size() && !any; ++d) {
        any = query_.clauses[c][d](locators_[c][d].At(row));
      }
      if (!any) return false;
    }
    return true;
  }

 private:
  const PreparedQuery& query_;
  std::vector<std::vector<ColumnLocator>> locators_;
};

inline bool VerifyFlat(const PreparedQuery& query, const std::vector<FlatField>& fields) {
  for (const auto& clause : query.clauses) {
    bool any = false;
    for (const auto& v : clause) {
      if (v(LookupFlat(fields, v.path()))) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matching queries against the pushdown plan

struct QueryPlanInfo {
  std::vector<std::uint32_t> matched_clause_ids;  // sorted
  bool covered = false;
};

inline QueryPlanInfo MatchQuery(const Query& query, const SelectionPlan& plan) {
  std::map<std::string, std::uint32_t> ids;
  for (const auto& c : plan.selected) ids.emplace(Canonicalize(c).Serialize(), c.id);
  QueryPlanInfo info;
  for (const auto& c : query.clauses) {
    auto it = ids.find(Canonicalize(c).Serialize());
    if (it != ids.end()) info.matched_clause_ids.push_back(it->second);
  }
  std::sort(info.matched_clause_ids.begin(), info.matched_clause_ids.end());
  info.matched_clause_ids.erase(std::unique(info.matched_clause_ids.begin(), info.matched_clause_ids.end()),
                                info.matched_clause_ids.end());
  info.covered = !info.matched_clause_ids.empty();
  return info;
}

// ---------------------------------------------------------------------------
// Scans

struct RowRef {
  enum class Source : std::uint8_t { kBlock, kResidual };
  Source source = Source::kBlock;
  std::uint32_t container = 0;  // index into store.blocks() or store.residuals()
  std::uint32_t row = 0;

  friend auto operator<=>(const RowRef&, const RowRef&) = default;
};

// AND of the matched clauses' bitvectors for one block.
inline BitVector IntersectBits(const ColumnarBlock& block, const std::vector<std::uint32_t>& ids) {
  BitVector bits(block.row_count, true);
  for (auto id : ids) {
    auto it = block.bitvectors.find(id);
    if (it == block.bitvectors.end()) {
      throw Error(ErrorKind::kStoreCorruption, "block " + std::to_string(block.block_id) +
                                                   " has no bitvector for clause " + std::to_string(id));
    }
    bits &= it->second;
  }
  return bits;
}

// Candidate rows of a covered query: block rows whose intersected bit is set.
// Residuals hold no row that satisfies a pushed-down clause and are skipped.
inline std::vector<RowRef> SkippingScan(const Store& store, const QueryPlanInfo& info) {
  if (!info.covered) throw Error(ErrorKind::kValidation, "skipping scan needs a covered query");
  std::vector<RowRef> out;
  for (std::size_t b = 0; b < store.blocks().size(); ++b) {
    auto bits = IntersectBits(store.blocks()[b], info.matched_clause_ids);
    for (std::size_t r = 0; r < bits.size(); ++r) {
      if (bits.get(r)) out.push_back({RowRef::Source::kBlock, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(r)});
    }
  }
  return out;
}

// Every row of the store: block rows, then residual rows.
inline std::vector<RowRef> FullScan(const Store& store) {
  std::vector<RowRef> out;
  for (std::size_t b = 0; b < store.blocks().size(); ++b) {
    for (std::uint32_t r = 0; r < store.blocks()[b].row_count; ++r) {
      out.push_back({RowRef::Source::kBlock, static_cast<std::uint32_t>(b), r});
    }
  }
  for (std::size_t i = 0; i < store.residuals().size(); ++i) {
    for (std::size_t r = 0; r < store.residuals()[i].lines.size(); ++r) {
      out.push_back({RowRef::Source::kResidual, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(r)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// COUNT(*)

struct CountResult {
  std::uint64_t count = 0;
  std::uint64_t rows_scanned = 0;   // rows re-verified with full semantics
  std::uint64_t rows_skipped = 0;   // rows never verified
  std::uint64_t blocks_touched = 0; // blocks with at least one verified row
  std::uint64_t residual_rows_parsed = 0;
  std::uint64_t residual_rejects = 0;
  QueryPlanInfo info;
};

namespace detail {

struct PartialCount {
  std::uint64_t count = 0, scanned = 0, skipped = 0, touched = 0, parsed = 0, rejects = 0;

  void Merge(const PartialCount& o) {
    count += o.count;
    scanned += o.scanned;
    skipped += o.skipped;
    touched += o.touched;
    parsed += o.parsed;
    rejects += o.rejects;
  }
};

inline void CountBlock(const PreparedQuery& q, const ColumnarBlock& block, const QueryPlanInfo& info,
                       PartialCount& acc) {
  BlockVerifier verify(q, block);
  std::uint64_t scanned = 0;
  if (info.covered) {
    auto bits = IntersectBits(block, info.matched_clause_ids);
    for (std::size_t r = 0; r < block.row_count; ++r) {
      if (!bits.get(r)) continue;
      ++scanned;
      if (verify(r)) ++acc.count;
    }
  } else {
    for (std::size_t r = 0; r < block.row_count; ++r) {
      if (verify(r)) ++acc.count;
    }
    scanned = block.row_count;
  }
  acc.scanned += scanned;
  acc.skipped += block.row_count - scanned;
  if (scanned > 0) ++acc.touched;
}

inline void CountResidual(const PreparedQuery& q, const Residual& residual, PartialCount& acc) {
  for (const auto& line : residual.lines) {
    ++acc.scanned;
    ++acc.parsed;
    try {
      if (VerifyFlat(q, FlattenObject(line))) ++acc.count;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kValidation) throw;
      ++acc.rejects;
    }
  }
}

}  // namespace detail

// SELECT COUNT(*) WHERE <query>. Covered queries scan blocks only and verify
// the rows surviving the bitvector intersection; others scan everything.
inline CountResult ExecuteCount(const Store& store, const Query& query, const SelectionPlan& plan,
                                unsigned threads = 1) {
  auto prepared = PrepareQuery(query);
  if (store.plan_hash() != plan.Hash()) {
    throw Error(ErrorKind::kValidation, "store was loaded under a different plan");
  }
  CountResult result;
  result.info = MatchQuery(query, plan);
  const auto& blocks = store.blocks();
  const auto& residuals = store.residuals();
  const std::size_t units = blocks.size() + (result.info.covered ? 0 : residuals.size());
  auto work = [&](std::size_t i, detail::PartialCount& acc) {
    if (i < blocks.size()) {
      detail::CountBlock(prepared, blocks[i], result.info, acc);
    } else {
      detail::CountResidual(prepared, residuals[i - blocks.size()], acc);
    }
  };

  detail::PartialCount total;
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(units, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < units; ++i) work(i, total);
  } else {
    std::vector<detail::PartialCount> partial(threads);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (auto i = next++; i < units; i = next++) work(i, partial[t]);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (const auto& p : partial) total.Merge(p);
  }
  if (result.info.covered) {
    for (const auto& r : residuals) total.skipped += r.lines.size();
  }
  result.count = total.count;
  result.rows_scanned = total.scanned;
  result.rows_skipped = total.skipped;
  result.blocks_touched = total.touched;
  result.residual_rows_parsed = total.parsed;
  result.residual_rejects = total.rejects;
  return result;
}

}  // namespace pushdown
