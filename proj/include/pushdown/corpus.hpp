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

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pushdown/error.hpp"
#include "pushdown/json_text.hpp"
#include "pushdown/predicate.hpp"
#include "pushdown/workload.hpp"

namespace pushdown {

// Synthetic review-style corpus. Field values are drawn from small planted
// domains so predicate selectivities are known in advance:
//   user_id        "u%04d", 2000 values
//   business.id    "b%04d", 500 values
//   business.city  "City%03d", 200 values
//   business.state "S%02d", 20 values
//   stars          1..5
//   useful         1000..1199, cool 1000..1099, funny 1000..1049
//   text           contains keyword "kw%03d" (200 values) with probability 0.5
//   verified       true with probability 0.3
//   email          present 40%, null 10%, absent 50%
struct CorpusSpec {
  std::size_t objects = 10000;
  std::uint64_t seed = 42;
  double malformed_rate = 0.0;  // fraction of lines deliberately left invalid
};

inline constexpr std::size_t kUsers = 2000;
inline constexpr std::size_t kBusinesses = 500;
inline constexpr std::size_t kCities = 200;
inline constexpr std::size_t kStates = 20;
inline constexpr std::size_t kKeywords = 200;

namespace detail {

inline std::string Format(const char* fmt, std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, static_cast<unsigned long long>(v));
  return buf;
}

inline constexpr std::string_view kWords[] = {
    "the",     "food",   "was",     "great",   "service", "slow",    "friendly", "staff",   "would",
    "come",    "back",   "again",   "price",   "too",     "high",    "loved",    "place",   "best",
    "coffee",  "in",     "town",    "menu",    "small",   "parking", "easy",     "noisy",   "dinner",
    "lunch",   "quick",  "order",   "wrong",   "fresh",   "bread",   "sauce",    "spicy",   "sweet",
    "ok",      "nothing", "special", "visit",  "table",   "waited",  "minutes",  "clean",   "dirty",
    "patio",   "view",   "cheap",   "portion", "huge",    "tiny",    "manager",  "rude",    "polite",
    "café",    "naïve",  "crème",   "brûlée",  "jalapeño", "über"};

inline std::string MakeText(Rng& rng) {
  std::vector<std::string> words;
  const auto n = 10 + rng.Below(71);
  for (std::size_t i = 0; i < n; ++i) words.emplace_back(kWords[rng.Below(std::size(kWords))]);
  if (rng.Bernoulli(0.5)) words[rng.Below(words.size())] = Format("kw%03llu", rng.Below(kKeywords));
  if (rng.Bernoulli(0.1)) words[rng.Below(words.size())] = "\"really\"";
  if (rng.Bernoulli(0.05)) words[rng.Below(words.size())] = "back\\slash";
  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) text += ' ';
    text += words[i];
  }
  return text;
}

inline std::string MakeDate(Rng& rng) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04llu-%02llu-%02llu %02llu:%02llu:%02llu",
                static_cast<unsigned long long>(2005 + rng.Below(14)), static_cast<unsigned long long>(1 + rng.Below(12)),
                static_cast<unsigned long long>(1 + rng.Below(28)), static_cast<unsigned long long>(rng.Below(24)),
                static_cast<unsigned long long>(rng.Below(60)), static_cast<unsigned long long>(rng.Below(60)));
  return buf;
}

}  // namespace detail

// One object per call; `index` feeds the review id.
inline std::string MakeCorpusObject(Rng& rng, std::size_t index) {
  using detail::Format;
  std::string o = "{\"review_id\":" + json::Quote(Format("r%09llu", index));
  o += ",\"user_id\":" + json::Quote(Format("u%04llu", rng.Below(kUsers)));
  o += ",\"business\":{\"id\":" + json::Quote(Format("b%04llu", rng.Below(kBusinesses)));
  o += ",\"city\":" + json::Quote(Format("City%03llu", rng.Below(kCities)));
  o += ",\"state\":" + json::Quote(Format("S%02llu", rng.Below(kStates))) + "}";
  o += ",\"stars\":" + std::to_string(1 + rng.Below(5));
  o += ",\"useful\":" + std::to_string(1000 + rng.Below(200));
  o += ",\"cool\":" + std::to_string(1000 + rng.Below(100));
  o += ",\"funny\":" + std::to_string(1000 + rng.Below(50));
  o += ",\"date\":" + json::Quote(detail::MakeDate(rng));
  o += ",\"text\":" + json::Quote(detail::MakeText(rng));
  o += ",\"tags\":[";
  const auto tags = rng.Below(4);
  for (std::size_t i = 0; i < tags; ++i) o += (i ? "," : "") + json::Quote(Format("t%02llu", rng.Below(30)));
  o += "]";
  o += std::string(",\"verified\":") + (rng.Bernoulli(0.3) ? "true" : "false");
  const double e = rng.Uniform();
  if (e < 0.4) {
    o += ",\"email\":" + json::Quote(Format("user%llu@example.com", rng.Below(100000)));
  } else if (e < 0.5) {
    o += ",\"email\":null";
  }
  o += "}";
  return o;
}

// Writes `spec.objects` lines; returns the number of bytes written.
inline std::size_t GenerateCorpus(std::ostream& out, const CorpusSpec& spec) {
  Rng rng(SplitMix64(spec.seed));
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < spec.objects; ++i) {
    auto line = MakeCorpusObject(rng, i);
    if (spec.malformed_rate > 0 && rng.Bernoulli(spec.malformed_rate)) line.resize(line.size() / 2);
    line += '\n';
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    bytes += line.size();
  }
  if (!out) throw Error(ErrorKind::kIo, "write failure while generating corpus");
  return bytes;
}

// ---------------------------------------------------------------------------
// Predicate pools over the corpus above

namespace detail {

inline ConjunctiveClause Single(SimplePredicate p, double selectivity) {
  ConjunctiveClause c;
  c.disjuncts.push_back(std::move(p));
  c.selectivity = selectivity;
  return Canonicalize(std::move(c));
}

// Spreads `count` picks over [0, domain) deterministically.
inline std::uint64_t Spread(std::size_t i, std::size_t count, std::size_t domain) {
  return (i * domain / count + (i * 7) % std::max<std::size_t>(1, domain / count)) % domain;
}

}  // namespace detail

// "selective": 100 low-selectivity predicates (combined match fraction about
// 0.27). "broad": a wider mix of kinds and selectivities.
inline PoolSpec MakePool(std::string_view profile) {
  using detail::Format;
  using detail::Single;
  using detail::Spread;
  PoolSpec pool;
  auto add = [&pool](std::string name) -> std::vector<ConjunctiveClause>& {
    pool.templates.push_back({std::move(name), {}});
    return pool.templates.back().candidates;
  };
  if (profile == "selective") {
    auto& users = add("user_id = ?");
    for (std::size_t i = 0; i < 30; ++i) {
      users.push_back(Single(SimplePredicate::Eq("user_id", Format("u%04llu", Spread(i, 30, kUsers))), 1.0 / kUsers));
    }
    auto& biz = add("business.id = ?");
    for (std::size_t i = 0; i < 20; ++i) {
      biz.push_back(
          Single(SimplePredicate::Eq("business.id", Format("b%04llu", Spread(i, 20, kBusinesses))), 1.0 / kBusinesses));
    }
    auto& city = add("business.city = ?");
    for (std::size_t i = 0; i < 15; ++i) {
      city.push_back(
          Single(SimplePredicate::Eq("business.city", Format("City%03llu", Spread(i, 15, kCities))), 1.0 / kCities));
    }
    auto& useful = add("useful = ?");
    for (std::size_t i = 0; i < 20; ++i) {
      useful.push_back(Single(
          SimplePredicate::KeyValue("useful", Literal::Number(std::to_string(1000 + Spread(i, 20, 200)))), 1.0 / 200));
    }
    auto& kw = add("text LIKE ?");
    for (std::size_t i = 0; i < 15; ++i) {
      kw.push_back(Single(SimplePredicate::Like("text", Format("%%kw%03llu%%", Spread(i, 15, kKeywords))),
                          0.5 / kKeywords));
    }
    return pool;
  }
  if (profile == "broad") {
    auto& stars = add("stars = ?");
    for (int s = 1; s <= 5; ++s) {
      stars.push_back(Single(SimplePredicate::KeyValue("stars", Literal::Number(std::to_string(s))), 0.2));
    }
    auto& state = add("business.state = ?");
    for (std::size_t i = 0; i < kStates; ++i) {
      state.push_back(Single(SimplePredicate::Eq("business.state", Format("S%02llu", i)), 1.0 / kStates));
    }
    auto& verified = add("verified = ?");
    verified.push_back(Single(SimplePredicate::KeyValue("verified", Literal::Boolean(true)), 0.3));
    verified.push_back(Single({"verified", PredicateOp::kExactString, Literal::Boolean(false)}, 0.7));
    add("email IS NOT NULL").push_back(Single(SimplePredicate::Present("email"), 0.4));
    auto& year = add("date LIKE 'YYYY-%'");
    for (std::size_t y = 2005; y <= 2018; ++y) {
      year.push_back(Single(SimplePredicate::Like("date", Format("%llu-%%", y)), 1.0 / 14));
    }
    auto& month = add("date LIKE '%-MM-%'");
    for (std::size_t m = 1; m <= 12; ++m) {
      month.push_back(Single(SimplePredicate::Like("date", Format("%%-%02llu-%%", m)), 1.0 / 12));
    }
    auto& users = add("user_id IN (?, ?, ?)");
    for (std::size_t i = 0; i < 10; ++i) {
      ConjunctiveClause c;
      for (std::size_t k = 0; k < 3; ++k) {
        c.disjuncts.push_back(SimplePredicate::Eq("user_id", Format("u%04llu", Spread(i * 3 + k, 30, kUsers))));
      }
      c.selectivity = 3.0 / kUsers;
      users.push_back(Canonicalize(std::move(c)));
    }
    auto& funny = add("funny = ?");
    for (std::size_t i = 0; i < 10; ++i) {
      funny.push_back(Single(SimplePredicate::KeyValue("funny", Literal::Number(std::to_string(1000 + i * 5))), 0.02));
    }
    auto& cool = add("cool = ?");
    for (std::size_t i = 0; i < 10; ++i) {
      cool.push_back(Single(SimplePredicate::KeyValue("cool", Literal::Number(std::to_string(1000 + i * 10))), 0.01));
    }
    auto& city = add("business.city = ?");
    for (std::size_t i = 0; i < 10; ++i) {
      city.push_back(
          Single(SimplePredicate::Eq("business.city", Format("City%03llu", Spread(i, 10, kCities))), 1.0 / kCities));
    }
    auto& kw = add("text LIKE ?");
    for (std::size_t i = 0; i < 10; ++i) {
      kw.push_back(Single(SimplePredicate::Like("text", Format("%%kw%03llu%%", Spread(i, 10, kKeywords))),
                          0.5 / kKeywords));
    }
    return pool;
  }
  throw Error(ErrorKind::kValidation, "unknown pool profile '" + std::string(profile) + "'");
}

}  // namespace pushdown
