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

#include <fstream>
#include <random>
#include <sstream>

#include "pushdown/client_filter.hpp"
#include "pushdown/predicate_text.hpp"
#include "test_support.hpp"

namespace pushdown {
namespace {

using testing::TempDir;

CompiledClause Compiled(std::string_view text, std::uint32_t id = 0) {
  auto c = ParseClauseText(text);
  c.id = id;
  return CompileClause(c);
}

TEST(MatchPattern, Substring) {
  EXPECT_TRUE(MatchPattern(R"({"name":"Bob","age":22})", CompiledPattern::Substring("\"Bob\"")));
  EXPECT_FALSE(MatchPattern(R"({"name":"Alice"})", CompiledPattern::Substring("\"Bob\"")));
}

TEST(MatchPattern, ExactMatchAllowsFalsePositiveOnOtherKey) {
  auto clause = Compiled(R"(name = "Bob")");
  EXPECT_TRUE(EvaluateClause(R"({"nickname":"Bob"})", clause));
}

TEST(MatchPattern, KeyValueSpanStopsAtCommaOrBrace) {
  auto p = CompiledPattern::KeyThenValue("\"age\"", "10");
  EXPECT_TRUE(MatchPattern(R"({"age":10,"x":1})", p));
  EXPECT_TRUE(MatchPattern(R"({"x":1,"age":10})", p));  // last pair ends at '}'
  EXPECT_FALSE(MatchPattern(R"({"age":7,"y":10})", p));
  EXPECT_TRUE(MatchPattern(R"({"age":100})", p));        // permitted false positive
  EXPECT_TRUE(MatchPattern(R"({"age" : 10 })", p));
  // Every occurrence of the key is tried, not only the first.
  EXPECT_TRUE(MatchPattern(R"({"o":{"age":3},"age":10})", p));
  EXPECT_FALSE(MatchPattern(R"({"agex":10})", p));
}

TEST(EvaluateClause, Disjunction) {
  auto in_list = Compiled(R"(name in ("Bob", "John"))");
  EXPECT_TRUE(EvaluateClause(R"({"name":"John"})", in_list));
  EXPECT_FALSE(EvaluateClause(R"({"name":"Al"})", in_list));
  CompiledClause empty;
  EXPECT_FALSE(EvaluateClause(R"({"name":"John"})", empty));
}

TEST(EvaluateClause, KeyValueFalsePositiveIsNotFalseNegative) {
  auto clause = Compiled("age = 10");
  std::string obj = R"({"age":100})";
  EXPECT_TRUE(EvaluateClause(obj, clause));
  EXPECT_FALSE(testing::OracleClause(nlohmann::json::parse(obj), ParseClauseText("age = 10")));
}

std::vector<std::pair<std::size_t, ChunkBitvectors>> Filter(const std::string& input,
                                                            const std::vector<CompiledClause>& clauses,
                                                            std::size_t chunk_size, unsigned threads = 1) {
  std::istringstream in(input);
  std::vector<std::pair<std::size_t, ChunkBitvectors>> out;
  std::uint32_t expect_index = 0;
  FilterStream(
      in, clauses, chunk_size,
      [&](Chunk&& c, ChunkBitvectors&& bv) {
        EXPECT_EQ(c.index, expect_index++);
        out.emplace_back(c.count(), std::move(bv));
      },
      threads);
  return out;
}

TEST(FilterStream, ChunkSizes) {
  std::string input;
  for (int i = 0; i < 2500; ++i) input += "{\"i\":" + std::to_string(i) + "}\n";
  auto chunks = Filter(input, {Compiled("i = 7")}, 1000);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].first, 1000u);
  EXPECT_EQ(chunks[1].first, 1000u);
  EXPECT_EQ(chunks[2].first, 500u);
  for (const auto& [n, bv] : chunks) {
    EXPECT_EQ(bv.object_count, n);
    for (const auto& [id, bits] : bv.entries) EXPECT_EQ(bits.size(), n);
  }
}

TEST(FilterStream, EmptyPlanAndEmptyInput) {
  auto chunks = Filter("{\"a\":1}\n{\"a\":2}\n", {}, 1000);
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_TRUE(chunks[0].second.entries.empty());
  EXPECT_TRUE(Filter("", {Compiled("a = 1")}, 10).empty());
  EXPECT_TRUE(Filter("\n  \n", {Compiled("a = 1")}, 10).empty());
}

TEST(FilterStream, ThreeTupleChunk) {
  std::string input =
      R"({"name":"Alice","age":30})"
      "\n"
      R"({"name":"Carol","age":22})"
      "\n"
      R"({"name":"Bob","age":22})"
      "\n";
  auto chunks = Filter(input, {Compiled(R"(name = "Bob")", 1)}, 1000);
  ASSERT_EQ(chunks.size(), 1u);
  const auto& bits = chunks[0].second.entries.at(1);
  EXPECT_FALSE(bits.get(0));
  EXPECT_FALSE(bits.get(1));
  EXPECT_TRUE(bits.get(2));
}

TEST(FilterStream, BlankLinesAreNotObjects) {
  auto chunks = Filter("{\"a\":1}\n\n   \n{\"a\":2}\n", {Compiled("a = 2")}, 1000);
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].first, 2u);
  EXPECT_TRUE(chunks[0].second.entries.at(0).get(1));
}

TEST(FilterStream, DeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(11);
  std::string input;
  for (int i = 0; i < 3000; ++i) input += testing::RandomObject(rng).dump() + "\n";
  std::vector<CompiledClause> clauses = {Compiled(R"(name = "Bob")", 0), Compiled("age = 10", 1),
                                         Compiled("tags IS NOT NULL", 2)};
  auto one = Filter(input, clauses, 128, 1);
  auto four = Filter(input, clauses, 128, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].second, four[i].second);
}

ChunkBitvectors RandomBitvectors(std::mt19937_64& rng) {
  ChunkBitvectors bv;
  bv.object_count = static_cast<std::uint32_t>(rng() % 50);
  auto entries = rng() % 5;
  for (std::size_t e = 0; e < entries; ++e) {
    BitVector bits(bv.object_count);
    for (std::uint32_t i = 0; i < bv.object_count; ++i) bits.set(i, rng() & 1);
    bv.entries.emplace(static_cast<std::uint32_t>(rng() % 100), std::move(bits));
  }
  return bv;
}

TEST(Bitvectors, Layout) {
  ChunkBitvectors bv;
  bv.object_count = 3;
  BitVector bits(3);
  bits.set(2);
  bv.entries.emplace(1, bits);
  auto enc = EncodeBitvectors(bv);
  std::string expect = "CBV1";
  expect += std::string("\x01\x00\x00\x00", 4);  // entries
  expect += std::string("\x03\x00\x00\x00", 4);  // objects
  expect += std::string("\x01\x00\x00\x00", 4);  // clause id
  expect += std::string("\x04", 1);
  EXPECT_EQ(enc, expect);
}

TEST(Bitvectors, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    auto bv = RandomBitvectors(rng);
    EXPECT_EQ(DecodeBitvectors(EncodeBitvectors(bv)), bv);
  }
}

TEST(Bitvectors, Corruption) {
  ChunkBitvectors bv;
  bv.object_count = 3;
  bv.entries.emplace(0, BitVector(3, true));
  auto enc = EncodeBitvectors(bv);
  auto kind = [](const std::string& s) {
    try {
      DecodeBitvectors(s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kUsage;
  };
  EXPECT_EQ(kind("XBV1" + enc.substr(4)), ErrorKind::kBadMagic);
  EXPECT_EQ(kind(enc.substr(0, enc.size() - 1)), ErrorKind::kTruncated);
  EXPECT_EQ(kind(enc.substr(0, 2)), ErrorKind::kTruncated);
  EXPECT_EQ(kind(enc + "x"), ErrorKind::kCorrupt);
  auto padded = enc;
  padded.back() = '\xFF';
  EXPECT_EQ(kind(padded), ErrorKind::kCorrupt);
}

TEST(ChunkFiles, WriteReadAndChecksum) {
  TempDir dir("chunks");
  auto clause = Compiled(R"(name = "Bob")");
  ChunkWriter writer(dir.path(), "hash", 2);
  std::istringstream in("{\"name\":\"Bob\"}\n{\"name\":\"Al\"}\n{\"name\":\"Bob\"}\n");
  FilterStream(in, {clause}, 2, [&](Chunk&& c, ChunkBitvectors&& bv) { writer.Write(c, bv); });
  auto manifest = writer.Commit();
  ASSERT_EQ(manifest.chunks.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir / "chunk-000000.ndjson"));
  EXPECT_TRUE(std::filesystem::exists(dir / "chunk-000001.bv"));
  auto loaded = LoadManifest(dir.path());
  EXPECT_EQ(loaded.plan_hash, "hash");
  EXPECT_EQ(loaded.total_objects(), 3u);
  auto [chunk, bits] = ReadChunk(dir.path(), loaded.chunks[0]);
  EXPECT_EQ(chunk.objects[1], "{\"name\":\"Al\"}");
  EXPECT_TRUE(bits.entries.at(0).get(0));
  EXPECT_FALSE(bits.entries.at(0).get(1));

  {
    std::ofstream f(dir / "chunk-000001.bv", std::ios::binary | std::ios::trunc);
    f << "CBV1garbage";
  }
  try {
    ReadChunk(dir.path(), loaded.chunks[1]);
    FAIL() << "expected checksum mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kChecksumMismatch);
  }
}

TEST(ChunkFiles, UncommittedWriterCleansUp) {
  TempDir dir("cleanup");
  {
    ChunkWriter writer(dir.path(), "hash", 10);
    Chunk c;
    c.objects = {"{}"};
    writer.Write(c, EvaluateChunk(c, {}));
    EXPECT_TRUE(std::filesystem::exists(dir / "chunk-000000.ndjson"));
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "chunk-000000.ndjson"));
  EXPECT_FALSE(std::filesystem::exists(dir / "manifest.json"));
}

TEST(MeasureFilterCost, MatchFraction) {
  std::vector<std::string> sample(200, R"({"name":"Bob"})");
  EXPECT_DOUBLE_EQ(MeasureFilterCost(sample, Compiled("name IS NOT NULL")).match_fraction, 1.0);
  EXPECT_DOUBLE_EQ(MeasureFilterCost(sample, Compiled(R"(name = "Zed")")).match_fraction, 0.0);
  EXPECT_THROW(MeasureFilterCost({}, Compiled("name IS NOT NULL")), Error);
}

TEST(MeasureFilterCost, GrowsWithObjectLength) {
  std::mt19937_64 rng(1);
  auto make = [&](std::size_t len) {
    std::vector<std::string> out;
    for (int i = 0; i < 2000; ++i) {
      std::string body(len, ' ');
      for (auto& c : body) c = static_cast<char>('a' + rng() % 26);
      out.push_back("{\"f\":\"" + body + "\"}");
    }
    return out;
  };
  auto clause = Compiled(R"(f LIKE "%qqqqzz%")");
  auto short_cost = MeasureFilterCost(make(100), clause, 7).us_per_object;
  auto long_cost = MeasureFilterCost(make(1000), clause, 7).us_per_object;
  EXPECT_GT(long_cost, short_cost);
}

TEST(NoFalseNegatives, RandomPairs) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    auto doc = testing::RandomObject(rng);
    auto pred = testing::RandomPredicate(doc, static_cast<int>(i % 4), rng);
    if (!pred) continue;
    std::vector<CompiledPattern> patterns;
    try {
      patterns = Compile(*pred);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    auto line = doc.dump();
    if (testing::OracleMatch(doc, *pred)) {
      CompiledClause c;
      c.disjuncts.push_back({*pred, patterns});
      ASSERT_TRUE(EvaluateClause(line, c)) << line << " " << pred->Serialize();
    }
  }
  EXPECT_GT(checked, 15000);
}

}  // namespace
}  // namespace pushdown
