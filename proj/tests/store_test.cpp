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

#include <random>
#include <sstream>

#include "pushdown/optimizer.hpp"
#include "pushdown/predicate_text.hpp"
#include "pushdown/store.hpp"
#include "test_support.hpp"

namespace pushdown {
namespace {

Chunk MakeChunk(std::uint32_t index, std::vector<std::string> objects) {
  Chunk c;
  c.index = index;
  c.objects = std::move(objects);
  return c;
}

BitVector Bits(std::initializer_list<int> values) {
  BitVector b;
  for (int v : values) b.push_back(v != 0);
  return b;
}

SelectionPlan PlanOf(std::initializer_list<const char*> clauses) {
  SelectionPlan plan;
  std::uint32_t id = 0;
  for (const auto* text : clauses) {
    auto c = ParseClauseText(text);
    c.id = id++;
    plan.selected.push_back(c);
  }
  plan.budget = 1;
  return plan;
}

TEST(PartialLoad, LoadsOnlyMarkedRows) {
  auto chunk = MakeChunk(0, {R"({"name":"Alice","age":30})", R"({"name":"Carol","age":22})",
                             R"({"name":"Bob","age":22})"});
  ChunkBitvectors bv;
  bv.object_count = 3;
  bv.entries.emplace(0, Bits({0, 0, 1}));
  auto r = PartialLoad(chunk, bv);
  ASSERT_TRUE(r.block.has_value());
  EXPECT_EQ(r.block->row_count, 1u);
  EXPECT_EQ(r.block->FindColumn("name")->value(0), "\"Bob\"");
  EXPECT_EQ(r.block->origin_rows, std::vector<std::uint32_t>{2});
  EXPECT_EQ(r.block->bitvectors.at(0), Bits({1}));
  ASSERT_TRUE(r.residual.has_value());
  EXPECT_EQ(r.residual->lines.size(), 2u);
  EXPECT_EQ(r.residual->lines[0], chunk.objects[0]);
}

TEST(PartialLoad, UnionOfClauses) {
  auto chunk = MakeChunk(0, {"{\"a\":1}", "{\"a\":2}", "{\"a\":3}", "{\"a\":4}"});
  ChunkBitvectors bv;
  bv.object_count = 4;
  bv.entries.emplace(0, Bits({1, 0, 0, 0}));
  bv.entries.emplace(1, Bits({0, 0, 1, 0}));
  auto r = PartialLoad(chunk, bv);
  EXPECT_EQ(r.loaded_rows(), 2u);
  EXPECT_EQ(r.block->bitvectors.at(0), Bits({1, 0}));
  EXPECT_EQ(r.block->bitvectors.at(1), Bits({0, 1}));
}

TEST(PartialLoad, AllZeroChunkProducesNoBlock) {
  auto chunk = MakeChunk(4, {"{\"a\":1}", "{\"a\":2}"});
  ChunkBitvectors bv;
  bv.object_count = 2;
  bv.entries.emplace(0, Bits({0, 0}));
  auto r = PartialLoad(chunk, bv);
  EXPECT_FALSE(r.block.has_value());
  EXPECT_EQ(r.residual_rows(), 2u);
}

TEST(PartialLoad, EmptyPlanLoadsEverything) {
  auto chunk = MakeChunk(0, {"{\"a\":1}", "{\"a\":2}"});
  ChunkBitvectors bv;
  bv.object_count = 2;
  auto r = PartialLoad(chunk, bv);
  EXPECT_EQ(r.loaded_rows(), 2u);
  EXPECT_FALSE(r.residual.has_value());
}

TEST(PartialLoad, MalformedMarkedRowIsRejected) {
  auto chunk = MakeChunk(2, {"{\"a\":1}", "{\"a\":", "{\"a\":3}"});
  ChunkBitvectors bv;
  bv.object_count = 3;
  auto r = PartialLoad(chunk, bv);
  EXPECT_EQ(r.loaded_rows(), 2u);
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].offset, 1u);
  EXPECT_EQ(r.rejects[0].chunk_index, 2u);
  EXPECT_EQ(r.block->origin_rows, (std::vector<std::uint32_t>{0, 2}));
}

TEST(PartialLoad, BitvectorLengthMismatch) {
  auto chunk = MakeChunk(0, {"{}"});
  ChunkBitvectors bv;
  bv.object_count = 2;
  bv.entries.emplace(0, Bits({0, 1}));
  EXPECT_THROW(PartialLoad(chunk, bv), Error);
}

TEST(PartialLoad, PartitionIsComplete) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> lines;
    auto n = rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      auto line = testing::RandomObject(rng).dump();
      if (rng() % 10 == 0) line = line.substr(0, line.size() / 2);
      lines.push_back(line);
    }
    auto chunk = MakeChunk(0, lines);
    ChunkBitvectors bv;
    bv.object_count = static_cast<std::uint32_t>(n);
    auto clauses = rng() % 3;
    for (std::size_t c = 0; c < clauses; ++c) {
      BitVector b(n);
      for (std::size_t i = 0; i < n; ++i) b.set(i, rng() % 3 == 0);
      bv.entries.emplace(static_cast<std::uint32_t>(c), b);
    }
    auto r = PartialLoad(chunk, bv);
    EXPECT_EQ(r.loaded_rows() + r.residual_rows() + r.rejects.size(), n);
    // Residual rows are exactly the rows with no bit set, in order.
    std::vector<std::string> expect_residual;
    for (std::size_t i = 0; i < n; ++i) {
      bool any = clauses == 0;
      for (const auto& [id, b] : bv.entries) any = any || b.get(i);
      if (!any) expect_residual.push_back(lines[i]);
    }
    EXPECT_EQ(r.residual ? r.residual->lines : std::vector<std::string>{}, expect_residual);
  }
}

Store BuildStore(const SelectionPlan& plan, const std::string& input, std::size_t chunk_size) {
  auto store = Store::ForPlan(plan);
  std::istringstream in(input);
  FilterStream(in, plan.Compile(), chunk_size, [&](Chunk&& c, ChunkBitvectors&& bv) {
    auto r = PartialLoad(c, bv);
    store.Add(c, std::move(r));
  });
  return store;
}

TEST(Store, SaveOpenRoundTrip) {
  auto plan = PlanOf({R"(name = "Bob")"});
  std::string input = "{\"name\":\"Bob\"}\n{\"name\":\"Al\"}\n{\"name\":\n{\"name\":\"Bob\",\"x\":1}\n";
  auto store = BuildStore(plan, input, 2);
  EXPECT_EQ(store.total_rows(), 4u);
  EXPECT_EQ(store.loaded_rows(), 2u);
  EXPECT_DOUBLE_EQ(store.loading_ratio(), 0.5);
  testing::TempDir dir("store");
  store.Save(dir.path());
  auto reopened = Store::Open(dir.path());
  EXPECT_EQ(reopened.plan_hash(), plan.Hash());
  EXPECT_EQ(reopened.clause_ids(), store.clause_ids());
  EXPECT_EQ(reopened.blocks(), store.blocks());
  ASSERT_EQ(reopened.residuals().size(), store.residuals().size());
  for (std::size_t i = 0; i < store.residuals().size(); ++i) {
    EXPECT_EQ(reopened.residuals()[i].lines, store.residuals()[i].lines);
  }
  EXPECT_EQ(reopened.total_rows(), 4u);
  EXPECT_EQ(reopened.loaded_rows(), 2u);
}

TEST(Store, RejectsPersist) {
  auto plan = PlanOf({});
  auto store = BuildStore(plan, "{\"a\":1}\n{\"a\":\n", 10);
  ASSERT_EQ(store.rejects().size(), 1u);
  testing::TempDir dir("rej");
  store.Save(dir.path());
  auto reopened = Store::Open(dir.path());
  ASSERT_EQ(reopened.rejects().size(), 1u);
  EXPECT_EQ(reopened.rejects()[0].raw, "{\"a\":");
  EXPECT_EQ(reopened.rejects()[0].offset, 1u);
  EXPECT_TRUE(std::filesystem::exists(dir / "rejects/chunk-000000.ndjson"));
}

TEST(Store, OpenDetectsMissingBlock) {
  auto plan = PlanOf({});
  auto store = BuildStore(plan, "{\"a\":1}\n", 10);
  testing::TempDir dir("missing");
  store.Save(dir.path());
  std::filesystem::remove(dir / "blocks/chunk-000000.blk");
  EXPECT_THROW(Store::Open(dir.path()), Error);
  EXPECT_THROW(Store::Open(dir / "nowhere"), Error);
}

TEST(Store, AddChecksPartition) {
  auto store = Store::ForPlan(PlanOf({}));
  LoadResult bogus;
  EXPECT_THROW(store.Add(MakeChunk(0, {"{}"}), std::move(bogus)), Error);
}

TEST(LoadChunkDirectory, PlanHashMustMatch) {
  auto plan = PlanOf({R"(a = "x")"});
  testing::TempDir dir("chunks");
  {
    ChunkWriter w(dir.path(), plan.Hash(), 10);
    std::istringstream in("{\"a\":\"x\"}\n{\"a\":\"y\"}\n");
    FilterStream(in, plan.Compile(), 10, [&](Chunk&& c, ChunkBitvectors&& bv) { w.Write(c, bv); });
    w.Commit();
  }
  auto store = LoadChunkDirectory(dir.path(), plan);
  EXPECT_EQ(store.loaded_rows(), 1u);
  auto other = PlanOf({R"(a = "z")"});
  EXPECT_THROW(LoadChunkDirectory(dir.path(), other), Error);
}

}  // namespace
}  // namespace pushdown
