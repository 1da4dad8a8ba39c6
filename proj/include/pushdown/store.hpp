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

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pushdown/binary_io.hpp"
#include "pushdown/bitvector.hpp"
#include "pushdown/block.hpp"
#include "pushdown/client_filter.hpp"
#include "pushdown/error.hpp"
#include "pushdown/plan.hpp"
#include "pushdown/workload_io.hpp"

namespace pushdown {

// Raw lines of a chunk's unloaded objects, in original order.
struct Residual {
  std::uint32_t chunk_index = 0;
  std::vector<std::string> lines;
};

struct RejectedRow {
  std::uint32_t chunk_index = 0;
  std::uint32_t offset = 0;  // row within the chunk
  std::string raw;
  std::string reason;
};

struct LoadResult {
  std::optional<ColumnarBlock> block;
  std::optional<Residual> residual;
  std::vector<RejectedRow> rejects;

  std::size_t loaded_rows() const { return block ? block->row_count : 0; }
  std::size_t residual_rows() const { return residual ? residual->lines.size() : 0; }
};

// Loads the rows whose bits are set for at least one pushed-down clause and
// leaves the rest raw. With no pushed-down clauses everything is loaded.
inline LoadResult PartialLoad(const Chunk& chunk, const ChunkBitvectors& bitvectors) {
  for (const auto& [id, bits] : bitvectors.entries) {
    if (bits.size() != chunk.count()) {
      throw Error(ErrorKind::kValidation, "bitvector for clause " + std::to_string(id) + " has " +
                                              std::to_string(bits.size()) + " bits for " +
                                              std::to_string(chunk.count()) + " objects");
    }
  }
  BitVector load(chunk.count(), bitvectors.entries.empty());
  for (const auto& [id, bits] : bitvectors.entries) load |= bits;

  LoadResult result;
  BlockBuilder builder(chunk.index, chunk.index);
  std::vector<std::size_t> loaded;
  for (std::size_t i = 0; i < chunk.count(); ++i) {
    if (!load.get(i)) {
      if (!result.residual) result.residual = Residual{chunk.index, {}};
      result.residual->lines.push_back(chunk.objects[i]);
      continue;
    }
    try {
      builder.AddRow(FlattenObject(chunk.objects[i]), static_cast<std::uint32_t>(i));
      loaded.push_back(i);
    } catch (const Error& e) {
      result.rejects.push_back({chunk.index, static_cast<std::uint32_t>(i), chunk.objects[i], e.what()});
    }
  }
  if (!loaded.empty()) {
    std::map<std::uint32_t, BitVector> reindexed;
    for (const auto& [id, bits] : bitvectors.entries) {
      BitVector out(loaded.size());
      for (std::size_t r = 0; r < loaded.size(); ++r) out.set(r, bits.get(loaded[r]));
      reindexed.emplace(id, std::move(out));
    }
    result.block = std::move(builder).Finish(std::move(reindexed));
  }
  return result;
}

struct ChunkLedgerEntry {
  std::uint32_t chunk_index = 0;
  std::uint32_t count = 0;
  std::uint32_t loaded = 0;
  std::uint32_t residual = 0;
  std::uint32_t rejected = 0;
};

// Blocks, residuals and rejects for one plan. Immutable once built; queries
// read it as a snapshot.
class Store {
 public:
  Store() = default;
  Store(std::string plan_hash, std::vector<std::uint32_t> clause_ids)
      : plan_hash_(std::move(plan_hash)), clause_ids_(std::move(clause_ids)) {}

  static Store ForPlan(const SelectionPlan& plan) {
    std::vector<std::uint32_t> ids;
    for (const auto& c : plan.selected) ids.push_back(c.id);
    return Store(plan.Hash(), std::move(ids));
  }

  void Add(const Chunk& chunk, LoadResult&& result) {
    ChunkLedgerEntry entry{chunk.index, static_cast<std::uint32_t>(chunk.count()),
                           static_cast<std::uint32_t>(result.loaded_rows()),
                           static_cast<std::uint32_t>(result.residual_rows()),
                           static_cast<std::uint32_t>(result.rejects.size())};
    if (entry.loaded + entry.residual + entry.rejected != entry.count) {
      throw Error(ErrorKind::kStoreCorruption, "chunk partition does not add up");
    }
    ledger_.push_back(entry);
    if (result.block) blocks_.push_back(std::move(*result.block));
    if (result.residual) residuals_.push_back(std::move(*result.residual));
    for (auto& r : result.rejects) rejects_.push_back(std::move(r));
  }

  const std::string& plan_hash() const { return plan_hash_; }
  const std::vector<std::uint32_t>& clause_ids() const { return clause_ids_; }
  const std::vector<ColumnarBlock>& blocks() const { return blocks_; }
  const std::vector<Residual>& residuals() const { return residuals_; }
  const std::vector<RejectedRow>& rejects() const { return rejects_; }
  const std::vector<ChunkLedgerEntry>& ledger() const { return ledger_; }

  std::size_t total_rows() const {
    std::size_t n = 0;
    for (const auto& e : ledger_) n += e.count;
    return n;
  }
  std::size_t loaded_rows() const {
    std::size_t n = 0;
    for (const auto& e : ledger_) n += e.loaded;
    return n;
  }
  double loading_ratio() const {
    return total_rows() == 0 ? 1.0 : static_cast<double>(loaded_rows()) / static_cast<double>(total_rows());
  }

  // store/blocks/*.blk, store/residual/*.ndjson, store/rejects/*.ndjson,
  // store/meta.json. meta.json is written last and marks the store complete.
  void Save(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "blocks");
    fs::create_directories(dir / "residual");
    fs::create_directories(dir / "rejects");
    for (const auto& b : blocks_) WriteBlock(b, dir / "blocks" / (ChunkStem(b.origin_chunk) + ".blk"));
    for (const auto& r : residuals_) {
      std::string text;
      for (const auto& l : r.lines) text += l + "\n";
      io::WriteFileAtomic(dir / "residual" / (ChunkStem(r.chunk_index) + ".ndjson"), text);
    }
    std::map<std::uint32_t, std::string> reject_files;
    for (const auto& r : rejects_) {
      nlohmann::json j = {{"offset", r.offset}, {"reason", r.reason}, {"raw", r.raw}};
      reject_files[r.chunk_index] += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    }
    for (const auto& [chunk, text] : reject_files) {
      io::WriteFileAtomic(dir / "rejects" / (ChunkStem(chunk) + ".ndjson"), text);
    }
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& e : ledger_) {
      chunks.push_back({{"chunk", e.chunk_index},
                        {"count", e.count},
                        {"loaded", e.loaded},
                        {"residual", e.residual},
                        {"rejected", e.rejected}});
    }
    nlohmann::json meta = {{"version", 1},
                           {"plan_hash", plan_hash_},
                           {"clause_ids", clause_ids_},
                           {"total_rows", total_rows()},
                           {"loaded_rows", loaded_rows()},
                           {"chunks", chunks}};
    WriteJsonFile(dir / "meta.json", meta);
  }

  static Store Open(const std::filesystem::path& dir) {
    auto meta = ReadJsonFile(dir / "meta.json");
    Store store;
    try {
      store.plan_hash_ = meta.at("plan_hash").get<std::string>();
      store.clause_ids_ = meta.at("clause_ids").get<std::vector<std::uint32_t>>();
      for (const auto& c : meta.at("chunks")) {
        store.ledger_.push_back({c.at("chunk").get<std::uint32_t>(), c.at("count").get<std::uint32_t>(),
                                 c.at("loaded").get<std::uint32_t>(), c.at("residual").get<std::uint32_t>(),
                                 c.at("rejected").get<std::uint32_t>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kStoreCorruption, std::string("bad meta.json: ") + e.what());
    }
    for (const auto& e : store.ledger_) {
      auto stem = ChunkStem(e.chunk_index);
      if (e.loaded > 0) {
        auto block = ReadBlock(dir / "blocks" / (stem + ".blk"));
        if (block.row_count != e.loaded) throw Error(ErrorKind::kStoreCorruption, stem + ".blk row count mismatch");
        store.blocks_.push_back(std::move(block));
      }
      if (e.residual > 0) {
        auto chunk = ParseChunkLines(e.chunk_index, io::ReadFile(dir / "residual" / (stem + ".ndjson")));
        if (chunk.count() != e.residual) throw Error(ErrorKind::kStoreCorruption, stem + " residual count mismatch");
        store.residuals_.push_back({e.chunk_index, std::move(chunk.objects)});
      }
      if (e.rejected > 0) {
        auto lines = ParseChunkLines(e.chunk_index, io::ReadFile(dir / "rejects" / (stem + ".ndjson")));
        if (lines.count() != e.rejected) throw Error(ErrorKind::kStoreCorruption, stem + " reject count mismatch");
        for (const auto& l : lines.objects) {
          try {
            auto j = nlohmann::json::parse(l);
            store.rejects_.push_back({e.chunk_index, j.at("offset").get<std::uint32_t>(), j.at("raw").get<std::string>(),
                                      j.at("reason").get<std::string>()});
          } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorKind::kStoreCorruption, stem + " bad reject record: " + ex.what());
          }
        }
      }
    }
    return store;
  }

 private:
  std::string plan_hash_;
  std::vector<std::uint32_t> clause_ids_;
  std::vector<ColumnarBlock> blocks_;
  std::vector<Residual> residuals_;
  std::vector<RejectedRow> rejects_;
  std::vector<ChunkLedgerEntry> ledger_;
};

// Loads every chunk of a chunk directory into a store.
inline Store LoadChunkDirectory(const std::filesystem::path& chunk_dir, const SelectionPlan& plan) {
  auto manifest = LoadManifest(chunk_dir);
  if (manifest.plan_hash != plan.Hash()) {
    throw Error(ErrorKind::kValidation, "chunks were filtered with a different plan");
  }
  auto store = Store::ForPlan(plan);
  for (const auto& entry : manifest.chunks) {
    auto [chunk, bits] = ReadChunk(chunk_dir, entry);
    auto result = PartialLoad(chunk, bits);
    store.Add(chunk, std::move(result));
  }
  return store;
}

}  // namespace pushdown
