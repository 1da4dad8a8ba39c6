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

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pushdown/binary_io.hpp"
#include "pushdown/bitvector.hpp"
#include "pushdown/error.hpp"
#include "pushdown/json_text.hpp"
#include "pushdown/plan.hpp"
#include "pushdown/predicate.hpp"

namespace pushdown {

inline constexpr std::size_t kDefaultChunkSize = 1000;

// ---------------------------------------------------------------------------
// Raw-text matching

inline bool MatchPattern(std::string_view object, const CompiledPattern& pattern) {
  if (pattern.mode == MatchMode::kFindSubstring) {
    return object.find(pattern.pattern_a) != std::string_view::npos;
  }
  const auto& key = pattern.pattern_a;
  const auto& value = *pattern.pattern_b;
  for (auto pos = object.find(key); pos != std::string_view::npos; pos = object.find(key, pos + 1)) {
    auto start = pos + key.size();
    auto end = object.find_first_of(",}", start);
    auto span = object.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (span.find(value) != std::string_view::npos) return true;
  }
  return false;
}

inline bool MatchDisjunct(std::string_view object, const CompiledDisjunct& disjunct) {
  return std::all_of(disjunct.patterns.begin(), disjunct.patterns.end(),
                     [&](const CompiledPattern& p) { return MatchPattern(object, p); });
}

inline bool EvaluateClause(std::string_view object, const CompiledClause& clause) {
  return std::any_of(clause.disjuncts.begin(), clause.disjuncts.end(),
                     [&](const CompiledDisjunct& d) { return MatchDisjunct(object, d); });
}

// ---------------------------------------------------------------------------
// Chunks and their bitvectors

struct Chunk {
  std::uint32_t index = 0;
  std::vector<std::string> objects;

  std::size_t count() const { return objects.size(); }
};

struct ChunkBitvectors {
  std::uint32_t chunk_index = 0;
  std::uint32_t object_count = 0;
  std::map<std::uint32_t, BitVector> entries;  // clause id -> bits

  friend bool operator==(const ChunkBitvectors&, const ChunkBitvectors&) = default;
};

inline ChunkBitvectors EvaluateChunk(const Chunk& chunk, const std::vector<CompiledClause>& clauses) {
  ChunkBitvectors out;
  out.chunk_index = chunk.index;
  out.object_count = static_cast<std::uint32_t>(chunk.count());
  for (const auto& clause : clauses) {
    BitVector bits(chunk.count());
    for (std::size_t i = 0; i < chunk.count(); ++i) {
      if (EvaluateClause(chunk.objects[i], clause)) bits.set(i);
    }
    out.entries.emplace(clause.id, std::move(bits));
  }
  return out;
}

inline constexpr std::string_view kBitvectorMagic = "CBV1";

// CBV1: magic, u32 entry count, u32 object count, then per entry a u32
// clause id followed by ceil(count/8) bytes, LSB-first.
inline void AppendBitvectors(std::string& out, const ChunkBitvectors& bv) {
  out.append(kBitvectorMagic);
  io::PutU32(out, static_cast<std::uint32_t>(bv.entries.size()));
  io::PutU32(out, bv.object_count);
  for (const auto& [id, bits] : bv.entries) {
    if (bits.size() != bv.object_count) {
      throw Error(ErrorKind::kValidation, "bitvector length does not match object count");
    }
    io::PutU32(out, id);
    io::PutBytes(out, bits.bytes());
  }
}

inline std::string EncodeBitvectors(const ChunkBitvectors& bv) {
  std::string out;
  AppendBitvectors(out, bv);
  return out;
}

inline ChunkBitvectors ReadBitvectors(io::Reader& in) {
  if (in.remaining() < kBitvectorMagic.size()) {
    throw Error(ErrorKind::kTruncated, "bitvector section shorter than its magic");
  }
  if (in.Take(kBitvectorMagic.size()) != kBitvectorMagic) throw Error(ErrorKind::kBadMagic, "expected CBV1");
  ChunkBitvectors bv;
  auto entries = in.U32();
  bv.object_count = in.U32();
  auto nbytes = BitVector::ByteCount(bv.object_count);
  for (std::uint32_t e = 0; e < entries; ++e) {
    auto id = in.U32();
    auto raw = in.Take(nbytes);
    auto bits = BitVector::FromBytes(
        bv.object_count, {reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
    if (!std::equal(bits.bytes().begin(), bits.bytes().end(),
                    reinterpret_cast<const std::uint8_t*>(raw.data()))) {
      throw Error(ErrorKind::kCorrupt, "padding bits set in bitvector");
    }
    if (!bv.entries.emplace(id, std::move(bits)).second) {
      throw Error(ErrorKind::kCorrupt, "duplicate clause id " + std::to_string(id));
    }
  }
  return bv;
}

inline ChunkBitvectors DecodeBitvectors(std::string_view data) {
  io::Reader in(data);
  auto bv = ReadBitvectors(in);
  if (in.remaining() != 0) throw Error(ErrorKind::kCorrupt, "trailing bytes after bitvectors");
  return bv;
}

// ---------------------------------------------------------------------------
// Streaming

inline bool IsBlankLine(std::string_view line) { return json::TrimWhitespace(line).empty(); }

// Reads NDJSON, groups objects into chunks and evaluates the plan's clauses on
// each. Chunks reach `sink` in input order regardless of `threads`.
inline std::size_t FilterStream(std::istream& input, const std::vector<CompiledClause>& clauses,
                                std::size_t chunk_size,
                                const std::function<void(Chunk&&, ChunkBitvectors&&)>& sink,
                                unsigned threads = 1, double* eval_seconds = nullptr) {
  if (chunk_size == 0) throw Error(ErrorKind::kValidation, "chunk size must be at least 1");
  threads = std::max(1U, threads);
  std::uint32_t next_index = 0;
  std::size_t total = 0;
  std::string line;
  bool eof = false;
  while (!eof) {
    std::vector<Chunk> batch;
    while (batch.size() < threads) {
      Chunk chunk;
      chunk.index = next_index;
      while (chunk.count() < chunk_size && std::getline(input, line)) {
        if (!IsBlankLine(line)) chunk.objects.push_back(line);
      }
      if (input.bad()) throw Error(ErrorKind::kIo, "read failure on input stream");
      if (chunk.count() < chunk_size) eof = true;
      if (chunk.count() == 0) break;
      ++next_index;
      batch.push_back(std::move(chunk));
      if (eof) break;
    }
    std::vector<ChunkBitvectors> results(batch.size());
    const auto started = std::chrono::steady_clock::now();
    if (batch.size() == 1) {
      results[0] = EvaluateChunk(batch[0], clauses);
    } else {
      std::vector<std::jthread> workers;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        workers.emplace_back([&, i] { results[i] = EvaluateChunk(batch[i], clauses); });
      }
    }
    if (eval_seconds) {
      *eval_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      total += batch[i].count();
      sink(std::move(batch[i]), std::move(results[i]));
    }
  }
  return total;
}

inline std::string ChunkStem(std::uint32_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "chunk-%06u", index);
  return buf;
}

inline std::string EncodeChunkLines(const Chunk& chunk) {
  std::string out;
  for (const auto& o : chunk.objects) {
    out += o;
    out += '\n';
  }
  return out;
}

struct ChunkManifestEntry {
  std::uint32_t index = 0;
  std::uint32_t count = 0;
  std::uint32_t ndjson_crc32 = 0;
  std::uint32_t bv_crc32 = 0;
};

struct ChunkManifest {
  std::string plan_hash;
  std::size_t chunk_size = kDefaultChunkSize;
  std::vector<ChunkManifestEntry> chunks;

  std::size_t total_objects() const {
    std::size_t n = 0;
    for (const auto& c : chunks) n += c.count;
    return n;
  }
};

inline nlohmann::json ManifestToJson(const ChunkManifest& m) {
  nlohmann::json chunks = nlohmann::json::array();
  for (const auto& c : m.chunks) {
    chunks.push_back({{"index", c.index},
                      {"count", c.count},
                      {"ndjson", ChunkStem(c.index) + ".ndjson"},
                      {"bv", ChunkStem(c.index) + ".bv"},
                      {"ndjson_crc32", c.ndjson_crc32},
                      {"bv_crc32", c.bv_crc32}});
  }
  return {{"version", 1},
          {"plan_hash", m.plan_hash},
          {"chunk_size", m.chunk_size},
          {"total_objects", m.total_objects()},
          {"chunks", chunks}};
}

inline ChunkManifest ManifestFromJson(const nlohmann::json& j) {
  try {
    ChunkManifest m;
    m.plan_hash = j.at("plan_hash").get<std::string>();
    m.chunk_size = j.at("chunk_size").get<std::size_t>();
    for (const auto& c : j.at("chunks")) {
      m.chunks.push_back({c.at("index").get<std::uint32_t>(), c.at("count").get<std::uint32_t>(),
                          c.at("ndjson_crc32").get<std::uint32_t>(), c.at("bv_crc32").get<std::uint32_t>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("bad chunk manifest: ") + e.what());
  }
}

// Writes chunk-NNNNNN.{ndjson,bv} files plus manifest.json into `dir`. On any
// failure the files written so far are removed.
class ChunkWriter {
 public:
  ChunkWriter(std::filesystem::path dir, std::string plan_hash, std::size_t chunk_size) : dir_(std::move(dir)) {
    manifest_.plan_hash = std::move(plan_hash);
    manifest_.chunk_size = chunk_size;
    std::filesystem::create_directories(dir_);
  }

  ~ChunkWriter() {
    if (!committed_) Cleanup();
  }

  ChunkWriter(const ChunkWriter&) = delete;
  ChunkWriter& operator=(const ChunkWriter&) = delete;

  void Write(const Chunk& chunk, const ChunkBitvectors& bv) {
    auto lines = EncodeChunkLines(chunk);
    auto bits = EncodeBitvectors(bv);
    auto stem = ChunkStem(chunk.index);
    Track(dir_ / (stem + ".ndjson"));
    io::WriteFileAtomic(dir_ / (stem + ".ndjson"), lines);
    Track(dir_ / (stem + ".bv"));
    io::WriteFileAtomic(dir_ / (stem + ".bv"), bits);
    manifest_.chunks.push_back({chunk.index, static_cast<std::uint32_t>(chunk.count()), io::Crc32(lines),
                                io::Crc32(bits)});
  }

  const ChunkManifest& Commit() {
    Track(dir_ / "manifest.json");
    WriteJsonFile(dir_ / "manifest.json", ManifestToJson(manifest_));
    committed_ = true;
    return manifest_;
  }

 private:
  void Track(const std::filesystem::path& p) { written_.push_back(p); }

  void Cleanup() noexcept {
    std::error_code ec;
    for (const auto& p : written_) {
      std::filesystem::remove(p, ec);
      auto tmp = p;
      tmp += ".tmp";
      std::filesystem::remove(tmp, ec);
    }
  }

  std::filesystem::path dir_;
  ChunkManifest manifest_;
  std::vector<std::filesystem::path> written_;
  bool committed_ = false;
};

inline ChunkManifest LoadManifest(const std::filesystem::path& dir) {
  return ManifestFromJson(ReadJsonFile(dir / "manifest.json"));
}

inline Chunk ParseChunkLines(std::uint32_t index, std::string_view text) {
  Chunk chunk;
  chunk.index = index;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!IsBlankLine(line)) chunk.objects.emplace_back(line);
    start = nl + 1;
  }
  return chunk;
}

// Loads one chunk and its bitvectors, verifying the manifest checksums.
inline std::pair<Chunk, ChunkBitvectors> ReadChunk(const std::filesystem::path& dir, const ChunkManifestEntry& entry) {
  auto stem = ChunkStem(entry.index);
  auto lines = io::ReadFile(dir / (stem + ".ndjson"));
  auto bits = io::ReadFile(dir / (stem + ".bv"));
  if (io::Crc32(lines) != entry.ndjson_crc32) {
    throw Error(ErrorKind::kChecksumMismatch, stem + ".ndjson does not match manifest checksum");
  }
  if (io::Crc32(bits) != entry.bv_crc32) {
    throw Error(ErrorKind::kChecksumMismatch, stem + ".bv does not match manifest checksum");
  }
  auto chunk = ParseChunkLines(entry.index, lines);
  auto bv = DecodeBitvectors(bits);
  bv.chunk_index = entry.index;
  if (chunk.count() != entry.count || bv.object_count != entry.count) {
    throw Error(ErrorKind::kCorrupt, stem + " object count disagrees with manifest");
  }
  return {std::move(chunk), std::move(bv)};
}

// ---------------------------------------------------------------------------
// Cost measurement

struct FilterCost {
  double us_per_object = 0.0;
  double match_fraction = 0.0;
};

// Median-of-reps wall-clock cost of evaluating one clause per object.
inline FilterCost MeasureFilterCost(const std::vector<std::string>& sample, const CompiledClause& clause,
                                    int reps = 5) {
  if (sample.empty()) throw Error(ErrorKind::kValidation, "empty sample");
  reps = std::max(reps, 1);
  std::vector<double> per_object;
  std::size_t matches = 0;
  for (int r = 0; r < reps; ++r) {
    std::size_t m = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& obj : sample) m += EvaluateClause(obj, clause) ? 1 : 0;
    auto t1 = std::chrono::steady_clock::now();
    per_object.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count() /
                         static_cast<double>(sample.size()));
    matches = m;
  }
  std::nth_element(per_object.begin(), per_object.begin() + per_object.size() / 2, per_object.end());
  return {per_object[per_object.size() / 2], static_cast<double>(matches) / static_cast<double>(sample.size())};
}

}  // namespace pushdown
