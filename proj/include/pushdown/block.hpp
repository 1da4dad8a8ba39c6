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
#include <string_view>
#include <utility>
#include <vector>

#include "pushdown/binary_io.hpp"
#include "pushdown/bitvector.hpp"
#include "pushdown/client_filter.hpp"
#include "pushdown/error.hpp"
#include "pushdown/json_text.hpp"

namespace pushdown {

// ---------------------------------------------------------------------------
// Flattening

using FlatField = std::pair<std::string, std::string_view>;  // path, verbatim JSON value

namespace detail {

class Flattener {
 public:
  explicit Flattener(std::string_view text) : text_(text) {}

  void Object(std::size_t& pos, const std::string& prefix, std::vector<FlatField>& out) {
    ++pos;  // '{'
    SkipWs(pos);
    if (text_[pos] == '}') {
      ++pos;
      return;
    }
    while (true) {
      SkipWs(pos);
      auto key_start = pos;
      SkipString(pos);
      auto key = DecodeKey(text_.substr(key_start, pos - key_start));
      SkipWs(pos);
      ++pos;  // ':'
      SkipWs(pos);
      auto path = prefix.empty() ? key : prefix + "." + key;
      auto value_start = pos;
      if (text_[pos] == '{' && !IsEmptyObject(pos)) {
        Object(pos, path, out);
      } else {
        SkipValue(pos);
        out.emplace_back(std::move(path), text_.substr(value_start, pos - value_start));
      }
      SkipWs(pos);
      if (text_[pos] == ',') {
        ++pos;
        continue;
      }
      ++pos;  // '}'
      return;
    }
  }

  void SkipWs(std::size_t& pos) const {
    while (pos < text_.size() && (text_[pos] == ' ' || text_[pos] == '\t' || text_[pos] == '\n' || text_[pos] == '\r')) {
      ++pos;
    }
  }

 private:
  void SkipString(std::size_t& pos) const {
    ++pos;
    while (text_[pos] != '"') pos += text_[pos] == '\\' ? 2 : 1;
    ++pos;
  }

  void SkipValue(std::size_t& pos) const {
    char c = text_[pos];
    if (c == '"') return SkipString(pos);
    if (c == '{' || c == '[') {
      int depth = 0;
      do {
        char d = text_[pos];
        if (d == '"') {
          SkipString(pos);
          continue;
        }
        if (d == '{' || d == '[') ++depth;
        if (d == '}' || d == ']') --depth;
        ++pos;
      } while (depth > 0);
      return;
    }
    while (pos < text_.size() && std::string_view(",}] \t\r\n").find(text_[pos]) == std::string_view::npos) ++pos;
  }

  bool IsEmptyObject(std::size_t pos) const {
    ++pos;
    SkipWs(pos);
    return text_[pos] == '}';
  }

  static std::string DecodeKey(std::string_view token) {
    auto decoded = json::DecodeString(token);
    if (!decoded) throw Error(ErrorKind::kValidation, "bad object key");
    return std::move(*decoded);
  }

  std::string_view text_;
};

}  // namespace detail

// Splits one JSON object into (dot path, verbatim value) pairs. Nested
// non-empty objects are flattened; arrays, empty objects and scalars are kept
// as their JSON text. The views point into `line`.
inline std::vector<FlatField> FlattenObject(std::string_view line) {
  std::string message;
  if (!json::Validate(line, &message)) throw Error(ErrorKind::kValidation, "invalid JSON: " + message);
  detail::Flattener f(line);
  std::size_t pos = 0;
  f.SkipWs(pos);
  if (line[pos] != '{') throw Error(ErrorKind::kValidation, "top-level value is not an object");
  std::vector<FlatField> out;
  f.Object(pos, "", out);
  return out;
}

// ---------------------------------------------------------------------------
// Columns and blocks

// A nullable byte-string column stored contiguously.
class Column {
 public:
  Column() = default;
  explicit Column(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  std::size_t size() const { return offsets_.size() - 1; }

  std::optional<std::string_view> value(std::size_t row) const {
    if (!present_.get(row)) return std::nullopt;
    return std::string_view(data_).substr(offsets_[row], offsets_[row + 1] - offsets_[row]);
  }

  void Append(std::optional<std::string_view> v) {
    present_.push_back(v.has_value());
    if (v) data_.append(v->data(), v->size());
    offsets_.push_back(static_cast<std::uint32_t>(data_.size()));
  }

  // Pads with nulls up to `rows` entries.
  void PadTo(std::size_t rows) {
    while (size() < rows) Append(std::nullopt);
  }

  friend bool operator==(const Column&, const Column&) = default;

 private:
  std::string name_;
  std::string data_;
  std::vector<std::uint32_t> offsets_{0};
  BitVector present_;
};

struct ColumnarBlock {
  std::uint32_t block_id = 0;
  std::uint32_t row_count = 0;
  std::vector<Column> columns;
  std::map<std::uint32_t, BitVector> bitvectors;  // clause id -> bits over block rows
  std::uint32_t origin_chunk = 0;
  std::vector<std::uint32_t> origin_rows;  // chunk row offset of each block row

  const Column* FindColumn(std::string_view name) const {
    for (const auto& c : columns) {
      if (c.name() == name) return &c;
    }
    return nullptr;
  }

  friend bool operator==(const ColumnarBlock&, const ColumnarBlock&) = default;
};

// Accumulates flattened rows; the schema is the union of paths in first-seen
// order.
class BlockBuilder {
 public:
  BlockBuilder(std::uint32_t block_id, std::uint32_t origin_chunk) {
    block_.block_id = block_id;
    block_.origin_chunk = origin_chunk;
  }

  void AddRow(const std::vector<FlatField>& fields, std::uint32_t origin_row) {
    auto row = block_.row_count;
    for (const auto& [path, value] : fields) {
      auto [it, inserted] = index_.try_emplace(path, block_.columns.size());
      if (inserted) {
        block_.columns.emplace_back(path);
        block_.columns.back().PadTo(row);
      }
      auto& col = block_.columns[it->second];
      if (col.size() == row) col.Append(value);  // duplicate keys: first wins
    }
    ++block_.row_count;
    for (auto& col : block_.columns) col.PadTo(block_.row_count);
    block_.origin_rows.push_back(origin_row);
  }

  std::uint32_t rows() const { return block_.row_count; }

  ColumnarBlock Finish(std::map<std::uint32_t, BitVector> bitvectors) && {
    block_.bitvectors = std::move(bitvectors);
    return std::move(block_);
  }

 private:
  ColumnarBlock block_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// ---------------------------------------------------------------------------
// Block file format
//
//   "CIAO" u16 version u64 file_length
//   u32 header_length, header JSON {block_id,row_count,schema,clause_ids,origin}
//   per column: null bitmap (1 = null), then per row u32 length + bytes
//   bitvectors in CBV1 layout
//   u64 file_length, u32 CRC32 of every preceding byte

inline constexpr std::string_view kBlockMagic = "CIAO";
inline constexpr std::uint16_t kBlockVersion = 1;

inline std::string EncodeBlock(const ColumnarBlock& block) {
  nlohmann::json schema = nlohmann::json::array();
  for (const auto& c : block.columns) schema.push_back(c.name());
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& [id, bits] : block.bitvectors) ids.push_back(id);
  nlohmann::json header = {{"block_id", block.block_id},
                           {"row_count", block.row_count},
                           {"schema", schema},
                           {"clause_ids", ids},
                           {"origin", {{"chunk", block.origin_chunk}, {"rows", block.origin_rows}}}};
  auto header_text = header.dump();

  std::string out;
  out.append(kBlockMagic);
  io::PutU16(out, kBlockVersion);
  io::PutU64(out, 0);  // patched below
  io::PutU32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (const auto& col : block.columns) {
    BitVector nulls(block.row_count);
    for (std::size_t r = 0; r < block.row_count; ++r) nulls.set(r, !col.value(r).has_value());
    io::PutBytes(out, nulls.bytes());
    for (std::size_t r = 0; r < block.row_count; ++r) {
      auto v = col.value(r).value_or(std::string_view{});
      io::PutU32(out, static_cast<std::uint32_t>(v.size()));
      out.append(v);
    }
  }
  ChunkBitvectors bv;
  bv.object_count = block.row_count;
  bv.entries = block.bitvectors;
  AppendBitvectors(out, bv);
  const std::uint64_t total = out.size() + 12;
  io::PutU64(out, total);
  std::string patched;
  io::PutU64(patched, total);
  out.replace(6, 8, patched);
  io::PutU32(out, io::Crc32(out));
  return out;
}

namespace detail {

inline ColumnarBlock ParseBlockBody(std::string_view data) {
  io::Reader in(data);
  in.Take(kBlockMagic.size() + 2 + 8);
  auto header_text = in.Take(in.U32());
  auto header = nlohmann::json::parse(header_text);
  ColumnarBlock block;
  block.block_id = header.at("block_id").get<std::uint32_t>();
  block.row_count = header.at("row_count").get<std::uint32_t>();
  block.origin_chunk = header.at("origin").at("chunk").get<std::uint32_t>();
  block.origin_rows = header.at("origin").at("rows").get<std::vector<std::uint32_t>>();
  if (block.origin_rows.size() != block.row_count) throw Error(ErrorKind::kCorrupt, "origin row count mismatch");
  const auto rows = block.row_count;
  for (const auto& name : header.at("schema")) {
    Column col(name.get<std::string>());
    auto raw = in.Take(BitVector::ByteCount(rows));
    auto nulls = BitVector::FromBytes(rows, {reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
    for (std::size_t r = 0; r < rows; ++r) {
      auto value = in.Take(in.U32());
      if (nulls.get(r)) {
        if (!value.empty()) throw Error(ErrorKind::kCorrupt, "null entry with payload");
        col.Append(std::nullopt);
      } else {
        col.Append(value);
      }
    }
    block.columns.push_back(std::move(col));
  }
  auto bv = ReadBitvectors(in);
  if (bv.object_count != rows) throw Error(ErrorKind::kCorrupt, "bitvector length differs from row count");
  auto ids = header.at("clause_ids").get<std::vector<std::uint32_t>>();
  if (ids.size() != bv.entries.size()) throw Error(ErrorKind::kCorrupt, "clause id list disagrees with footer");
  for (auto id : ids) {
    if (!bv.entries.count(id)) throw Error(ErrorKind::kCorrupt, "clause id list disagrees with footer");
  }
  block.bitvectors = std::move(bv.entries);
  if (in.remaining() != 12) throw Error(ErrorKind::kCorrupt, "unexpected bytes before footer");
  return block;
}

}  // namespace detail

inline ColumnarBlock DecodeBlock(std::string_view data) {
  if (data.size() < kBlockMagic.size()) throw Error(ErrorKind::kTruncated, "block shorter than its magic");
  if (data.substr(0, kBlockMagic.size()) != kBlockMagic) throw Error(ErrorKind::kBadMagic, "not a block file");
  io::Reader prefix(data.substr(kBlockMagic.size()));
  auto version = prefix.U16();
  auto declared = prefix.U64();
  if (declared != data.size()) {
    // A trailer that agrees with the actual size means the prefix itself was
    // damaged; otherwise the file is short (or has junk appended).
    if (data.size() >= 26) {
      io::Reader trailer(data.substr(data.size() - 12));
      if (trailer.U64() == data.size()) throw Error(ErrorKind::kChecksumMismatch, "block length field corrupted");
    }
    if (data.size() < declared) {
      throw Error(ErrorKind::kTruncated, "block has " + std::to_string(data.size()) + " of " +
                                             std::to_string(declared) + " bytes");
    }
    throw Error(ErrorKind::kCorrupt, "trailing bytes after block");
  }
  io::Reader crc_reader(data.substr(data.size() - 4));
  if (crc_reader.U32() != io::Crc32(data.substr(0, data.size() - 4))) {
    throw Error(ErrorKind::kChecksumMismatch, "block CRC32 mismatch");
  }
  if (version != kBlockVersion) throw Error(ErrorKind::kCorrupt, "unsupported block version " + std::to_string(version));
  try {
    return detail::ParseBlockBody(data);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kCorrupt, std::string("bad block header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kTruncated) throw Error(ErrorKind::kCorrupt, e.what());
    throw;
  }
}

inline void WriteBlock(const ColumnarBlock& block, const std::filesystem::path& path) {
  io::WriteFileAtomic(path, EncodeBlock(block));
}

inline ColumnarBlock ReadBlock(const std::filesystem::path& path) { return DecodeBlock(io::ReadFile(path)); }

}  // namespace pushdown
