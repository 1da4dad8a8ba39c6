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

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>
#include <rapidjson/memorystream.h>
#include <rapidjson/reader.h>

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pushdown::json {

// Canonical JSON string escaping: `"` `\` and bytes below 0x20 are escaped,
// everything else (including UTF-8 multi-byte sequences) is copied verbatim.
// Escaping is byte-local, so the escape of a substring is a substring of the
// escape.
inline void AppendEscaped(std::string& out, std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(kHex[c >> 4]);
          out.push_back(kHex[c & 0xF]);
        } else {
          out.push_back(ch);
        }
    }
  }
}

inline std::string Escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  AppendEscaped(out, s);
  return out;
}

inline std::string Quote(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  AppendEscaped(out, s);
  out.push_back('"');
  return out;
}

enum class ValueKind { kString, kNumber, kTrue, kFalse, kNull, kObject, kArray, kInvalid };

inline std::string_view TrimWhitespace(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

// Classifies a verbatim JSON value by its leading byte.
inline ValueKind Classify(std::string_view text) {
  text = TrimWhitespace(text);
  if (text.empty()) return ValueKind::kInvalid;
  switch (text.front()) {
    case '"': return ValueKind::kString;
    case '{': return ValueKind::kObject;
    case '[': return ValueKind::kArray;
    case 't': return text == "true" ? ValueKind::kTrue : ValueKind::kInvalid;
    case 'f': return text == "false" ? ValueKind::kFalse : ValueKind::kInvalid;
    case 'n': return text == "null" ? ValueKind::kNull : ValueKind::kInvalid;
    default:
      if (text.front() == '-' || (text.front() >= '0' && text.front() <= '9')) {
        return ValueKind::kNumber;
      }
      return ValueKind::kInvalid;
  }
}

// Decodes a verbatim JSON string token (with quotes). Escape-free tokens take
// the fast path; anything else goes through rapidjson.
inline std::optional<std::string> DecodeString(std::string_view text) {
  text = TrimWhitespace(text);
  if (text.size() < 2 || text.front() != '"' || text.back() != '"') return std::nullopt;
  auto body = text.substr(1, text.size() - 2);
  if (body.find('\\') == std::string_view::npos) return std::string(body);
  rapidjson::Document doc;
  doc.Parse(text.data(), text.size());
  if (doc.HasParseError() || !doc.IsString()) return std::nullopt;
  return std::string(doc.GetString(), doc.GetStringLength());
}

inline std::optional<double> ParseNumber(std::string_view text) {
  text = TrimWhitespace(text);
  if (Classify(text) != ValueKind::kNumber) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// Full validation of one JSON document (syntax and UTF-8).
inline bool Validate(std::string_view text, std::string* message = nullptr) {
  rapidjson::BaseReaderHandler<> handler;
  rapidjson::Reader reader;
  rapidjson::MemoryStream ms(text.data(), text.size());
  auto result = reader.Parse<rapidjson::kParseValidateEncodingFlag | rapidjson::kParseStopWhenDoneFlag>(
      ms, handler);
  if (result.IsError()) {
    if (message) {
      *message = std::string(rapidjson::GetParseError_En(result.Code())) + " at offset " +
                 std::to_string(result.Offset());
    }
    return false;
  }
  // kParseStopWhenDoneFlag leaves trailing bytes; only whitespace may follow.
  if (!TrimWhitespace(text.substr(ms.Tell())).empty()) {
    if (message) *message = "trailing bytes after document";
    return false;
  }
  return true;
}

}  // namespace pushdown::json
