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

#include "pushdown/json_text.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <random>
#include <string>

namespace pushdown::json {
namespace {

TEST(JsonText, QuoteEscapesOnlyWhatJsonRequires) {
  EXPECT_EQ(Quote("Bob"), "\"Bob\"");
  EXPECT_EQ(Quote("a\"b\\c"), "\"a\\\"b\\\\c\"");
  EXPECT_EQ(Quote("tab\there\n"), "\"tab\\there\\n\"");
  EXPECT_EQ(Quote(std::string("\x01", 1)), "\"\\u0001\"");
  EXPECT_EQ(Quote("café/日本"), "\"café/日本\"");
}

TEST(JsonText, QuoteAgreesWithNlohmannDump) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    auto n = rng() % 12;
    for (std::size_t k = 0; k < n; ++k) {
      auto c = static_cast<char>(rng() % 0x7F);
      s.push_back(c);
    }
    if (rng() % 3 == 0) s += "é";
    ASSERT_EQ(Quote(s), nlohmann::json(s).dump()) << "input #" << i;
  }
}

TEST(JsonText, EscapeOfSubstringIsSubstringOfEscape) {
  std::string s = "say \"hi\"\\ now\n";
  auto whole = Escape(s);
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = a + 1; b <= s.size(); ++b) {
      EXPECT_NE(whole.find(Escape(s.substr(a, b - a))), std::string::npos);
    }
  }
}

TEST(JsonText, Classify) {
  EXPECT_EQ(Classify("\"x\""), ValueKind::kString);
  EXPECT_EQ(Classify(" 12 "), ValueKind::kNumber);
  EXPECT_EQ(Classify("-1e3"), ValueKind::kNumber);
  EXPECT_EQ(Classify("true"), ValueKind::kTrue);
  EXPECT_EQ(Classify("false"), ValueKind::kFalse);
  EXPECT_EQ(Classify("null"), ValueKind::kNull);
  EXPECT_EQ(Classify("{}"), ValueKind::kObject);
  EXPECT_EQ(Classify("[1]"), ValueKind::kArray);
  EXPECT_EQ(Classify("nope"), ValueKind::kInvalid);
  EXPECT_EQ(Classify(""), ValueKind::kInvalid);
}

TEST(JsonText, DecodeString) {
  EXPECT_EQ(DecodeString("\"Bob\""), "Bob");
  EXPECT_EQ(DecodeString("\"B\\u006fb\""), "Bob");
  EXPECT_EQ(DecodeString("\"a\\\"b\""), "a\"b");
  EXPECT_EQ(DecodeString("\"\\u00e9\""), "é");
  EXPECT_FALSE(DecodeString("12"));
  EXPECT_FALSE(DecodeString("\"unterminated"));
}

TEST(JsonText, ParseNumber) {
  EXPECT_EQ(ParseNumber("22"), 22.0);
  EXPECT_EQ(ParseNumber("2.4"), ParseNumber("24e-1"));
  EXPECT_EQ(ParseNumber("-0.5"), -0.5);
  EXPECT_FALSE(ParseNumber("\"22\""));
  EXPECT_FALSE(ParseNumber("12abc"));
  EXPECT_FALSE(ParseNumber("true"));
}

TEST(JsonText, Validate) {
  EXPECT_TRUE(Validate("{\"a\":1}"));
  EXPECT_TRUE(Validate("  {\"a\":[1,2,{}]}  "));
  std::string msg;
  EXPECT_FALSE(Validate("{\"a\":1", &msg));
  EXPECT_FALSE(msg.empty());
  EXPECT_FALSE(Validate("{\"a\":1} x", &msg));
  EXPECT_EQ(msg, "trailing bytes after document");
  EXPECT_FALSE(Validate("{\"a\":\"\xff\"}"));
  EXPECT_FALSE(Validate(""));
}

}  // namespace
}  // namespace pushdown::json
