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

#include <stdexcept>
#include <string>
#include <string_view>

namespace pushdown {

enum class ErrorKind {
  kValidation,
  kUnsupportedPredicate,
  kIo,
  kBadMagic,
  kTruncated,
  kChecksumMismatch,
  kCorrupt,
  kStoreCorruption,
  kCalibration,
  kUndefined,
  kUsage,
};

constexpr std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kUnsupportedPredicate: return "unsupported-predicate";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kBadMagic: return "bad-magic";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kChecksumMismatch: return "checksum-mismatch";
    case ErrorKind::kCorrupt: return "corrupt";
    case ErrorKind::kStoreCorruption: return "store-corruption";
    case ErrorKind::kCalibration: return "calibration";
    case ErrorKind::kUndefined: return "undefined";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ToString(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pushdown
