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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pushdown {

// Packed bit sequence, LSB-first within each byte. Unused high bits of the
// last byte are always zero so byte-wise comparison is equality.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size, bool value = false)
      : size_(size), bytes_((size + 7) / 8, value ? 0xFF : 0x00) {
    ClearTail();
  }

  static BitVector FromBytes(std::size_t size, std::span<const std::uint8_t> bytes) {
    BitVector bv;
    bv.size_ = size;
    bv.bytes_.assign(bytes.begin(), bytes.end());
    bv.bytes_.resize(ByteCount(size), 0);
    bv.ClearTail();
    return bv;
  }

  static constexpr std::size_t ByteCount(std::size_t bits) { return (bits + 7) / 8; }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1U; }
  void set(std::size_t i, bool value = true) {
    auto mask = static_cast<std::uint8_t>(1U << (i & 7));
    if (value) {
      bytes_[i >> 3] |= mask;
    } else {
      bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
    }
  }

  void push_back(bool value) {
    if ((size_ & 7) == 0) bytes_.push_back(0);
    ++size_;
    set(size_ - 1, value);
  }

  BitVector& operator&=(const BitVector& other) {
    for (std::size_t i = 0; i < bytes_.size(); ++i) bytes_[i] &= other.bytes_[i];
    return *this;
  }
  BitVector& operator|=(const BitVector& other) {
    for (std::size_t i = 0; i < bytes_.size(); ++i) bytes_[i] |= other.bytes_[i];
    return *this;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bytes_) n += static_cast<std::size_t>(__builtin_popcount(b));
    return n;
  }
  bool any() const {
    for (auto b : bytes_) {
      if (b != 0) return true;
    }
    return false;
  }

  std::span<const std::uint8_t> bytes() const { return bytes_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  void ClearTail() {
    if (size_ & 7) bytes_.back() &= static_cast<std::uint8_t>((1U << (size_ & 7)) - 1);
  }

  std::size_t size_ = 0;
  std::vector<std::uint8_t> bytes_;
};

}  // namespace pushdown
