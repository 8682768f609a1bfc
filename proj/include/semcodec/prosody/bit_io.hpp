// Copyright 2026 The semcodec Authors
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
#include <span>
#include <string>
#include <vector>

#include "semcodec/error.hpp"

namespace semcodec::prosody {

/// Packed MSB-first bit sequence with an exact bit count.
struct BitString {
  std::vector<uint8_t> bytes;
  size_t bit_count = 0;

  bool bit(size_t i) const { return (bytes[i / 8] >> (7 - i % 8)) & 1u; }
  std::string to_string() const {
    std::string s;
    for (size_t i = 0; i < bit_count; ++i) s.push_back(bit(i) ? '1' : '0');
    return s;
  }
  friend bool operator==(const BitString&, const BitString&) = default;
};

class BitWriter {
 public:
  void write_bit(bool b) {
    if (out_.bit_count % 8 == 0) out_.bytes.push_back(0);
    if (b) out_.bytes.back() |= static_cast<uint8_t>(0x80u >> (out_.bit_count % 8));
    ++out_.bit_count;
  }
  /// Writes the low `n` bits of `value`, most significant first.
  void write_bits(uint32_t value, int n) {
    for (int i = n - 1; i >= 0; --i) write_bit((value >> i) & 1u);
  }
  const BitString& bits() const { return out_; }
  BitString take() { return std::move(out_); }

 private:
  BitString out_;
};

class BitReader {
 public:
  BitReader(std::span<const uint8_t> bytes, size_t bit_count)
      : bytes_(bytes), bit_count_(bit_count) {}
  explicit BitReader(const BitString& bits) : BitReader(bits.bytes, bits.bit_count) {}

  bool read_bit() {
    if (pos_ >= bit_count_) fail(ErrorKind::decode, "bitstream truncated");
    const bool b = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
    ++pos_;
    return b;
  }
  uint32_t read_bits(int n) {
    uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | (read_bit() ? 1u : 0u);
    return v;
  }
  size_t position() const { return pos_; }
  size_t remaining() const { return bit_count_ - pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t bit_count_;
  size_t pos_ = 0;
};

}  // namespace semcodec::prosody
