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

// Keyframe payload bit layout:
//   [voicing:1][is_absolute:1][codeword per enabled feature]
// The pitch codeword is omitted when the keyframe is unvoiced. The timestamp
// travels in the transport header; the payload is zero-padded to whole bytes.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/prosody/bit_io.hpp"
#include "semcodec/prosody/huffman.hpp"

namespace semcodec::prosody {

/// Quantized content of one keyframe.
struct KeyframeCodes {
  bool voiced = false;
  bool is_absolute = false;
  std::array<int, 3> codes{};  // indexed by Feature; 0 for omitted features

  int get(Feature f) const { return codes[static_cast<int>(f)]; }
  friend bool operator==(const KeyframeCodes&, const KeyframeCodes&) = default;
};

struct ProsodyPayload {
  uint32_t timestamp_cs = 0;
  BitString huffman_bits;

  size_t bit_count() const { return huffman_bits.bit_count; }
  friend bool operator==(const ProsodyPayload&, const ProsodyPayload&) = default;
};

/// Entropy coder bound to one mode's feature set and bit budgets.
class ProsodyEntropyCoder {
 public:
  explicit ProsodyEntropyCoder(const QualityModeConfig& cfg) : features_(cfg.features) {
    if (features_.empty()) fail(ErrorKind::precondition, "prosody coder: empty feature set");
    for (Feature f : kAllFeatures)
      if (features_.has(f)) books_[static_cast<int>(f)] = &prosody_codebook(f, cfg.bits(f));
  }

  bool carries(Feature f, bool voiced) const {
    return features_.has(f) && (f != Feature::pitch || voiced);
  }

  BitString encode(const KeyframeCodes& k) const {
    BitWriter w;
    w.write_bit(k.voiced);
    w.write_bit(k.is_absolute);
    for (Feature f : kAllFeatures)
      if (carries(f, k.voiced)) books_[static_cast<int>(f)]->encode(k.get(f), w);
    return w.take();
  }

  /// Decodes exactly one keyframe. With `strict_padding`, any bits left over
  /// must be fewer than eight and all zero.
  KeyframeCodes decode(const BitString& bits, bool strict_padding = true) const {
    BitReader r(bits);
    KeyframeCodes k;
    k.voiced = r.read_bit();
    k.is_absolute = r.read_bit();
    for (Feature f : kAllFeatures)
      if (carries(f, k.voiced)) k.codes[static_cast<int>(f)] = books_[static_cast<int>(f)]->decode(r);
    if (strict_padding) {
      if (r.remaining() >= 8) fail(ErrorKind::decode, "prosody payload: trailing data");
      while (r.remaining())
        if (r.read_bit()) fail(ErrorKind::decode, "prosody payload: nonzero padding");
    }
    return k;
  }

  const HuffmanCodebook& codebook(Feature f) const { return *books_.at(static_cast<int>(f)); }
  const FeatureSet& features() const { return features_; }

 private:
  FeatureSet features_;
  std::array<const HuffmanCodebook*, 3> books_{};
};

inline ProsodyPayload packetize_keyframe(uint32_t timestamp_cs, BitString bits) {
  if (bits.bit_count < 3) fail(ErrorKind::precondition, "prosody payload: nothing to packetize");
  if (timestamp_cs >= (1u << 24)) fail(ErrorKind::precondition, "prosody payload: timestamp exceeds 24 bits");
  return {timestamp_cs, std::move(bits)};
}

inline std::pair<uint32_t, KeyframeCodes> parse_payload(const ProsodyPayload& p,
                                                        const ProsodyEntropyCoder& coder) {
  return {p.timestamp_cs, coder.decode(p.huffman_bits)};
}

/// Wire form of the payload bits (zero padded).
inline std::vector<uint8_t> payload_bytes(const BitString& bits) { return bits.bytes; }

inline BitString bits_from_bytes(std::span<const uint8_t> bytes) {
  return {std::vector<uint8_t>(bytes.begin(), bytes.end()), bytes.size() * 8};
}

/// Recovers a full timestamp from its 24-bit wire form by choosing the
/// candidate nearest to the last known full timestamp.
inline uint64_t unwrap_timestamp(uint64_t last_full, uint32_t ts24) {
  constexpr uint64_t kWrap = 1ull << 24;
  const uint64_t base = last_full & ~(kWrap - 1);
  uint64_t best = base + ts24;
  auto dist = [&](uint64_t c) { return c > last_full ? c - last_full : last_full - c; };
  if (base >= kWrap && dist(base - kWrap + ts24) < dist(best)) best = base - kWrap + ts24;
  if (dist(base + kWrap + ts24) < dist(best)) best = base + kWrap + ts24;
  return best;
}

/// Assembles keyframe payloads of one stream, enforcing strictly increasing
/// timestamps after unwrapping.
class ProsodyStreamAssembler {
 public:
  uint64_t push(uint32_t ts24) {
    const uint64_t full = last_ ? unwrap_timestamp(*last_, ts24) : ts24;
    if (last_ && full <= *last_) fail(ErrorKind::protocol, "prosody stream: timestamp not increasing");
    last_ = full;
    return full;
  }
  std::optional<uint64_t> last() const { return last_; }

 private:
  std::optional<uint64_t> last_;
};

}  // namespace semcodec::prosody
