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

// Transcript stream: context dictionary, TEXT payload format and the
// sender/receiver codec pair.
//
// TEXT payload: [format:1][compressed stream][crc16(plaintext):2, big endian]
// format bits 0-2: codec (1 = brotli, 2 = zlib); bit 3: dictionary used;
// bits 4-7: dictionary version modulo 16.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>

#include "semcodec/config.hpp"
#include "semcodec/crc16.hpp"
#include "semcodec/text/compressor.hpp"
#include "semcodec/text/preprocess.hpp"

namespace semcodec::text {

inline constexpr size_t kDefaultDictionaryCapacity = 16 * 1024;
inline constexpr size_t kMinChunkChars = 3;

struct TextChunk {
  uint32_t utterance_id = 0;
  std::string text;
  uint32_t timestamp_cs = 0;
};

/// Bounded history of delivered plaintext used as a preset dictionary.
class ContextDictionary {
 public:
  explicit ContextDictionary(size_t capacity = kDefaultDictionaryCapacity) : capacity_(capacity) {}

  /// Appends `plaintext` (newline separated), evicting the oldest bytes
  /// beyond capacity, and bumps the version.
  void update(std::string_view plaintext) {
    if (!window_.empty()) window_.push_back('\n');
    window_.append(plaintext);
    if (window_.size() > capacity_) window_.erase(0, window_.size() - capacity_);
    ++version_;
  }

  /// Installs shared seed text as the version-0 state.
  void seed(std::string_view text) {
    window_.assign(text.substr(text.size() > capacity_ ? text.size() - capacity_ : 0));
    version_ = 0;
  }

  ByteView bytes() const { return {reinterpret_cast<const uint8_t*>(window_.data()), window_.size()}; }
  const std::string& window() const { return window_; }
  uint32_t version() const { return version_; }
  size_t size() const { return window_.size(); }
  size_t capacity() const { return capacity_; }

  friend bool operator==(const ContextDictionary&, const ContextDictionary&) = default;

 private:
  size_t capacity_;
  std::string window_;
  uint32_t version_ = 0;
};

/// Shared per-language seed text (`<lang>_seed.txt`) that primes the context
/// dictionary on both ends before any chunk has been delivered. Returns an
/// empty string when no seed file exists.
inline std::string load_dictionary_seed(const std::filesystem::path& dir, const std::string& language) {
  std::ifstream in(dir / (language + "_seed.txt"), std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Initial dictionary state for a mode: seeded when the dictionary is enabled.
inline ContextDictionary initial_dictionary(const QualityModeConfig& cfg,
                                            const std::filesystem::path& text_dir = default_data_dir() / "text") {
  ContextDictionary d;
  if (cfg.text_dictionary) d.seed(load_dictionary_seed(text_dir, cfg.text_language));
  return d;
}

struct TextFormat {
  CompressorKind codec = CompressorKind::brotli;
  bool dictionary = false;
  uint8_t version_mod16 = 0;

  uint8_t pack() const {
    return static_cast<uint8_t>((codec == CompressorKind::brotli ? 1 : 2) | (dictionary ? 0x08 : 0) |
                                (version_mod16 & 0x0F) << 4);
  }
  static TextFormat unpack(uint8_t b) {
    TextFormat f;
    switch (b & 0x07) {
      case 1: f.codec = CompressorKind::brotli; break;
      case 2: f.codec = CompressorKind::zlib; break;
      default: fail(ErrorKind::decode, "text payload: unknown codec id");
    }
    f.dictionary = b & 0x08;
    f.version_mod16 = static_cast<uint8_t>(b >> 4);
    return f;
  }
};

/// Compresses `text` against `dict` (which may be unused).
inline Bytes compress_text(std::string_view text, const ContextDictionary& dict, CompressorKind codec, int level,
                           bool use_dictionary) {
  if (text.size() < kMinChunkChars) fail(ErrorKind::precondition, "text chunk shorter than 3 characters");
  const bool with_dict = use_dictionary && dict.size() > 0;
  TextFormat fmt{codec, with_dict, static_cast<uint8_t>(dict.version() & 0x0F)};
  const ByteView in(reinterpret_cast<const uint8_t*>(text.data()), text.size());
  Bytes body = compressor_for(codec).compress(in, with_dict ? dict.bytes() : ByteView{}, level);
  Bytes out;
  out.reserve(body.size() + 3);
  out.push_back(fmt.pack());
  out.insert(out.end(), body.begin(), body.end());
  const uint16_t crc = crc16(text);
  out.push_back(static_cast<uint8_t>(crc >> 8));
  out.push_back(static_cast<uint8_t>(crc & 0xFF));
  return out;
}

/// Inverse of compress_text. Throws ErrorKind::desync when the payload was
/// produced against a different dictionary version, ErrorKind::decode on
/// any corruption.
inline std::string decompress_text(ByteView payload, const ContextDictionary& dict) {
  if (payload.size() < 4) fail(ErrorKind::decode, "text payload too short");
  const TextFormat fmt = TextFormat::unpack(payload[0]);
  if (fmt.dictionary && fmt.version_mod16 != (dict.version() & 0x0F))
    fail(ErrorKind::desync, "text payload: dictionary version mismatch");
  const ByteView body = payload.subspan(1, payload.size() - 3);
  const Bytes plain = compressor_for(fmt.codec).decompress(body, fmt.dictionary ? dict.bytes() : ByteView{});
  std::string text(plain.begin(), plain.end());
  const uint16_t expect = static_cast<uint16_t>(payload[payload.size() - 2] << 8 | payload[payload.size() - 1]);
  if (crc16(text) != expect) fail(ErrorKind::decode, "text payload: checksum mismatch");
  return text;
}

/// Sender side. The dictionary only advances once the receiver has
/// acknowledged a chunk, so loss can never desynchronize the two contexts.
class TextEncoder {
 public:
  explicit TextEncoder(const QualityModeConfig& cfg, std::optional<PreprocessTables> tables = std::nullopt)
      : cfg_(cfg), dict_(initial_dictionary(cfg)) {
    if (cfg_.text_preprocess) tables_ = tables ? std::move(*tables) : PreprocessTables::load_default(cfg_.text_language);
  }

  /// Mode-dependent normalization; throws ErrorKind::precondition if fewer
  /// than 3 characters remain.
  std::string prepare(std::string_view raw) const {
    std::string s = cfg_.text_preprocess ? preprocess_text(raw, *tables_) : minimal_trim(raw);
    if (s.size() < kMinChunkChars) fail(ErrorKind::precondition, "text chunk shorter than 3 characters");
    return s;
  }

  /// Compresses prepared text against the acknowledged dictionary state.
  Bytes encode(std::string_view prepared) const {
    return compress_text(prepared, dict_, cfg_.text_compressor, cfg_.text_compress_level, cfg_.text_dictionary);
  }

  /// Call when the receiver confirmed delivery of `prepared`.
  void acknowledge(std::string_view prepared) { dict_.update(prepared); }

  const ContextDictionary& dictionary() const { return dict_; }

 private:
  static std::string minimal_trim(std::string_view raw) {
    const auto a = raw.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return {};
    const auto b = raw.find_last_not_of(" \t\r\n");
    return std::string(raw.substr(a, b - a + 1));
  }

  QualityModeConfig cfg_;
  std::optional<PreprocessTables> tables_;
  ContextDictionary dict_;
};

/// Receiver side; advances its dictionary on every successful decode.
class TextDecoder {
 public:
  TextDecoder() = default;
  explicit TextDecoder(const QualityModeConfig& cfg) : dict_(initial_dictionary(cfg)) {}

  std::string decode(ByteView payload) {
    std::string text = decompress_text(payload, dict_);
    dict_.update(text);
    return text;
  }
  const ContextDictionary& dictionary() const { return dict_; }

 private:
  ContextDictionary dict_;
};

}  // namespace semcodec::text
