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

// General-purpose lossless compressors with optional preset dictionaries:
// Brotli (RFC 7932 stream, raw shared dictionary) and zlib (RFC 1950 stream,
// deflateSetDictionary).

#pragma once

#include <brotli/decode.h>
#include <brotli/encode.h>
#include <zlib.h>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/error.hpp"

namespace semcodec::text {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

/// Upper bound on decompressed output; anything larger is treated as corrupt.
inline constexpr size_t kMaxDecompressedBytes = 1 << 20;

class Compressor {
 public:
  virtual ~Compressor() = default;
  virtual CompressorKind kind() const = 0;
  /// Compresses `input`; `dictionary` may be empty.
  virtual Bytes compress(ByteView input, ByteView dictionary, int level) const = 0;
  /// Throws ErrorKind::decode on a corrupt or oversized stream.
  virtual Bytes decompress(ByteView input, ByteView dictionary, size_t max_output = kMaxDecompressedBytes) const = 0;
};

class BrotliCompressor final : public Compressor {
 public:
  /// A 64 KiB window covers the 16 KiB dictionary plus any chunk and gives
  /// slightly tighter output than larger windows on short inputs.
  static constexpr int kLgWin = 16;

  CompressorKind kind() const override { return CompressorKind::brotli; }

  Bytes compress(ByteView input, ByteView dictionary, int level) const override {
    using EncPtr = std::unique_ptr<BrotliEncoderState, decltype(&BrotliEncoderDestroyInstance)>;
    using DictPtr = std::unique_ptr<BrotliEncoderPreparedDictionary, decltype(&BrotliEncoderDestroyPreparedDictionary)>;
    EncPtr enc(BrotliEncoderCreateInstance(nullptr, nullptr, nullptr), &BrotliEncoderDestroyInstance);
    if (!enc) fail(ErrorKind::input, "brotli: encoder allocation failed");
    BrotliEncoderSetParameter(enc.get(), BROTLI_PARAM_QUALITY, static_cast<uint32_t>(level));
    BrotliEncoderSetParameter(enc.get(), BROTLI_PARAM_MODE, BROTLI_MODE_TEXT);
    BrotliEncoderSetParameter(enc.get(), BROTLI_PARAM_LGWIN, kLgWin);
    BrotliEncoderSetParameter(enc.get(), BROTLI_PARAM_SIZE_HINT, static_cast<uint32_t>(input.size()));
    DictPtr dict(nullptr, &BrotliEncoderDestroyPreparedDictionary);
    if (!dictionary.empty()) {
      dict.reset(BrotliEncoderPrepareDictionary(BROTLI_SHARED_DICTIONARY_RAW, dictionary.size(), dictionary.data(),
                                                level, nullptr, nullptr, nullptr));
      if (!dict || !BrotliEncoderAttachPreparedDictionary(enc.get(), dict.get()))
        fail(ErrorKind::input, "brotli: cannot attach dictionary");
    }
    Bytes out(BrotliEncoderMaxCompressedSize(input.size()) + 64);
    size_t avail_in = input.size();
    const uint8_t* next_in = input.data();
    size_t avail_out = out.size();
    uint8_t* next_out = out.data();
    if (!BrotliEncoderCompressStream(enc.get(), BROTLI_OPERATION_FINISH, &avail_in, &next_in, &avail_out, &next_out,
                                     nullptr) ||
        !BrotliEncoderIsFinished(enc.get()))
      fail(ErrorKind::input, "brotli: compression failed");
    out.resize(out.size() - avail_out);
    return out;
  }

  Bytes decompress(ByteView input, ByteView dictionary, size_t max_output) const override {
    using DecPtr = std::unique_ptr<BrotliDecoderState, decltype(&BrotliDecoderDestroyInstance)>;
    DecPtr dec(BrotliDecoderCreateInstance(nullptr, nullptr, nullptr), &BrotliDecoderDestroyInstance);
    if (!dec) fail(ErrorKind::decode, "brotli: decoder allocation failed");
    if (!dictionary.empty() &&
        !BrotliDecoderAttachDictionary(dec.get(), BROTLI_SHARED_DICTIONARY_RAW, dictionary.size(), dictionary.data()))
      fail(ErrorKind::decode, "brotli: cannot attach dictionary");
    Bytes out;
    uint8_t buf[4096];
    size_t avail_in = input.size();
    const uint8_t* next_in = input.data();
    for (;;) {
      size_t avail_out = sizeof buf;
      uint8_t* next_out = buf;
      const auto r = BrotliDecoderDecompressStream(dec.get(), &avail_in, &next_in, &avail_out, &next_out, nullptr);
      out.insert(out.end(), buf, buf + (sizeof buf - avail_out));
      if (out.size() > max_output) fail(ErrorKind::decode, "brotli: output exceeds limit");
      if (r == BROTLI_DECODER_RESULT_SUCCESS) {
        if (avail_in != 0) fail(ErrorKind::decode, "brotli: trailing bytes after stream");
        return out;
      }
      if (r == BROTLI_DECODER_RESULT_NEEDS_MORE_OUTPUT) continue;
      if (r == BROTLI_DECODER_RESULT_NEEDS_MORE_INPUT) fail(ErrorKind::decode, "brotli: truncated stream");
      fail(ErrorKind::decode, std::string("brotli: ") +
                                  BrotliDecoderErrorString(BrotliDecoderGetErrorCode(dec.get())));
    }
  }
};

class ZlibCompressor final : public Compressor {
 public:
  CompressorKind kind() const override { return CompressorKind::zlib; }

  Bytes compress(ByteView input, ByteView dictionary, int level) const override {
    z_stream zs{};
    if (deflateInit(&zs, std::clamp(level, 1, 9)) != Z_OK) fail(ErrorKind::input, "zlib: init failed");
    std::unique_ptr<z_stream, int (*)(z_stream*)> guard(&zs, &deflateEnd);
    if (!dictionary.empty() &&
        deflateSetDictionary(&zs, dictionary.data(), static_cast<uInt>(dictionary.size())) != Z_OK)
      fail(ErrorKind::input, "zlib: cannot set dictionary");
    Bytes out(deflateBound(&zs, static_cast<uLong>(input.size())) + 16);
    zs.next_in = const_cast<Bytef*>(input.data());
    zs.avail_in = static_cast<uInt>(input.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    if (deflate(&zs, Z_FINISH) != Z_STREAM_END) fail(ErrorKind::input, "zlib: compression failed");
    out.resize(zs.total_out);
    return out;
  }

  Bytes decompress(ByteView input, ByteView dictionary, size_t max_output) const override {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) fail(ErrorKind::decode, "zlib: init failed");
    std::unique_ptr<z_stream, int (*)(z_stream*)> guard(&zs, &inflateEnd);
    zs.next_in = const_cast<Bytef*>(input.data());
    zs.avail_in = static_cast<uInt>(input.size());
    Bytes out;
    uint8_t buf[4096];
    for (;;) {
      zs.next_out = buf;
      zs.avail_out = sizeof buf;
      int r = inflate(&zs, Z_NO_FLUSH);
      if (r == Z_NEED_DICT) {
        if (dictionary.empty() ||
            inflateSetDictionary(&zs, dictionary.data(), static_cast<uInt>(dictionary.size())) != Z_OK)
          fail(ErrorKind::decode, "zlib: dictionary mismatch");
        r = inflate(&zs, Z_NO_FLUSH);
      }
      out.insert(out.end(), buf, buf + (sizeof buf - zs.avail_out));
      if (out.size() > max_output) fail(ErrorKind::decode, "zlib: output exceeds limit");
      if (r == Z_STREAM_END) {
        if (zs.avail_in != 0) fail(ErrorKind::decode, "zlib: trailing bytes after stream");
        return out;
      }
      if (r != Z_OK) fail(ErrorKind::decode, "zlib: corrupt stream");
      if (zs.avail_in == 0 && zs.avail_out != 0) fail(ErrorKind::decode, "zlib: truncated stream");
    }
  }
};

inline const Compressor& compressor_for(CompressorKind kind) {
  static const BrotliCompressor brotli;
  static const ZlibCompressor zlib;
  return kind == CompressorKind::brotli ? static_cast<const Compressor&>(brotli) : zlib;
}

}  // namespace semcodec::text
