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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/error.hpp"

namespace semcodec::dsp {

/// Mono signed 16-bit PCM.
struct AudioBuffer {
  std::vector<int16_t> samples;
  int sample_rate_hz = kSampleRateHz;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  /// Sample value in normalized amplitude units [-1, 1).
  double at(size_t i) const { return samples[i] / 32768.0; }

  static AudioBuffer from_normalized(std::span<const double> x,
                                     int sample_rate_hz = kSampleRateHz) {
    AudioBuffer b;
    b.sample_rate_hz = sample_rate_hz;
    b.samples.reserve(x.size());
    for (double v : x) {
      double s = std::round(v * 32768.0);
      if (s > 32767.0) s = 32767.0;
      if (s < -32768.0) s = -32768.0;
      b.samples.push_back(static_cast<int16_t>(s));
    }
    return b;
  }
};

/// Normalized amplitude copy of the buffer.
inline std::vector<double> to_normalized(const AudioBuffer& audio) {
  std::vector<double> x(audio.size());
  for (size_t i = 0; i < x.size(); ++i) x[i] = audio.at(i);
  return x;
}

/// Number of 10 ms analysis frames, ceil(N / hop).
inline size_t frame_count(size_t num_samples, size_t hop = 160) {
  return (num_samples + hop - 1) / hop;
}

namespace detail {

inline uint32_t read_u32le(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
inline uint16_t read_u16le(const uint8_t* p) {
  return uint16_t(p[0] | p[1] << 8);
}
inline void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}
inline void put_u16le(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

inline std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace detail

/// Parses a RIFF/WAVE container holding mono 16-bit PCM at 16 kHz.
inline AudioBuffer parse_wav(std::span<const uint8_t> data) {
  using detail::read_u16le;
  using detail::read_u32le;
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    fail(ErrorKind::input, "not a RIFF/WAVE file");
  size_t pos = 12;
  bool have_fmt = false;
  AudioBuffer out;
  while (pos + 8 <= data.size()) {
    const uint8_t* chunk = data.data() + pos;
    const uint32_t size = read_u32le(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > data.size())
      fail(ErrorKind::input, "truncated WAV chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail(ErrorKind::input, "short fmt chunk");
      const uint8_t* f = data.data() + body;
      const uint16_t format = read_u16le(f);
      const uint16_t channels = read_u16le(f + 2);
      out.sample_rate_hz = static_cast<int>(read_u32le(f + 4));
      const uint16_t bits = read_u16le(f + 14);
      if (format != 1 && format != 0xFFFE)
        fail(ErrorKind::input, "WAV is not PCM");
      if (channels != 1) fail(ErrorKind::input, "WAV must be mono");
      if (bits != 16) fail(ErrorKind::input, "WAV must be 16-bit");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) fail(ErrorKind::input, "WAV data chunk before fmt chunk");
      out.samples.resize(size / 2);
      for (size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = static_cast<int16_t>(read_u16le(data.data() + body + 2 * i));
      if (out.sample_rate_hz != kSampleRateHz)
        fail(ErrorKind::input, "WAV sample rate must be 16000 Hz");
      return out;
    }
    pos = body + size + (size & 1);
  }
  fail(ErrorKind::input, "WAV has no data chunk");
}

inline std::vector<uint8_t> encode_wav(const AudioBuffer& audio) {
  using detail::put_u16le;
  using detail::put_u32le;
  std::vector<uint8_t> out;
  const uint32_t data_bytes = static_cast<uint32_t>(audio.samples.size() * 2);
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32le(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32le(out, 16);
  put_u16le(out, 1);
  put_u16le(out, 1);
  put_u32le(out, static_cast<uint32_t>(audio.sample_rate_hz));
  put_u32le(out, static_cast<uint32_t>(audio.sample_rate_hz * 2));
  put_u16le(out, 2);
  put_u16le(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32le(out, data_bytes);
  for (int16_t s : audio.samples) put_u16le(out, static_cast<uint16_t>(s));
  return out;
}

inline void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  auto bytes = encode_wav(audio);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::input, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

/// Reads a WAV file, or headerless little-endian 16 kHz PCM for other
/// extensions (.pcm / .raw).
inline AudioBuffer read_audio(const std::filesystem::path& path) {
  auto bytes = detail::read_file(path);
  if (bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0)
    return parse_wav(bytes);
  if (bytes.size() % 2 != 0) fail(ErrorKind::input, "raw PCM has odd byte count");
  AudioBuffer out;
  out.samples.resize(bytes.size() / 2);
  for (size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = static_cast<int16_t>(detail::read_u16le(bytes.data() + 2 * i));
  return out;
}

}  // namespace semcodec::dsp
