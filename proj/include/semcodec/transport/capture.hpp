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


// Bitstream capture file:
//   "STCT" | format version:1 | mode name length:1 | mode name
//   | duration_cs:4 (big endian)
//   | { frame length:2 (big endian) | frame }*   until end of file
// Frames are complete packets (header, payload, checksum).

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "semcodec/error.hpp"
#include "semcodec/transport/header.hpp"

namespace semcodec::transport {

inline constexpr char kCaptureMagic[4] = {'S', 'T', 'C', 'T'};
inline constexpr uint8_t kCaptureVersion = 1;

struct Capture {
  std::string mode_name;
  uint32_t duration_cs = 0;
  std::vector<Bytes> frames;

  friend bool operator==(const Capture&, const Capture&) = default;
};

inline Bytes serialize_capture(const Capture& c) {
  if (c.mode_name.size() > 255) fail(ErrorKind::precondition, "capture: mode name longer than 255 bytes");
  Bytes out(kCaptureMagic, kCaptureMagic + 4);
  out.push_back(kCaptureVersion);
  out.push_back(static_cast<uint8_t>(c.mode_name.size()));
  out.insert(out.end(), c.mode_name.begin(), c.mode_name.end());
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>((c.duration_cs >> s) & 0xFF));
  for (const auto& f : c.frames) {
    if (f.size() > 0xFFFF) fail(ErrorKind::precondition, "capture: frame longer than 65535 bytes");
    out.push_back(static_cast<uint8_t>(f.size() >> 8));
    out.push_back(static_cast<uint8_t>(f.size() & 0xFF));
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

/// Throws ErrorKind::input on a bad preamble and on truncation, naming the
/// last complete frame.
inline Capture parse_capture(ByteView bytes) {
  if (bytes.size() < 6 || !std::equal(kCaptureMagic, kCaptureMagic + 4, bytes.begin()))
    fail(ErrorKind::input, "capture: missing STCT magic");
  if (bytes[4] != kCaptureVersion) fail(ErrorKind::input, "capture: unsupported format version");
  const size_t name_len = bytes[5];
  if (bytes.size() < 6 + name_len + 4) fail(ErrorKind::input, "capture: truncated preamble");
  Capture c;
  c.mode_name.assign(bytes.begin() + 6, bytes.begin() + 6 + static_cast<std::ptrdiff_t>(name_len));
  size_t pos = 6 + name_len;
  for (int i = 0; i < 4; ++i) c.duration_cs = c.duration_cs << 8 | bytes[pos++];
  while (pos < bytes.size()) {
    auto truncated = [&] {
      fail(ErrorKind::input, "capture: truncated after frame " +
                                 (c.frames.empty() ? std::string("<none>") : std::to_string(c.frames.size() - 1)) +
                                 " (" + std::to_string(c.frames.size()) + " complete frames)");
    };
    if (pos + 2 > bytes.size()) truncated();
    const size_t len = static_cast<size_t>(bytes[pos] << 8 | bytes[pos + 1]);
    pos += 2;
    if (pos + len > bytes.size()) truncated();
    c.frames.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                          bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return c;
}

inline void write_capture(const std::filesystem::path& path, const Capture& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::input, "cannot write capture " + path.string());
  const Bytes b = serialize_capture(c);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

inline Capture read_capture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot open capture " + path.string());
  const std::string s(std::istreambuf_iterator<char>(in), {});
  return parse_capture(ByteView(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

}  // namespace semcodec::transport
