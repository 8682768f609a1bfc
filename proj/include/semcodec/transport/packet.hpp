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


// Framed packets: header, payload and a CRC-16/CCITT trailer over both.
// The checksum is verified before any field is interpreted.
//
// A TEXT packet with the flag bit set carries piggybacked prosody keyframes
// ahead of the text payload:
//   [count:1][first timestamp_cs:3][len:1][bytes]...(count entries)  [text payload]
// Entries are consecutive keyframes; entry i has timestamp first + i*stride.

#pragma once

#include <cstdint>
#include <vector>

#include "semcodec/crc16.hpp"
#include "semcodec/transport/header.hpp"

namespace semcodec::transport {

inline constexpr size_t kCrcBytes = 2;

struct Packet {
  PacketHeader header;
  Bytes payload;

  /// Header plus checksum bytes on the wire.
  size_t overhead_bytes() const { return header.size() + kCrcBytes; }
  size_t wire_bytes() const { return overhead_bytes() + payload.size(); }
  friend bool operator==(const Packet&, const Packet&) = default;
};

/// Serializes a packet; the length field is filled in from the payload.
inline Bytes frame_packet(Packet p) {
  if (has_length_field(p.header.ptype)) {
    if (p.payload.size() > 0xFFFF) fail(ErrorKind::precondition, "packet: payload exceeds 65535 bytes");
    p.header.length = static_cast<uint16_t>(p.payload.size());
  }
  Bytes out = build_header(p.header);
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  const uint16_t crc = crc16(out);
  out.push_back(static_cast<uint8_t>(crc >> 8));
  out.push_back(static_cast<uint8_t>(crc & 0xFF));
  return out;
}

/// Inverse of frame_packet. Throws ErrorKind::decode on a checksum mismatch
/// (checked first), a malformed header or an inconsistent length.
inline Packet parse_frame(ByteView frame) {
  if (frame.size() < kShortHeaderBytes + kCrcBytes) fail(ErrorKind::decode, "packet: frame too short");
  const ByteView body = frame.first(frame.size() - kCrcBytes);
  const uint16_t expect = static_cast<uint16_t>(frame[frame.size() - 2] << 8 | frame[frame.size() - 1]);
  if (crc16(body) != expect) fail(ErrorKind::decode, "packet: checksum mismatch");
  Packet p;
  p.header = parse_header(body);
  const size_t hs = p.header.size();
  if (body.size() < hs) fail(ErrorKind::decode, "packet: truncated header");
  p.payload.assign(body.begin() + static_cast<std::ptrdiff_t>(hs), body.end());
  if (has_length_field(p.header.ptype) && p.header.length != p.payload.size())
    fail(ErrorKind::decode, "packet: length field does not match payload");
  return p;
}

/// Prosody keyframes riding in a TEXT packet.
struct Piggyback {
  uint32_t first_timestamp_cs = 0;
  std::vector<Bytes> keyframes;

  /// Framing bytes the extension adds on top of the keyframe payloads.
  size_t framing_bytes() const { return keyframes.empty() ? 0 : 4 + keyframes.size(); }
};

inline Bytes compose_piggyback(const Piggyback& pb, ByteView text_payload) {
  if (pb.keyframes.empty() || pb.keyframes.size() > 255)
    fail(ErrorKind::precondition, "piggyback: keyframe count must be 1-255");
  if (pb.first_timestamp_cs > kMaxTimestamp) fail(ErrorKind::precondition, "piggyback: timestamp exceeds 24 bits");
  Bytes out;
  out.push_back(static_cast<uint8_t>(pb.keyframes.size()));
  out.push_back(static_cast<uint8_t>(pb.first_timestamp_cs >> 16));
  out.push_back(static_cast<uint8_t>((pb.first_timestamp_cs >> 8) & 0xFF));
  out.push_back(static_cast<uint8_t>(pb.first_timestamp_cs & 0xFF));
  for (const auto& k : pb.keyframes) {
    if (k.empty() || k.size() > 255) fail(ErrorKind::precondition, "piggyback: keyframe payload must be 1-255 bytes");
    out.push_back(static_cast<uint8_t>(k.size()));
    out.insert(out.end(), k.begin(), k.end());
  }
  out.insert(out.end(), text_payload.begin(), text_payload.end());
  return out;
}

/// Splits a flagged TEXT payload into its piggyback extension and the text
/// payload proper. Throws ErrorKind::decode on malformed framing.
inline std::pair<Piggyback, Bytes> split_piggyback(ByteView payload) {
  if (payload.size() < 4) fail(ErrorKind::decode, "piggyback: truncated extension");
  Piggyback pb;
  const size_t count = payload[0];
  if (count == 0) fail(ErrorKind::decode, "piggyback: empty extension");
  pb.first_timestamp_cs =
      static_cast<uint32_t>(payload[1]) << 16 | static_cast<uint32_t>(payload[2]) << 8 | payload[3];
  size_t pos = 4;
  for (size_t i = 0; i < count; ++i) {
    if (pos >= payload.size()) fail(ErrorKind::decode, "piggyback: truncated entry");
    const size_t len = payload[pos++];
    if (len == 0 || pos + len > payload.size()) fail(ErrorKind::decode, "piggyback: truncated entry");
    pb.keyframes.emplace_back(payload.begin() + static_cast<std::ptrdiff_t>(pos),
                              payload.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return {std::move(pb), Bytes(payload.begin() + static_cast<std::ptrdiff_t>(pos), payload.end())};
}

}  // namespace semcodec::transport
