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


// Packet header: 6 bytes, or 8 bytes when a length field is present.
//
//   byte 0    : version(2) | ptype(3) | priority(2) | flags(1)   (MSB first)
//   bytes 1-2 : sequence number, big endian
//   bytes 3-5 : timestamp in centiseconds (24 bits), big endian
//   bytes 6-7 : payload length, big endian (TEXT and TIMBRE only)

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semcodec/error.hpp"

namespace semcodec::transport {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline constexpr uint8_t kProtocolVersion = 1;
inline constexpr size_t kShortHeaderBytes = 6;
inline constexpr size_t kLongHeaderBytes = 8;
inline constexpr uint32_t kMaxTimestamp = (1u << 24) - 1;

enum class PacketType : uint8_t { text = 0, prosody_key = 1, prosody_delta = 2, timbre = 3, timbre_profile = 4 };
inline constexpr PacketType kAllPacketTypes[] = {PacketType::text, PacketType::prosody_key,
                                                 PacketType::prosody_delta, PacketType::timbre,
                                                 PacketType::timbre_profile};

enum class Priority : uint8_t { high = 0, medium = 1, low = 2 };

inline const char* to_string(PacketType t) {
  switch (t) {
    case PacketType::text: return "TEXT";
    case PacketType::prosody_key: return "PROSODY_KEY";
    case PacketType::prosody_delta: return "PROSODY_DELTA";
    case PacketType::timbre: return "TIMBRE";
    case PacketType::timbre_profile: return "TIMBRE_PROFILE";
  }
  return "?";
}

inline const char* to_string(Priority p) {
  switch (p) {
    case Priority::high: return "HIGH";
    case Priority::medium: return "MEDIUM";
    case Priority::low: return "LOW";
  }
  return "?";
}

/// Fixed class of service per stream.
inline Priority priority_of(PacketType t) {
  switch (t) {
    case PacketType::text:
    case PacketType::timbre:
    case PacketType::timbre_profile: return Priority::high;
    case PacketType::prosody_key: return Priority::medium;
    case PacketType::prosody_delta: return Priority::low;
  }
  return Priority::low;
}

inline bool has_length_field(PacketType t) { return t == PacketType::text || t == PacketType::timbre; }

struct PacketHeader {
  uint8_t version = kProtocolVersion;
  PacketType ptype = PacketType::text;
  Priority priority = Priority::high;
  bool flags = false;
  uint16_t seq = 0;
  uint32_t timestamp_cs = 0;  // 24 bits
  uint16_t length = 0;        // meaningful only when has_length_field(ptype)

  size_t size() const { return has_length_field(ptype) ? kLongHeaderBytes : kShortHeaderBytes; }
  friend bool operator==(const PacketHeader&, const PacketHeader&) = default;
};

/// Serializes `h`. Throws ErrorKind::precondition when a field is out of
/// range.
inline Bytes build_header(const PacketHeader& h) {
  if (h.version > 3) fail(ErrorKind::precondition, "header: version exceeds 2 bits");
  if (static_cast<uint8_t>(h.ptype) > 4) fail(ErrorKind::precondition, "header: unknown packet type");
  if (static_cast<uint8_t>(h.priority) > 2) fail(ErrorKind::precondition, "header: unknown priority");
  if (h.timestamp_cs > kMaxTimestamp) fail(ErrorKind::precondition, "header: timestamp exceeds 24 bits");
  Bytes out;
  out.reserve(h.size());
  out.push_back(static_cast<uint8_t>(h.version << 6 | static_cast<uint8_t>(h.ptype) << 3 |
                                     static_cast<uint8_t>(h.priority) << 1 | (h.flags ? 1 : 0)));
  out.push_back(static_cast<uint8_t>(h.seq >> 8));
  out.push_back(static_cast<uint8_t>(h.seq & 0xFF));
  out.push_back(static_cast<uint8_t>(h.timestamp_cs >> 16));
  out.push_back(static_cast<uint8_t>((h.timestamp_cs >> 8) & 0xFF));
  out.push_back(static_cast<uint8_t>(h.timestamp_cs & 0xFF));
  if (has_length_field(h.ptype)) {
    out.push_back(static_cast<uint8_t>(h.length >> 8));
    out.push_back(static_cast<uint8_t>(h.length & 0xFF));
  }
  return out;
}

/// Parses a header from the front of `bytes`. Throws ErrorKind::decode on an
/// unknown version, type or priority, or a truncated buffer.
inline PacketHeader parse_header(ByteView bytes) {
  if (bytes.size() < kShortHeaderBytes) fail(ErrorKind::decode, "header: truncated");
  PacketHeader h;
  h.version = bytes[0] >> 6;
  if (h.version != kProtocolVersion) fail(ErrorKind::decode, "header: unsupported version " + std::to_string(h.version));
  const uint8_t t = (bytes[0] >> 3) & 0x07;
  if (t > 4) fail(ErrorKind::decode, "header: unknown packet type " + std::to_string(t));
  h.ptype = static_cast<PacketType>(t);
  const uint8_t p = (bytes[0] >> 1) & 0x03;
  if (p > 2) fail(ErrorKind::decode, "header: unknown priority");
  h.priority = static_cast<Priority>(p);
  h.flags = bytes[0] & 0x01;
  h.seq = static_cast<uint16_t>(bytes[1] << 8 | bytes[2]);
  h.timestamp_cs = static_cast<uint32_t>(bytes[3]) << 16 | static_cast<uint32_t>(bytes[4]) << 8 | bytes[5];
  if (has_length_field(h.ptype)) {
    if (bytes.size() < kLongHeaderBytes) fail(ErrorKind::decode, "header: truncated length field");
    h.length = static_cast<uint16_t>(bytes[6] << 8 | bytes[7]);
  }
  return h;
}

}  // namespace semcodec::transport
