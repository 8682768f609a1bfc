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

#include <boost/crc.hpp>

#include <cstdint>
#include <span>
#include <string_view>

namespace semcodec {

/// CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection).
inline uint16_t crc16(std::span<const uint8_t> bytes) {
  boost::crc_ccitt_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return static_cast<uint16_t>(crc.checksum());
}

inline uint16_t crc16(std::string_view text) {
  return crc16(std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

}  // namespace semcodec
