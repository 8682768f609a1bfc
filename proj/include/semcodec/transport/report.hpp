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


// Bitrate accounting. Component columns count payload bits only; the wire
// figure adds headers, checksums, piggyback framing and retransmissions.

#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "json.hpp"
#include "semcodec/error.hpp"

namespace semcodec::transport {

/// Exact integer bit counts of one session.
struct BitCounts {
  uint64_t text = 0;     // distinct TEXT payload bits (excluding piggybacked prosody)
  uint64_t prosody = 0;  // distinct prosody keyframe payload bits
  uint64_t timbre = 0;   // distinct TIMBRE and TIMBRE_PROFILE payload bits
  uint64_t wire_overhead = 0;  // header + checksum + framing bits, every transmission
  uint64_t wire_payload = 0;   // content bits, every transmission

  uint64_t wire_total() const { return wire_overhead + wire_payload; }
};

struct BitrateReport {
  double duration_s = 0.0;
  double text_bps = 0.0;
  double prosody_bps = 0.0;
  double timbre_bps = 0.0;  // amortized over the session
  double total_excl_timbre_bps = 0.0;
  double total_bps = 0.0;
  double wire_bps = 0.0;
  double header_overhead_fraction = 0.0;
  BitCounts bits;

  nlohmann::json to_json() const {
    return {{"duration_s", duration_s},
            {"text_bps", text_bps},
            {"prosody_bps", prosody_bps},
            {"timbre_bps", timbre_bps},
            {"total_excl_timbre_bps", total_excl_timbre_bps},
            {"total_bps", total_bps},
            {"wire_bps", wire_bps},
            {"header_overhead_fraction", header_overhead_fraction},
            {"bits",
             {{"text", bits.text},
              {"prosody", bits.prosody},
              {"timbre", bits.timbre},
              {"wire_overhead", bits.wire_overhead},
              {"wire_payload", bits.wire_payload}}}};
  }

  static std::string csv_header() {
    return "duration_s,text_bps,prosody_bps,timbre_bps,total_excl_timbre_bps,total_bps,wire_bps,"
           "header_overhead_fraction";
  }
  std::string csv_row() const {
    std::ostringstream o;
    o.precision(10);
    o << duration_s << ',' << text_bps << ',' << prosody_bps << ',' << timbre_bps << ',' << total_excl_timbre_bps
      << ',' << total_bps << ',' << wire_bps << ',' << header_overhead_fraction;
    return o.str();
  }
};

/// Amortized rate of a one-off payload: 8 * bytes / seconds.
inline double amortized_bps(uint64_t bytes, double duration_s) {
  if (!(duration_s > 0.0)) fail(ErrorKind::precondition, "bitrate: duration must be positive");
  return 8.0 * static_cast<double>(bytes) / duration_s;
}

/// Throws ErrorKind::precondition on a non-positive duration.
inline BitrateReport account_bitrate(const BitCounts& b, double duration_s) {
  if (!(duration_s > 0.0)) fail(ErrorKind::precondition, "bitrate: duration must be positive");
  BitrateReport r;
  r.duration_s = duration_s;
  r.bits = b;
  r.text_bps = static_cast<double>(b.text) / duration_s;
  r.prosody_bps = static_cast<double>(b.prosody) / duration_s;
  r.timbre_bps = static_cast<double>(b.timbre) / duration_s;
  r.total_excl_timbre_bps = r.text_bps + r.prosody_bps;
  r.total_bps = r.total_excl_timbre_bps + r.timbre_bps;
  r.wire_bps = static_cast<double>(b.wire_total()) / duration_s;
  r.header_overhead_fraction =
      b.wire_total() ? static_cast<double>(b.wire_overhead) / static_cast<double>(b.wire_total()) : 0.0;
  return r;
}

}  // namespace semcodec::transport
