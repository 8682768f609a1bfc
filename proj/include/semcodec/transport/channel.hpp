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


// Seeded lossy channel: independent bit flips at a given bit error rate and
// whole-packet drops.

#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "semcodec/error.hpp"
#include "semcodec/transport/header.hpp"

namespace semcodec::transport {

struct ChannelModel {
  double ber = 0.0;        // per-bit flip probability
  double drop_rate = 0.0;  // per-packet loss probability
  uint32_t rtt_ticks = 4;  // round trip of the acknowledgement path
  uint64_t seed = 1;

  void validate() const {
    if (!(ber >= 0.0 && ber <= 1.0)) fail(ErrorKind::config, "channel: ber must lie in [0, 1]");
    if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) fail(ErrorKind::config, "channel: drop_rate must lie in [0, 1]");
  }
};

struct ChannelStats {
  uint64_t packets = 0;
  uint64_t dropped = 0;
  uint64_t corrupted = 0;  // delivered with at least one flipped bit
  uint64_t bits = 0;
  uint64_t flipped_bits = 0;
};

/// Forward channel. Identical models (including seed) produce identical
/// fault schedules for identical traffic.
class Channel {
 public:
  explicit Channel(ChannelModel model) : model_(model), rng_(model.seed) {
    model_.validate();
    if (model_.ber > 0.0 && model_.ber < 1.0) gap_ = std::geometric_distribution<uint64_t>(model_.ber);
  }

  /// Returns the received bytes, or nullopt when the packet is dropped.
  std::optional<Bytes> transmit(ByteView frame) {
    ++stats_.packets;
    if (model_.drop_rate > 0.0 && unit_(rng_) < model_.drop_rate) {
      ++stats_.dropped;
      return std::nullopt;
    }
    Bytes out(frame.begin(), frame.end());
    const uint64_t nbits = out.size() * 8;
    stats_.bits += nbits;
    uint64_t flips = 0;
    if (model_.ber >= 1.0) {
      for (auto& b : out) b = static_cast<uint8_t>(~b);
      flips = nbits;
    } else if (model_.ber > 0.0) {
      // Distance to the next flipped bit is geometric; this consumes one
      // draw per flip instead of one per bit.
      for (uint64_t pos = gap_(rng_); pos < nbits; pos += 1 + gap_(rng_)) {
        out[pos / 8] ^= static_cast<uint8_t>(0x80u >> (pos % 8));
        ++flips;
      }
    }
    stats_.flipped_bits += flips;
    if (flips) ++stats_.corrupted;
    return out;
  }

  const ChannelModel& model() const { return model_; }
  const ChannelStats& stats() const { return stats_; }

 private:
  ChannelModel model_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::geometric_distribution<uint64_t> gap_{0.5};
  ChannelStats stats_;
};

}  // namespace semcodec::transport
