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

// Keyframe encoder and decoder state machines for the prosody stream.

#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/dsp/prosody_track.hpp"
#include "semcodec/prosody/keyframes.hpp"
#include "semcodec/prosody/payload.hpp"
#include "semcodec/prosody/quantizer.hpp"
#include "semcodec/prosody/spline.hpp"

namespace semcodec::prosody {

/// Clamps a reconstructed value into the representable range of `f`.
inline double clamp_value(Feature f, double v) {
  if (f == Feature::energy) return std::clamp(v, dsp::kEnergyNormMin, dsp::kEnergyNormMax);
  return std::clamp(v, -clamp_range(f), clamp_range(f));
}

struct EncodedKeyframe {
  size_t index = 0;           // keyframe ordinal k
  uint32_t timestamp_cs = 0;  // frame index at 100 Hz
  KeyframeValues values;      // original (unquantized) values
  KeyframeCodes codes;
  BitString bits;
  /// Worst-case |reconstructed - original| per feature on a loss-free stream.
  std::array<double, 3> error_bound{};

  bool is_absolute() const { return codes.is_absolute; }
};

class ProsodyEncoder {
 public:
  explicit ProsodyEncoder(const QualityModeConfig& cfg) : cfg_(cfg), coder_(cfg) {}

  std::vector<EncodedKeyframe> encode(const dsp::ProsodyTrack& track) const {
    const auto schedule = sample_keyframes(track, cfg_.keyframe_rate_hz);
    auto values = keyframe_values(track, schedule);
    for (auto& v : values)
      if (!v.voiced) v.values[static_cast<int>(Feature::pitch)] = 0.0;
    // Deltas run between saturated values, as the decoder holds them, so
    // saturation at one keyframe does not leak into the next.
    auto held = values;
    for (auto& v : held)
      for (Feature f : kAllFeatures) v.values[static_cast<int>(f)] = clamp_value(f, v.get(f));
    const auto deltas = delta_encode(held, cfg_.absolute_keyframe_interval);

    std::vector<EncodedKeyframe> out(values.size());
    std::array<double, 3> chain{};
    for (size_t k = 0; k < values.size(); ++k) {
      EncodedKeyframe& e = out[k];
      e.index = k;
      e.timestamp_cs = static_cast<uint32_t>(schedule.indices[k]);
      e.values = values[k];
      e.codes.voiced = deltas[k].voiced;
      e.codes.is_absolute = deltas[k].is_absolute;
      for (Feature f : kAllFeatures) {
        const int fi = static_cast<int>(f);
        if (!coder_.carries(f, e.codes.voiced)) {
          chain[fi] = 0.0;
          continue;
        }
        const auto q = quantizer_for(f, cfg_);
        e.codes.codes[fi] = quantize(deltas[k].d[fi], q);
        const double step_bound = quantization_error_bound(deltas[k].d[fi], q);
        // A voiced pitch keyframe after an unvoiced one starts from an exact 0.
        chain[fi] = e.codes.is_absolute ? step_bound : chain[fi] + step_bound;
        const double beyond = std::abs(values[k].values[fi] - held[k].values[fi]);
        e.error_bound[fi] = chain[fi] + beyond;
      }
      e.bits = coder_.encode(e.codes);
    }
    return out;
  }

  const ProsodyEntropyCoder& coder() const { return coder_; }
  const QualityModeConfig& config() const { return cfg_; }

 private:
  QualityModeConfig cfg_;
  ProsodyEntropyCoder coder_;
};

/// Receiver state: applies deltas to the last reconstructed keyframe. A
/// missing predecessor (detected from the keyframe cadence or signalled via
/// mark_lost) invalidates the chain until the next absolute keyframe.
class ProsodyDecoder {
 public:
  explicit ProsodyDecoder(const QualityModeConfig& cfg)
      : cfg_(cfg), coder_(cfg), stride_(keyframe_stride(cfg.keyframe_rate_hz)) {}

  /// Returns the reconstructed keyframe, or nullopt when it cannot be
  /// applied. Throws ErrorKind::decode on a malformed payload.
  std::optional<ReceivedKeyframe> accept(uint64_t timestamp_cs, const BitString& bits) {
    const KeyframeCodes codes = coder_.decode(bits);
    return accept_codes(timestamp_cs, codes);
  }

  std::optional<ReceivedKeyframe> accept_codes(uint64_t timestamp_cs, const KeyframeCodes& codes) {
    const bool contiguous = last_ts_ && timestamp_cs == *last_ts_ + stride_;
    if (!codes.is_absolute && !(chain_ok_ && contiguous)) {
      chain_ok_ = false;
      ++discarded_;
      return std::nullopt;
    }
    KeyframeValues v;
    v.voiced = codes.voiced;
    for (Feature f : kAllFeatures) {
      const int fi = static_cast<int>(f);
      if (!coder_.carries(f, codes.voiced)) {
        v.values[fi] = cfg_.features.has(f) ? 0.0 : neutral_value(f);
        continue;
      }
      const double d = dequantize(codes.get(f), quantizer_for(f, cfg_));
      v.values[fi] = clamp_value(f, codes.is_absolute ? d : prev_.values[fi] + d);
    }
    prev_ = v;
    last_ts_ = timestamp_cs;
    chain_ok_ = true;
    keyframes_.push_back({timestamp_cs, v});
    return keyframes_.back();
  }

  /// Signals a keyframe that will never arrive.
  void mark_lost() { chain_ok_ = false; }

  const std::vector<ReceivedKeyframe>& keyframes() const { return keyframes_; }
  size_t discarded() const { return discarded_; }

  /// Full-rate track; neutral prosody when nothing was received.
  dsp::ProsodyTrack reconstruct(size_t frames) const {
    if (keyframes_.empty()) return neutral_track(frames);
    return reconstruct_contour(keyframes_, frames, cfg_.features);
  }

 private:
  QualityModeConfig cfg_;
  ProsodyEntropyCoder coder_;
  size_t stride_;
  KeyframeValues prev_;
  std::optional<uint64_t> last_ts_;
  bool chain_ok_ = false;
  size_t discarded_ = 0;
  std::vector<ReceivedKeyframe> keyframes_;
};

}  // namespace semcodec::prosody
