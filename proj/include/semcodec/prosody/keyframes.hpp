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

// Sparse keyframe sampling and temporal delta coding.

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/dsp/prosody_track.hpp"

namespace semcodec::prosody {

struct KeyframeSchedule {
  size_t start_frame = 0;
  size_t stride_frames = 1;
  std::vector<size_t> indices;
};

/// Stride floor(f_p / f_k) frames, first keyframe at frame 0.
inline size_t keyframe_stride(double keyframe_rate_hz) {
  if (!(keyframe_rate_hz > 0.0) || keyframe_rate_hz > kProsodyFrameRateHz)
    fail(ErrorKind::precondition, "keyframe rate must lie in (0, 100] Hz");
  // The epsilon absorbs representation error, e.g. 100 / 0.1 = 999.999...
  return static_cast<size_t>(std::floor(kProsodyFrameRateHz / keyframe_rate_hz + 1e-9));
}

inline KeyframeSchedule sample_keyframes(size_t track_frames, double keyframe_rate_hz) {
  KeyframeSchedule s;
  s.stride_frames = keyframe_stride(keyframe_rate_hz);
  for (size_t t = s.start_frame; t < track_frames; t += s.stride_frames) s.indices.push_back(t);
  return s;
}

inline KeyframeSchedule sample_keyframes(const dsp::ProsodyTrack& track, double keyframe_rate_hz) {
  return sample_keyframes(track.size(), keyframe_rate_hz);
}

/// Prosody values at one keyframe.
struct KeyframeValues {
  std::array<double, 3> values{};  // indexed by Feature
  bool voiced = false;

  double get(Feature f) const { return values[static_cast<int>(f)]; }
  friend bool operator==(const KeyframeValues&, const KeyframeValues&) = default;
};

struct DeltaVector {
  std::array<double, 3> d{};  // only enabled features are meaningful
  bool is_absolute = false;
  bool voiced = false;

  double get(Feature f) const { return d[static_cast<int>(f)]; }
};

inline std::vector<KeyframeValues> keyframe_values(const dsp::ProsodyTrack& track,
                                                   const KeyframeSchedule& schedule) {
  std::vector<KeyframeValues> out;
  out.reserve(schedule.indices.size());
  for (size_t t : schedule.indices) {
    if (t >= track.size()) fail(ErrorKind::precondition, "keyframe index beyond track");
    KeyframeValues kv;
    for (Feature f : kAllFeatures) kv.values[static_cast<int>(f)] = track.frames[t].get(f);
    kv.voiced = track.voiced[t];
    out.push_back(kv);
  }
  return out;
}

/// Keyframe k is absolute when k % absolute_every == 0 (k = 0 always).
inline bool is_absolute_keyframe(size_t k, int absolute_every) {
  return absolute_every <= 1 || k % static_cast<size_t>(absolute_every) == 0;
}

/// Element 0 carries absolute values; element k carries p[t_k] - p[t_{k-1}]
/// except at the periodic absolute refresh points.
inline std::vector<DeltaVector> delta_encode(const std::vector<KeyframeValues>& keys,
                                             int absolute_every = 16) {
  std::vector<DeltaVector> out(keys.size());
  for (size_t k = 0; k < keys.size(); ++k) {
    out[k].voiced = keys[k].voiced;
    out[k].is_absolute = is_absolute_keyframe(k, absolute_every);
    for (int f = 0; f < 3; ++f)
      out[k].d[f] = out[k].is_absolute ? keys[k].values[f] : keys[k].values[f] - keys[k - 1].values[f];
  }
  return out;
}

inline std::vector<DeltaVector> delta_encode(const dsp::ProsodyTrack& track,
                                             const KeyframeSchedule& schedule,
                                             int absolute_every = 16) {
  return delta_encode(keyframe_values(track, schedule), absolute_every);
}

/// Inverse of delta_encode: running sum reset at each absolute element.
inline std::vector<KeyframeValues> delta_decode(const std::vector<DeltaVector>& deltas) {
  std::vector<KeyframeValues> out(deltas.size());
  for (size_t k = 0; k < deltas.size(); ++k) {
    out[k].voiced = deltas[k].voiced;
    for (int f = 0; f < 3; ++f)
      out[k].values[f] = (deltas[k].is_absolute || k == 0) ? deltas[k].d[f]
                                                           : out[k - 1].values[f] + deltas[k].d[f];
  }
  return out;
}

}  // namespace semcodec::prosody
