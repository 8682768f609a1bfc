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

// Natural cubic spline and receiver-side contour reconstruction.

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/dsp/prosody_track.hpp"
#include "semcodec/prosody/keyframes.hpp"

namespace semcodec::prosody {

/// Interpolating cubic spline with zero second derivative at both ends.
/// Outside [x_0, x_n] the end values are held.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.empty() || x_.size() != y_.size()) fail(ErrorKind::precondition, "spline: need matching, non-empty knots");
    for (size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) fail(ErrorKind::precondition, "spline: knots must be strictly increasing");
    const size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    // Tridiagonal system for interior second derivatives (Thomas algorithm).
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      a[i] = h0;
      b[i] = 2.0 * (h0 + h1);
      c[i] = h1;
      d[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (size_t i = 2; i + 1 < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 2] = d[n - 2] / b[n - 2];
    for (size_t i = n - 2; i-- > 1;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  double operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const size_t i = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

/// A keyframe as seen by the receiver.
struct ReceivedKeyframe {
  uint64_t timestamp_cs = 0;  // equals the 100 Hz frame index
  KeyframeValues values;
};

/// Neutral prosody used for disabled features or when nothing arrived.
inline double neutral_value(Feature f) { return f == Feature::energy ? 0.5 : 0.0; }

inline dsp::ProsodyTrack neutral_track(size_t frames) {
  dsp::ProsodyTrack t;
  t.frames.assign(frames, dsp::ProsodyFrame{0.0, 0.5, 0.0});
  t.voiced.assign(frames, false);
  return t;
}

/// 100 Hz track over `frames` frames through the received keyframes.
/// Pitch is interpolated through voiced keyframes only; each frame takes the
/// voicing of its nearest keyframe. Throws ErrorKind::precondition with no
/// keyframes (callers substitute neutral_track()).
inline dsp::ProsodyTrack reconstruct_contour(std::vector<ReceivedKeyframe> keys, size_t frames,
                                             const FeatureSet& features = {}) {
  if (keys.empty()) fail(ErrorKind::precondition, "reconstruct_contour: no keyframes");
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return a.timestamp_cs < b.timestamp_cs; });
  keys.erase(std::unique(keys.begin(), keys.end(),
                         [](const auto& a, const auto& b) { return a.timestamp_cs == b.timestamp_cs; }),
             keys.end());

  dsp::ProsodyTrack track = neutral_track(frames);
  for (Feature f : kAllFeatures) {
    if (!features.has(f)) continue;
    std::vector<double> xs, ys;
    for (const auto& k : keys) {
      if (f == Feature::pitch && !k.values.voiced) continue;
      xs.push_back(static_cast<double>(k.timestamp_cs));
      ys.push_back(k.values.get(f));
    }
    if (xs.empty()) continue;
    const NaturalCubicSpline spline(std::move(xs), std::move(ys));
    for (size_t t = 0; t < frames; ++t) track.frames[t].set(f, spline(static_cast<double>(t)));
  }

  size_t j = 0;
  for (size_t t = 0; t < frames; ++t) {
    while (j + 1 < keys.size() &&
           keys[j + 1].timestamp_cs <= t) ++j;
    size_t nearest = j;
    if (j + 1 < keys.size() && keys[j].timestamp_cs <= t &&
        keys[j + 1].timestamp_cs - t < t - keys[j].timestamp_cs)
      nearest = j + 1;
    track.voiced[t] = keys[nearest].values.voiced;
    if (!track.voiced[t] && features.has(Feature::pitch)) track.frames[t].f0_norm = 0.0;
  }
  return track;
}

}  // namespace semcodec::prosody
