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

// YIN fundamental-frequency estimation on the 100 Hz prosody grid.

#pragma once

#include <cmath>
#include <vector>

#include "semcodec/dsp/audio.hpp"
#include "semcodec/dsp/energy.hpp"

namespace semcodec::dsp {

struct YinOptions {
  size_t window = 400;           // 25 ms integration window
  double threshold = 0.1;        // on the cumulative-mean-normalized difference
  double min_f0_hz = 50.0;
  double max_f0_hz = 500.0;
  double silence_rms = 1e-3;     // frames below this are unvoiced outright
};

struct PitchTrack {
  std::vector<double> f0_hz;  // 0 where unvoiced
  std::vector<bool> voiced;

  size_t size() const { return f0_hz.size(); }
};

namespace detail {

/// Estimates the period (in samples) of one frame; returns 0 if aperiodic.
/// `frame` must hold window + max_lag samples.
inline double yin_period(const double* frame, size_t window, size_t min_lag,
                         size_t max_lag, double threshold,
                         std::vector<double>& diff) {
  diff.assign(max_lag + 1, 0.0);
  for (size_t tau = 1; tau <= max_lag; ++tau) {
    double d = 0.0;
    const double* shifted = frame + tau;
    for (size_t j = 0; j < window; ++j) {
      const double delta = frame[j] - shifted[j];
      d += delta * delta;
    }
    diff[tau] = d;
  }
  // Cumulative mean normalized difference, in place.
  diff[0] = 1.0;
  double running = 0.0;
  for (size_t tau = 1; tau <= max_lag; ++tau) {
    running += diff[tau];
    diff[tau] = running > 0.0 ? diff[tau] * static_cast<double>(tau) / running : 1.0;
  }
  size_t tau = min_lag;
  for (; tau <= max_lag; ++tau) {
    if (diff[tau] < threshold) {
      while (tau + 1 <= max_lag && diff[tau + 1] < diff[tau]) ++tau;
      break;
    }
  }
  if (tau > max_lag) return 0.0;
  // Parabolic refinement of the dip.
  double refined = static_cast<double>(tau);
  if (tau > 1 && tau < max_lag) {
    const double a = diff[tau - 1];
    const double b = diff[tau];
    const double c = diff[tau + 1];
    const double denom = a - 2.0 * b + c;
    if (denom > 0.0) refined += 0.5 * (a - c) / denom;
  }
  return refined;
}

}  // namespace detail

/// Per-frame F0 at 100 Hz. Frame t analyses samples starting at t * 160.
inline PitchTrack extract_pitch(const AudioBuffer& audio, const YinOptions& opt = {}) {
  if (audio.size() < opt.window)
    fail(ErrorKind::precondition, "extract_pitch: audio shorter than one analysis window");
  const double fs = audio.sample_rate_hz;
  const size_t min_lag = static_cast<size_t>(std::floor(fs / opt.max_f0_hz));
  const size_t max_lag = static_cast<size_t>(std::ceil(fs / opt.min_f0_hz));
  const size_t span = opt.window + max_lag + 1;
  const size_t frames = frame_count(audio.size(), kHopSamples);

  const std::vector<double> x = to_normalized(audio);
  PitchTrack track;
  track.f0_hz.assign(frames, 0.0);
  track.voiced.assign(frames, false);

  std::vector<double> buf(span);
  std::vector<double> diff;
  for (size_t t = 0; t < frames; ++t) {
    const size_t start = t * kHopSamples;
    double power = 0.0;
    for (size_t i = 0; i < span; ++i) {
      const size_t k = start + i;
      buf[i] = k < x.size() ? x[k] : 0.0;
      if (i < opt.window) power += buf[i] * buf[i];
    }
    if (std::sqrt(power / static_cast<double>(opt.window)) < opt.silence_rms) continue;
    const double period =
        detail::yin_period(buf.data(), opt.window, min_lag, max_lag, opt.threshold, diff);
    if (period <= 0.0) continue;
    const double f0 = fs / period;
    if (f0 < opt.min_f0_hz || f0 > opt.max_f0_hz) continue;
    track.f0_hz[t] = f0;
    track.voiced[t] = true;
  }
  return track;
}

}  // namespace semcodec::dsp
