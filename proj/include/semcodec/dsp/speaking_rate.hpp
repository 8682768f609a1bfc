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

// Speaking rate from syllable-nucleus counting on a band-limited envelope.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "semcodec/dsp/audio.hpp"
#include "semcodec/dsp/energy.hpp"

namespace semcodec::dsp {

/// Second-order section, RBJ cookbook coefficients, direct form I.
class Biquad {
 public:
  static Biquad lowpass(double fs, double f0, double q = std::numbers::sqrt2 / 2) {
    const double w = 2.0 * std::numbers::pi * f0 / fs;
    const double alpha = std::sin(w) / (2.0 * q);
    const double c = std::cos(w);
    return Biquad((1 - c) / 2, 1 - c, (1 - c) / 2, 1 + alpha, -2 * c, 1 - alpha);
  }
  static Biquad highpass(double fs, double f0, double q = std::numbers::sqrt2 / 2) {
    const double w = 2.0 * std::numbers::pi * f0 / fs;
    const double alpha = std::sin(w) / (2.0 * q);
    const double c = std::cos(w);
    return Biquad((1 + c) / 2, -(1 + c), (1 + c) / 2, 1 + alpha, -2 * c, 1 - alpha);
  }

  double process(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  Biquad(double b0, double b1, double b2, double a0, double a1, double a2)
      : b0_(b0 / a0), b1_(b1 / a0), b2_(b2 / a0), a1_(a1 / a0), a2_(a2 / a0) {}

  double b0_, b1_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

struct RateOptions {
  double band_low_hz = 300.0;
  double band_high_hz = 3000.0;
  size_t envelope_window = 320;   // 20 ms RMS window per 10 ms frame
  size_t smoothing_frames = 5;    // centered moving average
  double mad_scale = 1.5;         // threshold = median + mad_scale * MAD
  double max_threshold_ratio = 0.5;  // threshold never above this * max envelope
  size_t min_separation_frames = 5;  // 50 ms
  double dip_ratio = 0.8;         // envelope must dip below this * smaller peak
  double floor = 1e-4;            // absolute envelope floor for a nucleus
  size_t window_frames = 100;     // T_w = 1 s
};

namespace detail {

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

}  // namespace detail

/// Smoothed band-limited (300-3000 Hz) RMS envelope on the 100 Hz grid.
inline std::vector<double> syllable_envelope(const AudioBuffer& audio,
                                             const RateOptions& opt = {}) {
  const double fs = audio.sample_rate_hz;
  Biquad hp = Biquad::highpass(fs, opt.band_low_hz);
  Biquad lp = Biquad::lowpass(fs, opt.band_high_hz);
  std::vector<double> y(audio.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = lp.process(hp.process(audio.at(i)));

  const size_t frames = frame_count(audio.size(), kHopSamples);
  std::vector<double> raw(frames);
  for (size_t t = 0; t < frames; ++t) {
    const size_t start = t * kHopSamples;
    const size_t stop = std::min(y.size(), start + opt.envelope_window);
    double sum = 0.0;
    for (size_t i = start; i < stop; ++i) sum += y[i] * y[i];
    raw[t] = std::sqrt(sum / static_cast<double>(opt.envelope_window));
  }
  std::vector<double> env(frames);
  const auto half = static_cast<std::ptrdiff_t>(opt.smoothing_frames / 2);
  for (size_t t = 0; t < frames; ++t) {
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(t) - half);
    const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(frames) - 1,
                                             static_cast<std::ptrdiff_t>(t) + half);
    double sum = 0.0;
    for (auto k = lo; k <= hi; ++k) sum += raw[static_cast<size_t>(k)];
    env[t] = sum / static_cast<double>(hi - lo + 1);
  }
  return env;
}

/// Frame indices of detected syllable nuclei, ascending.
inline std::vector<size_t> detect_nuclei(const std::vector<double>& env,
                                         const RateOptions& opt = {}) {
  if (env.size() < 3) return {};
  const double med = detail::median_of(env);
  std::vector<double> dev(env.size());
  for (size_t i = 0; i < env.size(); ++i) dev[i] = std::abs(env[i] - med);
  const double mad = detail::median_of(dev);
  const double peak = *std::max_element(env.begin(), env.end());
  const double threshold = std::max(
      opt.floor, std::min(med + opt.mad_scale * mad, opt.max_threshold_ratio * peak));

  std::vector<size_t> candidates;
  for (size_t t = 1; t + 1 < env.size(); ++t) {
    if (env[t] > threshold && env[t] > env[t - 1] && env[t] >= env[t + 1])
      candidates.push_back(t);
  }
  // Strongest-first selection under the minimum-separation rule.
  std::vector<size_t> order(candidates.begin(), candidates.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return env[a] > env[b]; });
  std::vector<size_t> accepted;
  for (size_t c : order) {
    bool clash = false;
    for (size_t a : accepted) {
      const size_t gap = a > c ? a - c : c - a;
      if (gap < opt.min_separation_frames) {
        clash = true;
        break;
      }
    }
    if (!clash) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end());

  // Merge neighbours not separated by a real dip; keep the larger peak.
  bool merged = true;
  while (merged && accepted.size() > 1) {
    merged = false;
    for (size_t i = 0; i + 1 < accepted.size(); ++i) {
      const size_t a = accepted[i];
      const size_t b = accepted[i + 1];
      const double lowest = *std::min_element(env.begin() + static_cast<std::ptrdiff_t>(a),
                                              env.begin() + static_cast<std::ptrdiff_t>(b) + 1);
      if (lowest > opt.dip_ratio * std::min(env[a], env[b])) {
        accepted.erase(accepted.begin() + static_cast<std::ptrdiff_t>(env[a] >= env[b] ? i + 1 : i));
        merged = true;
        break;
      }
    }
  }
  return accepted;
}

/// R[t]: nuclei per second in a 1 s window centered on frame t.
inline std::vector<double> extract_rate(const AudioBuffer& audio, const RateOptions& opt = {}) {
  if (audio.empty()) fail(ErrorKind::precondition, "extract_rate: empty audio");
  const auto env = syllable_envelope(audio, opt);
  const auto nuclei = detect_nuclei(env, opt);
  const size_t frames = env.size();
  std::vector<int> marks(frames + 1, 0);
  for (size_t n : nuclei) marks[n + 1] = 1;
  for (size_t i = 1; i <= frames; ++i) marks[i] += marks[i - 1];  // prefix counts

  const double window_s = static_cast<double>(opt.window_frames) / kProsodyFrameRateHz;
  const auto half = static_cast<std::ptrdiff_t>(opt.window_frames / 2);
  std::vector<double> rate(frames);
  for (size_t t = 0; t < frames; ++t) {
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(t) - half);
    const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(frames),
                                             static_cast<std::ptrdiff_t>(t) + half);
    rate[t] = (marks[static_cast<size_t>(hi)] - marks[static_cast<size_t>(lo)]) / window_s;
  }
  return rate;
}

}  // namespace semcodec::dsp
