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

// Speaker statistics and speaker-normalized prosody tracks.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <vector>

#include "semcodec/dsp/audio.hpp"
#include "semcodec/dsp/energy.hpp"
#include "semcodec/dsp/pitch.hpp"
#include "semcodec/dsp/speaking_rate.hpp"

namespace semcodec::dsp {

inline constexpr double kEnergyEpsilon = 1e-6;
inline constexpr double kSigmaFloor = 0.01;
inline constexpr double kEnergySeparation = 1e-3;
inline constexpr double kEnergyNormMin = -0.25;
inline constexpr double kEnergyNormMax = 1.25;

struct SpeakerStats {
  double mu_f0 = std::log(150.0);  // mean log-pitch (log Hz)
  double sigma_f0 = 0.3;
  double e_min = 1e-3;             // 5th percentile frame RMS
  double e_max = 0.1;              // 95th percentile frame RMS
  double mu_rate = 4.0;            // syllables / s
  double sigma_rate = 1.0;
  bool fallback = false;           // pitch/rate statistics are defaults

  friend bool operator==(const SpeakerStats&, const SpeakerStats&) = default;
};

/// Raw per-frame features at 100 Hz, all of equal length.
struct RawProsody {
  std::vector<double> f0_hz;
  std::vector<bool> voiced;
  std::vector<double> energy;
  std::vector<double> rate;

  size_t size() const { return energy.size(); }
};

/// One normalized prosody vector p[t].
struct ProsodyFrame {
  double f0_norm = 0.0;
  double energy_norm = 0.0;
  double rate_norm = 0.0;

  double get(Feature f) const {
    switch (f) {
      case Feature::pitch: return f0_norm;
      case Feature::energy: return energy_norm;
      case Feature::rate: return rate_norm;
    }
    return 0.0;
  }
  void set(Feature f, double v) {
    switch (f) {
      case Feature::pitch: f0_norm = v; break;
      case Feature::energy: energy_norm = v; break;
      case Feature::rate: rate_norm = v; break;
    }
  }
  friend bool operator==(const ProsodyFrame&, const ProsodyFrame&) = default;
};

struct ProsodyTrack {
  std::vector<ProsodyFrame> frames;
  std::vector<bool> voiced;
  double frame_rate_hz = kProsodyFrameRateHz;

  size_t size() const { return frames.size(); }
  double duration_s() const { return static_cast<double>(frames.size()) / frame_rate_hz; }
};

/// Runs all three extractors over the buffer.
inline RawProsody extract_raw_prosody(const AudioBuffer& audio) {
  RawProsody raw;
  auto pitch = extract_pitch(audio);
  raw.f0_hz = std::move(pitch.f0_hz);
  raw.voiced = std::move(pitch.voiced);
  raw.energy = extract_energy(audio);
  raw.rate = extract_rate(audio);
  return raw;
}

namespace detail {

/// Linear-interpolated percentile, q in [0, 1].
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  sd = std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace detail

struct StatsOptions {
  size_t pitch_frames = 300;    // first 3 s
  size_t energy_frames = 1000;  // first 10 s
  size_t min_voiced = 10;
};

/// Energy range only; always computable. Applies the epsilon floor on e_min
/// and the e_max separation guard.
inline void estimate_energy_range(const std::vector<double>& energy, size_t frames,
                                  SpeakerStats& s) {
  std::vector<double> head(energy.begin(),
                           energy.begin() + static_cast<std::ptrdiff_t>(std::min(frames, energy.size())));
  s.e_min = std::max(detail::percentile(head, 0.05), kEnergyEpsilon);
  s.e_max = detail::percentile(head, 0.95);
  if (s.e_max < s.e_min * (1.0 + kEnergySeparation)) s.e_max = s.e_min * (1.0 + kEnergySeparation);
}

/// Speaker statistics from leading audio. Throws ErrorKind::precondition when
/// there is under 3 s of audio or too little voicing in it; callers fall back
/// to fallback_stats().
inline SpeakerStats estimate_speaker_stats(const RawProsody& raw, const StatsOptions& opt = {}) {
  if (raw.size() < opt.pitch_frames)
    fail(ErrorKind::precondition, "speaker stats need at least 3 s of audio");
  SpeakerStats s;
  std::vector<double> logs;
  for (size_t t = 0; t < opt.pitch_frames && t < raw.f0_hz.size(); ++t)
    if (raw.voiced[t] && raw.f0_hz[t] > 0.0) logs.push_back(std::log(raw.f0_hz[t]));
  if (logs.size() < opt.min_voiced)
    fail(ErrorKind::precondition,
         "insufficient voiced frames in the first 3 s; use fallback speaker statistics");
  detail::mean_std(logs, s.mu_f0, s.sigma_f0);
  s.sigma_f0 = std::max(s.sigma_f0, kSigmaFloor);

  estimate_energy_range(raw.energy, opt.energy_frames, s);

  std::vector<double> rates(raw.rate.begin(),
                            raw.rate.begin() + static_cast<std::ptrdiff_t>(std::min(opt.energy_frames, raw.rate.size())));
  detail::mean_std(rates, s.mu_rate, s.sigma_rate);
  s.sigma_rate = std::max(s.sigma_rate, kSigmaFloor);
  return s;
}

inline SpeakerStats estimate_speaker_stats(const AudioBuffer& audio, const StatsOptions& opt = {}) {
  return estimate_speaker_stats(extract_raw_prosody(audio), opt);
}

/// Default pitch/rate statistics with the energy range measured from `raw`.
inline SpeakerStats fallback_stats(const RawProsody& raw, const StatsOptions& opt = {}) {
  SpeakerStats s;
  s.fallback = true;
  if (!raw.energy.empty()) estimate_energy_range(raw.energy, opt.energy_frames, s);
  return s;
}

/// Mean log-F0 of voiced frames after the stats window minus mu_f0. The
/// statistics stay fixed for the session; this only reports drift.
inline double pitch_drift(const RawProsody& raw, const SpeakerStats& s, size_t from = 300) {
  double sum = 0.0;
  size_t n = 0;
  for (size_t t = from; t < raw.f0_hz.size(); ++t)
    if (raw.voiced[t] && raw.f0_hz[t] > 0.0) {
      sum += std::log(raw.f0_hz[t]);
      ++n;
    }
  return n ? sum / static_cast<double>(n) - s.mu_f0 : 0.0;
}

inline ProsodyTrack normalize_track(const RawProsody& raw, const SpeakerStats& s) {
  const size_t n = raw.energy.size();
  if (raw.f0_hz.size() != n || raw.voiced.size() != n || raw.rate.size() != n)
    fail(ErrorKind::precondition, "normalize_track: track lengths differ");
  if (!(s.sigma_f0 > 0.0) || !(s.sigma_rate > 0.0) || !(s.e_max > s.e_min) || s.e_min < 0.0)
    fail(ErrorKind::precondition, "normalize_track: invalid speaker statistics");

  const double log_min = std::log(std::max(s.e_min, kEnergyEpsilon));
  const double log_range = std::log(s.e_max) - log_min;
  ProsodyTrack track;
  track.frames.resize(n);
  track.voiced.assign(n, false);
  for (size_t t = 0; t < n; ++t) {
    ProsodyFrame& p = track.frames[t];
    const bool voiced = raw.voiced[t] && raw.f0_hz[t] > 0.0;
    track.voiced[t] = voiced;
    p.f0_norm = voiced ? (std::log(raw.f0_hz[t]) - s.mu_f0) / s.sigma_f0 : 0.0;
    const double e = (std::log(raw.energy[t] + kEnergyEpsilon) - log_min) / log_range;
    p.energy_norm = std::clamp(e, kEnergyNormMin, kEnergyNormMax);
    p.rate_norm = (raw.rate[t] - s.mu_rate) / s.sigma_rate;
  }
  return track;
}

/// CSV export: frame_index,f0_norm,energy_norm,rate_norm,voiced
inline void write_track_csv(std::ostream& out, const ProsodyTrack& track) {
  out << "frame_index,f0_norm,energy_norm,rate_norm,voiced\n";
  for (size_t t = 0; t < track.size(); ++t) {
    const auto& p = track.frames[t];
    out << t << ',' << p.f0_norm << ',' << p.energy_norm << ',' << p.rate_norm << ','
        << (track.voiced[t] ? 1 : 0) << '\n';
  }
}

}  // namespace semcodec::dsp
