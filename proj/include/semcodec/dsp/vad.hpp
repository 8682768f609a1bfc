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

#include <algorithm>
#include <cmath>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/dsp/audio.hpp"
#include "semcodec/dsp/prosody_track.hpp"

namespace semcodec::dsp {

inline constexpr int kVadFrameMs = 30;

struct VadSegment {
  int start_ms = 0;
  int end_ms = 0;

  int duration_ms() const { return end_ms - start_ms; }
  friend bool operator==(const VadSegment&, const VadSegment&) = default;
};

/// Per-frame speech probability on non-overlapping 30 ms frames. A neural
/// detector can be plugged in behind this interface.
class VoiceActivityDetector {
 public:
  virtual ~VoiceActivityDetector() = default;
  virtual std::vector<double> speech_probabilities(const AudioBuffer& audio) const = 0;
};

/// Log-energy detector. The decision point sits above an estimated noise
/// floor; the logistic maps dB distance from it onto [0, 1] so that the
/// configured probability threshold keeps its meaning (0.5 = decision point).
class EnergyVad final : public VoiceActivityDetector {
 public:
  struct Options {
    double floor_percentile = 0.10;
    double speech_percentile = 0.90;
    double min_dynamic_range_db = 10.0;
    double absolute_decision_db = -45.0;  // used for flat-level input
    double min_margin_db = 6.0;
    double margin_fraction = 0.3;
    double slope_db = 2.0;
  };

  EnergyVad() = default;
  explicit EnergyVad(Options opt) : opt_(opt) {}

  std::vector<double> frame_levels_db(const AudioBuffer& audio) const {
    const size_t frame = static_cast<size_t>(audio.sample_rate_hz * kVadFrameMs / 1000);
    const size_t frames = (audio.size() + frame - 1) / frame;
    std::vector<double> db(frames);
    for (size_t f = 0; f < frames; ++f) {
      double sum = 0.0;
      const size_t stop = std::min(audio.size(), (f + 1) * frame);
      for (size_t i = f * frame; i < stop; ++i) sum += audio.at(i) * audio.at(i);
      db[f] = 10.0 * std::log10(sum / static_cast<double>(frame) + 1e-12);
    }
    return db;
  }

  std::vector<double> speech_probabilities(const AudioBuffer& audio) const override {
    const auto db = frame_levels_db(audio);
    if (db.empty()) return {};
    const double floor = detail::percentile(db, opt_.floor_percentile);
    const double speech = detail::percentile(db, opt_.speech_percentile);
    double decision = opt_.absolute_decision_db;
    if (speech - floor >= opt_.min_dynamic_range_db)
      decision = floor + std::max(opt_.min_margin_db, opt_.margin_fraction * (speech - floor));
    std::vector<double> p(db.size());
    for (size_t i = 0; i < db.size(); ++i)
      p[i] = 1.0 / (1.0 + std::exp(-(db[i] - decision) / opt_.slope_db));
    return p;
  }

 private:
  Options opt_{};
};

/// Turns frame probabilities into segments: frames at or above `threshold`
/// are speech; runs separated by less than `min_silence_ms` merge; merged
/// segments shorter than `min_speech_ms` are dropped.
inline std::vector<VadSegment> segments_from_probabilities(const std::vector<double>& prob,
                                                           double threshold, int min_speech_ms,
                                                           int min_silence_ms,
                                                           int frame_ms = kVadFrameMs) {
  std::vector<VadSegment> runs;
  for (size_t i = 0; i < prob.size();) {
    if (prob[i] < threshold) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < prob.size() && prob[j] >= threshold) ++j;
    runs.push_back({static_cast<int>(i) * frame_ms, static_cast<int>(j) * frame_ms});
    i = j;
  }
  std::vector<VadSegment> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.start_ms - merged.back().end_ms < min_silence_ms)
      merged.back().end_ms = r.end_ms;
    else
      merged.push_back(r);
  }
  std::erase_if(merged, [&](const VadSegment& s) { return s.duration_ms() < min_speech_ms; });
  return merged;
}

inline std::vector<VadSegment> vad_segment(const AudioBuffer& audio, const QualityModeConfig& cfg,
                                           const VoiceActivityDetector& detector) {
  if (audio.empty()) fail(ErrorKind::precondition, "vad_segment: empty audio");
  return segments_from_probabilities(detector.speech_probabilities(audio), cfg.vad_threshold,
                                     cfg.vad_min_speech_ms, cfg.vad_min_silence_ms);
}

inline std::vector<VadSegment> vad_segment(const AudioBuffer& audio, const QualityModeConfig& cfg) {
  return vad_segment(audio, cfg, EnergyVad{});
}

}  // namespace semcodec::dsp
