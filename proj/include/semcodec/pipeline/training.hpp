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


// Refits the prosody codebook training models on a synthetic training
// corpus, independent of the evaluation fixtures.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/dsp/prosody_track.hpp"
#include "semcodec/pipeline/corpus.hpp"
#include "semcodec/prosody/huffman.hpp"
#include "semcodec/prosody/keyframes.hpp"
#include "semcodec/prosody/prosody_codec.hpp"

namespace semcodec::pipeline {

struct TrainingOptions {
  size_t utterances = 40;
  uint64_t seed = 7;
};

struct FittedModel {
  std::string mode;  // preset whose keyframe rate produced the deltas
  Feature feature = Feature::pitch;
  int bits = 0;
  double keyframe_rate_hz = 0.0;
  size_t samples = 0;
  prosody::TrainingModel model;
};

/// Normalized tracks of the training corpus.
inline std::vector<dsp::ProsodyTrack> training_tracks(const TrainingOptions& opt = {}) {
  const auto transcripts = group_transcripts(read_lines(default_transcript_source()));
  if (transcripts.empty()) fail(ErrorKind::input, "training: no source transcripts");
  const auto speakers = default_speakers();
  std::vector<dsp::ProsodyTrack> out;
  for (size_t i = 0; i < opt.utterances; ++i) {
    const auto& text = transcripts[(i * 7 + opt.seed) % transcripts.size()];
    const auto audio = synthesize_utterance(text, speakers[i % speakers.size()], opt.seed * 1000003 + i);
    const auto raw = dsp::extract_raw_prosody(audio);
    dsp::SpeakerStats stats;
    try {
      stats = dsp::estimate_speaker_stats(raw);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::precondition) throw;
      stats = dsp::fallback_stats(raw);
    }
    out.push_back(dsp::normalize_track(raw, stats));
  }
  return out;
}

/// Inter-keyframe deltas of one feature as the encoder forms them (pitch
/// only across voiced keyframes).
inline std::vector<double> training_deltas(const std::vector<dsp::ProsodyTrack>& tracks, const QualityModeConfig& cfg,
                                           Feature f) {
  std::vector<double> out;
  for (const auto& t : tracks) {
    auto values = prosody::keyframe_values(t, prosody::sample_keyframes(t, cfg.keyframe_rate_hz));
    for (auto& v : values) {
      if (!v.voiced) v.values[static_cast<int>(Feature::pitch)] = 0.0;
      for (Feature g : kAllFeatures) v.values[static_cast<int>(g)] = prosody::clamp_value(g, v.get(g));
    }
    for (const auto& d : prosody::delta_encode(values, cfg.absolute_keyframe_interval)) {
      if (f == Feature::pitch && !d.voiced) continue;
      out.push_back(d.d[static_cast<int>(f)]);
    }
  }
  return out;
}

/// Parameters are kept to three decimals, the precision compiled into the
/// shipped tables.
inline prosody::TrainingModel rounded(prosody::TrainingModel m) {
  m.p_zero = std::round(m.p_zero * 1000.0) / 1000.0;
  m.scale = std::round(m.scale * 1000.0) / 1000.0;
  return m;
}

/// One fit per (preset, enabled feature), rounded as compiled in.
inline std::vector<FittedModel> fit_codebook_models(const TrainingOptions& opt = {}) {
  const auto tracks = training_tracks(opt);
  std::vector<FittedModel> out;
  for (const auto& name : preset_names()) {
    const auto cfg = *preset(name);
    for (Feature f : kAllFeatures) {
      if (!cfg.features.has(f)) continue;
      const auto deltas = training_deltas(tracks, cfg, f);
      out.push_back({name, f, cfg.bits(f), cfg.keyframe_rate_hz, deltas.size(),
                     rounded(prosody::fit_training_model(deltas, cfg.dead_zone(f), prosody::clamp_range(f)))});
    }
  }
  return out;
}

/// Model for (feature, bits): the fit at that depth, else the balanced fit.
inline prosody::TrainingModel select_model(const std::vector<FittedModel>& fits, Feature f, int bits) {
  const FittedModel* fallback = nullptr;
  for (const auto& m : fits) {
    if (m.feature != f) continue;
    if (m.bits == bits) return m.model;
    if (m.mode == "balanced") fallback = &m;
  }
  if (!fallback) fail(ErrorKind::precondition, "no fitted model for feature " + std::string(to_string(f)));
  return fallback->model;
}

/// Writes <feature>_<bits>.txt for bit depths 2-8 from the fitted models.
inline void write_codebooks(const std::filesystem::path& dir, const std::vector<FittedModel>& fits) {
  std::filesystem::create_directories(dir);
  for (Feature f : kAllFeatures)
    for (int bits = 2; bits <= 8; ++bits) {
      const prosody::QuantizerSpec q{bits, 0.0, prosody::clamp_range(f)};
      const prosody::HuffmanCodebook book(
          q.max_code(), prosody::huffman_lengths(prosody::training_distribution(q, select_model(fits, f, bits))));
      std::ofstream out(dir / (std::string(to_string(f)) + "_" + std::to_string(bits) + ".txt"));
      if (!out) fail(ErrorKind::input, "cannot write codebook into " + dir.string());
      book.write(out, f, bits);
    }
}

}  // namespace semcodec::pipeline
