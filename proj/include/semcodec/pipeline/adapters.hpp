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


// Recognition and synthesis adapters. The defaults replay the reference
// transcript and emit a reconstruction manifest, so sessions run without
// any model.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "semcodec/config.hpp"
#include "semcodec/dsp/audio.hpp"
#include "semcodec/dsp/vad.hpp"
#include "semcodec/error.hpp"
#include "semcodec/pipeline/manifest.hpp"

namespace semcodec::pipeline {

/// Recognized text with its time span in the session.
struct TimedChunk {
  std::string text;
  uint32_t start_cs = 0;
  uint32_t end_cs = 0;
  friend bool operator==(const TimedChunk&, const TimedChunk&) = default;
};

class SttAdapter {
 public:
  virtual ~SttAdapter() = default;
  virtual std::string name() const = 0;
  /// Text chunks of the session, in order, each inside [0, duration].
  virtual std::vector<TimedChunk> transcribe(const dsp::AudioBuffer& audio,
                                             const std::vector<dsp::VadSegment>& segments,
                                             const QualityModeConfig& cfg) = 0;
};

class TtsAdapter {
 public:
  virtual ~TtsAdapter() = default;
  virtual std::string name() const = 0;
  /// Consumes a reconstruction; returns an opaque completion record.
  virtual nlohmann::json synthesize(const ReconstructionManifest& manifest) = 0;
};

/// Replays a reference transcript. Push-to-talk yields one chunk spanning
/// the detected speech; streaming distributes words over the VAD segments in
/// proportion to their duration.
class TranscriptReplayStt final : public SttAdapter {
 public:
  explicit TranscriptReplayStt(std::string transcript) : transcript_(std::move(transcript)) {}

  std::string name() const override { return "transcript-replay"; }

  std::vector<TimedChunk> transcribe(const dsp::AudioBuffer& audio, const std::vector<dsp::VadSegment>& segments,
                                     const QualityModeConfig& cfg) override {
    const auto duration_cs = static_cast<uint32_t>(audio.duration_s() * 100.0);
    std::vector<std::string> words;
    std::istringstream in(transcript_);
    for (std::string w; in >> w;) words.push_back(w);
    if (words.empty()) return {};

    std::vector<dsp::VadSegment> segs = segments;
    if (segs.empty()) segs.push_back({0, static_cast<int>(duration_cs) * 10});
    auto cs = [&](int ms) { return std::min<uint32_t>(static_cast<uint32_t>(std::max(ms, 0) / 10), duration_cs); };

    if (cfg.push_to_talk || segs.size() == 1)
      return {{join(words, 0, words.size()), cs(segs.front().start_ms), cs(segs.back().end_ms)}};

    double total = 0.0;
    for (const auto& s : segs) total += s.duration_ms();
    std::vector<TimedChunk> out;
    size_t next = 0;
    double acc = 0.0;
    for (size_t i = 0; i < segs.size() && next < words.size(); ++i) {
      acc += segs[i].duration_ms();
      size_t upto = i + 1 == segs.size() ? words.size()
                                         : static_cast<size_t>(std::llround(acc / total * static_cast<double>(words.size())));
      upto = std::clamp(upto, next, words.size());
      if (upto == next) continue;
      out.push_back({join(words, next, upto), cs(segs[i].start_ms), cs(segs[i].end_ms)});
      next = upto;
    }
    // Chunks must carry at least 3 characters; fold short ones forward.
    std::vector<TimedChunk> merged;
    for (auto& c : out) {
      if (!merged.empty() && merged.back().text.size() < static_cast<size_t>(cfg.stt_min_text_chars)) {
        merged.back().text += " " + c.text;
        merged.back().end_cs = c.end_cs;
      } else {
        merged.push_back(std::move(c));
      }
    }
    if (merged.size() > 1 && merged.back().text.size() < static_cast<size_t>(cfg.stt_min_text_chars)) {
      merged[merged.size() - 2].text += " " + merged.back().text;
      merged[merged.size() - 2].end_cs = merged.back().end_cs;
      merged.pop_back();
    }
    return merged;
  }

 private:
  static std::string join(const std::vector<std::string>& w, size_t a, size_t b) {
    std::string s;
    for (size_t i = a; i < b; ++i) s += (i > a ? " " : "") + w[i];
    return s;
  }

  std::string transcript_;
};

/// Writes the manifest as JSON (when a path is set) instead of audio.
class ManifestTts final : public TtsAdapter {
 public:
  explicit ManifestTts(std::filesystem::path out = {}) : out_(std::move(out)) {}

  std::string name() const override { return "manifest"; }

  nlohmann::json synthesize(const ReconstructionManifest& manifest) override {
    if (!out_.empty()) manifest.write(out_);
    return {{"status", "ok"}, {"adapter", name()}, {"path", out_.string()}};
  }

 private:
  std::filesystem::path out_;
};

}  // namespace semcodec::pipeline
