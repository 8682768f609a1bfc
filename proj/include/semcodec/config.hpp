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

// Quality-mode configuration: presets, YAML loading, validation and
// serialization. Every other module takes its parameters from here.

#pragma once

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semcodec/error.hpp"

namespace semcodec {

/// Prosody frame rate f_p (10 ms hop).
inline constexpr double kProsodyFrameRateHz = 100.0;
inline constexpr int kSampleRateHz = 16000;

enum class Feature : int { pitch = 0, energy = 1, rate = 2 };
inline constexpr std::array<Feature, 3> kAllFeatures = {
    Feature::pitch, Feature::energy, Feature::rate};

inline const char* to_string(Feature f) {
  switch (f) {
    case Feature::pitch: return "pitch";
    case Feature::energy: return "energy";
    case Feature::rate: return "rate";
  }
  return "?";
}

/// Subset of {pitch, energy, rate}.
struct FeatureSet {
  bool pitch = true;
  bool energy = true;
  bool rate = true;

  bool has(Feature f) const {
    switch (f) {
      case Feature::pitch: return pitch;
      case Feature::energy: return energy;
      case Feature::rate: return rate;
    }
    return false;
  }
  void set(Feature f, bool on) {
    switch (f) {
      case Feature::pitch: pitch = on; break;
      case Feature::energy: energy = on; break;
      case Feature::rate: rate = on; break;
    }
  }
  bool empty() const { return !pitch && !energy && !rate; }
  int count() const { return int(pitch) + int(energy) + int(rate); }
  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

enum class Precision { half, single };

inline const char* to_string(Precision p) {
  return p == Precision::half ? "half" : "single";
}

enum class CompressorKind { brotli, zlib };

inline const char* to_string(CompressorKind k) {
  return k == CompressorKind::brotli ? "brotli" : "zlib";
}

struct QualityModeConfig {
  std::string mode_name = "balanced";

  // Prosody stream.
  double keyframe_rate_hz = 0.5;
  FeatureSet features{};
  int bits_pitch = 6;
  int bits_energy = 5;
  int bits_rate = 5;
  double dead_zone_pitch = 0.05;
  double dead_zone_energy = 0.02;
  double dead_zone_rate = 0.05;
  int absolute_keyframe_interval = 16;

  // Timbre stream.
  int embedding_dim = 192;
  Precision embedding_precision = Precision::half;
  /// Cosine distance; a new embedding is re-sent when its similarity to the
  /// previous one drops below 1 - threshold.
  double speaker_change_threshold = 0.3;
  CompressorKind timbre_compressor = CompressorKind::brotli;

  // Text stream.
  CompressorKind text_compressor = CompressorKind::brotli;
  int text_compress_level = 5;
  bool text_preprocess = true;
  bool text_dictionary = true;
  std::string text_language = "en";

  // Audio front end.
  int sample_rate_hz = kSampleRateHz;
  int chunk_ms = 400;
  int chunk_overlap_ms = 50;
  int stt_min_buffer_chunks = 25;
  int stt_min_text_chars = 3;
  double vad_threshold = 0.5;
  int vad_min_speech_ms = 250;
  int vad_min_silence_ms = 500;
  bool push_to_talk = true;

  // Transport.
  bool piggyback_keyframes = false;
  int max_text_attempts = 8;

  // Informational / reserved.
  std::string stt_model = "small";
  std::string embedding_model = "ecapa-tdnn";
  double emotion_rate_hz = 0.0;  // reserved, not used by any stage

  int bits(Feature f) const {
    switch (f) {
      case Feature::pitch: return bits_pitch;
      case Feature::energy: return bits_energy;
      case Feature::rate: return bits_rate;
    }
    return 0;
  }
  double dead_zone(Feature f) const {
    switch (f) {
      case Feature::pitch: return dead_zone_pitch;
      case Feature::energy: return dead_zone_energy;
      case Feature::rate: return dead_zone_rate;
    }
    return 0.0;
  }
  /// Cosine-similarity threshold used by speaker change detection.
  double change_similarity_threshold() const {
    return 1.0 - speaker_change_threshold;
  }
};

/// Equality that ignores bit budgets and dead zones of disabled features,
/// which are never serialized.
inline bool operator==(const QualityModeConfig& a, const QualityModeConfig& b) {
  if (!(a.features == b.features)) return false;
  for (Feature f : kAllFeatures) {
    if (!a.features.has(f)) continue;
    if (a.bits(f) != b.bits(f) || a.dead_zone(f) != b.dead_zone(f))
      return false;
  }
  return a.mode_name == b.mode_name &&
         a.keyframe_rate_hz == b.keyframe_rate_hz &&
         a.absolute_keyframe_interval == b.absolute_keyframe_interval &&
         a.embedding_dim == b.embedding_dim &&
         a.embedding_precision == b.embedding_precision &&
         a.speaker_change_threshold == b.speaker_change_threshold &&
         a.timbre_compressor == b.timbre_compressor &&
         a.text_compressor == b.text_compressor &&
         a.text_compress_level == b.text_compress_level &&
         a.text_preprocess == b.text_preprocess &&
         a.text_dictionary == b.text_dictionary &&
         a.text_language == b.text_language &&
         a.sample_rate_hz == b.sample_rate_hz && a.chunk_ms == b.chunk_ms &&
         a.chunk_overlap_ms == b.chunk_overlap_ms &&
         a.stt_min_buffer_chunks == b.stt_min_buffer_chunks &&
         a.stt_min_text_chars == b.stt_min_text_chars &&
         a.vad_threshold == b.vad_threshold &&
         a.vad_min_speech_ms == b.vad_min_speech_ms &&
         a.vad_min_silence_ms == b.vad_min_silence_ms &&
         a.push_to_talk == b.push_to_talk &&
         a.piggyback_keyframes == b.piggyback_keyframes &&
         a.max_text_attempts == b.max_text_attempts &&
         a.stt_model == b.stt_model &&
         a.embedding_model == b.embedding_model &&
         a.emotion_rate_hz == b.emotion_rate_hz;
}

// ---------------------------------------------------------------------------
// Presets

namespace presets {

inline QualityModeConfig minimal() {
  QualityModeConfig c;
  c.mode_name = "minimal";
  c.keyframe_rate_hz = 0.1;
  c.features = {.pitch = true, .energy = false, .rate = false};
  c.bits_pitch = 3;
  c.bits_energy = 2;
  c.bits_rate = 2;
  c.text_compress_level = 9;
  c.text_preprocess = true;
  c.embedding_precision = Precision::half;
  c.speaker_change_threshold = 0.4;
  return c;
}

inline QualityModeConfig balanced() {
  QualityModeConfig c;
  c.mode_name = "balanced";
  c.keyframe_rate_hz = 0.5;
  c.features = {};
  c.bits_pitch = 6;
  c.bits_energy = 5;
  c.bits_rate = 5;
  c.text_compress_level = 5;
  c.text_preprocess = true;
  c.embedding_precision = Precision::half;
  c.speaker_change_threshold = 0.3;
  c.emotion_rate_hz = 0.2;
  return c;
}

inline QualityModeConfig high_quality() {
  QualityModeConfig c;
  c.mode_name = "high_quality";
  c.keyframe_rate_hz = 1.0;
  c.features = {};
  c.bits_pitch = 8;
  c.bits_energy = 6;
  c.bits_rate = 6;
  c.text_compress_level = 5;
  c.text_preprocess = false;
  c.embedding_precision = Precision::single;
  c.speaker_change_threshold = 0.25;
  c.chunk_ms = 300;
  c.vad_threshold = 0.4;
  c.stt_model = "distil-large-v3";
  return c;
}

}  // namespace presets

inline std::vector<std::string> preset_names() {
  return {"minimal", "balanced", "high_quality"};
}

/// Looks up a built-in preset ("high-quality" is accepted as an alias).
inline std::optional<QualityModeConfig> preset(std::string_view name) {
  if (name == "minimal") return presets::minimal();
  if (name == "balanced") return presets::balanced();
  if (name == "high_quality" || name == "high-quality")
    return presets::high_quality();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string field;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

inline ValidationReport validate_config(const QualityModeConfig& c) {
  ValidationReport r;
  auto add = [&r](std::string field, std::string msg) {
    r.push_back({std::move(field), std::move(msg)});
  };
  if (c.mode_name.empty()) add("mode_name", "mode_name must not be empty");
  if (!(c.keyframe_rate_hz > 0.0) || c.keyframe_rate_hz > kProsodyFrameRateHz ||
      !std::isfinite(c.keyframe_rate_hz))
    add("keyframe_rate_hz", "keyframe_rate_hz out of range (0, 100]");
  if (c.features.empty()) add("features", "at least one prosody feature required");
  const std::array<std::pair<const char*, int>, 3> bits = {
      {{"bits_pitch", c.bits_pitch},
       {"bits_energy", c.bits_energy},
       {"bits_rate", c.bits_rate}}};
  const std::array<std::pair<const char*, double>, 3> zones = {
      {{"dead_zone_pitch", c.dead_zone_pitch},
       {"dead_zone_energy", c.dead_zone_energy},
       {"dead_zone_rate", c.dead_zone_rate}}};
  for (Feature f : kAllFeatures) {
    if (!c.features.has(f)) continue;
    auto [bname, b] = bits[static_cast<int>(f)];
    if (b < 2 || b > 8) add(bname, std::string(bname) + " out of range [2, 8]");
    auto [zname, z] = zones[static_cast<int>(f)];
    if (!(z >= 0.0) || !std::isfinite(z))
      add(zname, std::string(zname) + " must be >= 0");
  }
  if (c.absolute_keyframe_interval < 1)
    add("absolute_keyframe_interval", "absolute_keyframe_interval must be >= 1");
  if (c.embedding_dim <= 0) add("embedding_dim", "embedding_dim must be > 0");
  if (!(c.speaker_change_threshold > 0.0 && c.speaker_change_threshold < 1.0))
    add("speaker_change_threshold", "speaker_change_threshold out of range (0, 1)");
  const int max_level = c.text_compressor == CompressorKind::brotli ? 11 : 9;
  if (c.text_compress_level < 1 || c.text_compress_level > max_level)
    add("text_compress_level", "text_compress_level out of range [1, " +
                                   std::to_string(max_level) + "]");
  if (c.text_language.empty()) add("text_language", "text_language must not be empty");
  if (c.sample_rate_hz != kSampleRateHz)
    add("sample_rate_hz", "sample_rate_hz must be 16000");
  if (c.chunk_ms <= 0) add("chunk_ms", "chunk_ms must be > 0");
  if (c.chunk_overlap_ms < 0 || c.chunk_overlap_ms >= c.chunk_ms)
    add("chunk_overlap_ms", "chunk_overlap_ms out of range [0, chunk_ms)");
  if (c.stt_min_buffer_chunks < 0)
    add("stt_min_buffer_chunks", "stt_min_buffer_chunks must be >= 0");
  if (c.stt_min_text_chars < 0)
    add("stt_min_text_chars", "stt_min_text_chars must be >= 0");
  if (!(c.vad_threshold > 0.0 && c.vad_threshold < 1.0))
    add("vad_threshold", "vad_threshold out of range (0, 1)");
  if (c.vad_min_speech_ms <= 0)
    add("vad_min_speech_ms", "vad_min_speech_ms must be > 0");
  if (c.vad_min_silence_ms < 0)
    add("vad_min_silence_ms", "vad_min_silence_ms must be >= 0");
  if (c.max_text_attempts < 1)
    add("max_text_attempts", "max_text_attempts must be >= 1");
  if (c.emotion_rate_hz < 0.0) add("emotion_rate_hz", "emotion_rate_hz must be >= 0");
  return r;
}

// ---------------------------------------------------------------------------
// YAML document I/O

namespace detail {

template <typename T>
T yaml_as(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorKind::config, "config key '" + key + "' has an invalid value");
  }
}

inline Precision parse_precision(const std::string& s, const std::string& key) {
  if (s == "half" || s == "float16") return Precision::half;
  if (s == "single" || s == "float32") return Precision::single;
  fail(ErrorKind::config, "config key '" + key + "' must be half or single");
}

/// Shortest decimal text that reads back to exactly `v`.
inline std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline CompressorKind parse_compressor(const std::string& s, const std::string& key) {
  if (s == "brotli") return CompressorKind::brotli;
  if (s == "zlib") return CompressorKind::zlib;
  fail(ErrorKind::config, "config key '" + key + "' must be brotli or zlib");
}

}  // namespace detail

inline void throw_if_invalid(const ValidationReport& report) {
  if (report.empty()) return;
  std::string msg = "invalid config: " + report.front().message;
  for (size_t i = 1; i < report.size(); ++i) msg += "; " + report[i].message;
  fail(ErrorKind::config, msg);
}

/// Parses a flat key/value YAML document. Keys not present fall back to the
/// preset named by `base` (default: balanced). Unknown keys are errors.
inline QualityModeConfig load_mode_config(std::string_view document) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::config, std::string("config parse error: ") + e.what());
  }
  if (!root.IsMap()) fail(ErrorKind::config, "config document must be a key/value map");

  QualityModeConfig c = presets::balanced();
  if (auto base = root["base"]) {
    auto name = detail::yaml_as<std::string>(base, "base");
    auto p = preset(name);
    if (!p) fail(ErrorKind::config, "config key 'base' names unknown preset '" + name + "'");
    c = *p;
  }

  static const std::set<std::string> known = {
      "base", "mode_name", "keyframe_rate_hz", "features", "bits_pitch",
      "bits_energy", "bits_rate", "dead_zone_pitch", "dead_zone_energy",
      "dead_zone_rate", "absolute_keyframe_interval", "embedding_dim",
      "embedding_precision", "speaker_change_threshold", "timbre_compressor",
      "text_compressor", "text_compress_level", "text_preprocess",
      "text_dictionary", "text_language", "sample_rate_hz", "chunk_ms",
      "chunk_overlap_ms", "stt_min_buffer_chunks", "stt_min_text_chars",
      "vad_threshold", "vad_min_speech_ms", "vad_min_silence_ms",
      "push_to_talk", "piggyback_keyframes", "max_text_attempts", "stt_model",
      "embedding_model", "emotion_rate_hz"};

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) fail(ErrorKind::config, "unknown config key '" + key + "'");
    const YAML::Node& v = kv.second;
    using detail::yaml_as;
    if (key == "base") continue;
    if (key == "mode_name") c.mode_name = yaml_as<std::string>(v, key);
    else if (key == "keyframe_rate_hz") c.keyframe_rate_hz = yaml_as<double>(v, key);
    else if (key == "features") {
      if (!v.IsSequence()) fail(ErrorKind::config, "config key 'features' must be a list");
      FeatureSet fs{false, false, false};
      for (const auto& item : v) {
        auto name = yaml_as<std::string>(item, key);
        if (name == "pitch") fs.pitch = true;
        else if (name == "energy") fs.energy = true;
        else if (name == "rate") fs.rate = true;
        else fail(ErrorKind::config, "config key 'features' has unknown feature '" + name + "'");
      }
      c.features = fs;
    }
    else if (key == "bits_pitch") c.bits_pitch = yaml_as<int>(v, key);
    else if (key == "bits_energy") c.bits_energy = yaml_as<int>(v, key);
    else if (key == "bits_rate") c.bits_rate = yaml_as<int>(v, key);
    else if (key == "dead_zone_pitch") c.dead_zone_pitch = yaml_as<double>(v, key);
    else if (key == "dead_zone_energy") c.dead_zone_energy = yaml_as<double>(v, key);
    else if (key == "dead_zone_rate") c.dead_zone_rate = yaml_as<double>(v, key);
    else if (key == "absolute_keyframe_interval") c.absolute_keyframe_interval = yaml_as<int>(v, key);
    else if (key == "embedding_dim") c.embedding_dim = yaml_as<int>(v, key);
    else if (key == "embedding_precision") c.embedding_precision = detail::parse_precision(yaml_as<std::string>(v, key), key);
    else if (key == "speaker_change_threshold") c.speaker_change_threshold = yaml_as<double>(v, key);
    else if (key == "timbre_compressor") c.timbre_compressor = detail::parse_compressor(yaml_as<std::string>(v, key), key);
    else if (key == "text_compressor") c.text_compressor = detail::parse_compressor(yaml_as<std::string>(v, key), key);
    else if (key == "text_compress_level") c.text_compress_level = yaml_as<int>(v, key);
    else if (key == "text_preprocess") c.text_preprocess = yaml_as<bool>(v, key);
    else if (key == "text_dictionary") c.text_dictionary = yaml_as<bool>(v, key);
    else if (key == "text_language") c.text_language = yaml_as<std::string>(v, key);
    else if (key == "sample_rate_hz") c.sample_rate_hz = yaml_as<int>(v, key);
    else if (key == "chunk_ms") c.chunk_ms = yaml_as<int>(v, key);
    else if (key == "chunk_overlap_ms") c.chunk_overlap_ms = yaml_as<int>(v, key);
    else if (key == "stt_min_buffer_chunks") c.stt_min_buffer_chunks = yaml_as<int>(v, key);
    else if (key == "stt_min_text_chars") c.stt_min_text_chars = yaml_as<int>(v, key);
    else if (key == "vad_threshold") c.vad_threshold = yaml_as<double>(v, key);
    else if (key == "vad_min_speech_ms") c.vad_min_speech_ms = yaml_as<int>(v, key);
    else if (key == "vad_min_silence_ms") c.vad_min_silence_ms = yaml_as<int>(v, key);
    else if (key == "push_to_talk") c.push_to_talk = yaml_as<bool>(v, key);
    else if (key == "piggyback_keyframes") c.piggyback_keyframes = yaml_as<bool>(v, key);
    else if (key == "max_text_attempts") c.max_text_attempts = yaml_as<int>(v, key);
    else if (key == "stt_model") c.stt_model = yaml_as<std::string>(v, key);
    else if (key == "embedding_model") c.embedding_model = yaml_as<std::string>(v, key);
    else if (key == "emotion_rate_hz") c.emotion_rate_hz = yaml_as<double>(v, key);
  }
  throw_if_invalid(validate_config(c));
  return c;
}

/// Emits a complete document; disabled features' parameters are omitted.
inline std::string serialize_config(const QualityModeConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "mode_name" << YAML::Value << c.mode_name;
  out << YAML::Key << "keyframe_rate_hz" << YAML::Value << detail::shortest(c.keyframe_rate_hz);
  out << YAML::Key << "features" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Feature f : kAllFeatures)
    if (c.features.has(f)) out << to_string(f);
  out << YAML::EndSeq;
  for (Feature f : kAllFeatures) {
    if (!c.features.has(f)) continue;
    out << YAML::Key << (std::string("bits_") + to_string(f)) << YAML::Value << c.bits(f);
    out << YAML::Key << (std::string("dead_zone_") + to_string(f)) << YAML::Value << detail::shortest(c.dead_zone(f));
  }
  out << YAML::Key << "absolute_keyframe_interval" << YAML::Value << c.absolute_keyframe_interval;
  out << YAML::Key << "embedding_dim" << YAML::Value << c.embedding_dim;
  out << YAML::Key << "embedding_precision" << YAML::Value << to_string(c.embedding_precision);
  out << YAML::Key << "speaker_change_threshold" << YAML::Value << detail::shortest(c.speaker_change_threshold);
  out << YAML::Key << "timbre_compressor" << YAML::Value << to_string(c.timbre_compressor);
  out << YAML::Key << "text_compressor" << YAML::Value << to_string(c.text_compressor);
  out << YAML::Key << "text_compress_level" << YAML::Value << c.text_compress_level;
  out << YAML::Key << "text_preprocess" << YAML::Value << c.text_preprocess;
  out << YAML::Key << "text_dictionary" << YAML::Value << c.text_dictionary;
  out << YAML::Key << "text_language" << YAML::Value << c.text_language;
  out << YAML::Key << "sample_rate_hz" << YAML::Value << c.sample_rate_hz;
  out << YAML::Key << "chunk_ms" << YAML::Value << c.chunk_ms;
  out << YAML::Key << "chunk_overlap_ms" << YAML::Value << c.chunk_overlap_ms;
  out << YAML::Key << "stt_min_buffer_chunks" << YAML::Value << c.stt_min_buffer_chunks;
  out << YAML::Key << "stt_min_text_chars" << YAML::Value << c.stt_min_text_chars;
  out << YAML::Key << "vad_threshold" << YAML::Value << detail::shortest(c.vad_threshold);
  out << YAML::Key << "vad_min_speech_ms" << YAML::Value << c.vad_min_speech_ms;
  out << YAML::Key << "vad_min_silence_ms" << YAML::Value << c.vad_min_silence_ms;
  out << YAML::Key << "push_to_talk" << YAML::Value << c.push_to_talk;
  out << YAML::Key << "piggyback_keyframes" << YAML::Value << c.piggyback_keyframes;
  out << YAML::Key << "max_text_attempts" << YAML::Value << c.max_text_attempts;
  out << YAML::Key << "stt_model" << YAML::Value << c.stt_model;
  out << YAML::Key << "embedding_model" << YAML::Value << c.embedding_model;
  out << YAML::Key << "emotion_rate_hz" << YAML::Value << detail::shortest(c.emotion_rate_hz);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

inline QualityModeConfig load_mode_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_mode_config(ss.str());
}

/// Resolves a `--mode` argument: a preset name or a path to a YAML document.
inline QualityModeConfig resolve_mode(std::string_view name_or_path) {
  if (auto p = preset(name_or_path)) return *p;
  std::filesystem::path path{std::string(name_or_path)};
  if (std::filesystem::exists(path)) return load_mode_file(path);
  fail(ErrorKind::config, "unknown mode '" + std::string(name_or_path) +
                              "' (expected minimal, balanced, high_quality or a config path)");
}

}  // namespace semcodec
