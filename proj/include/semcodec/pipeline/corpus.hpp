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


// Fixture corpus: speech-like synthetic recordings with reference
// transcripts, speaker embeddings and a CSV manifest
// (id, wav_path, transcript_path, embedding_path, duration_s).

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semcodec/data_dir.hpp"
#include "semcodec/dsp/audio.hpp"
#include "semcodec/error.hpp"
#include "semcodec/timbre/embedding.hpp"

namespace semcodec::pipeline {

/// Voice parameters of one synthetic speaker.
struct SpeakerParams {
  uint32_t id = 0;
  double f0_hz = 120.0;          // median fundamental
  double f0_range_st = 4.0;      // accent excursion in semitones
  double syllable_rate = 4.0;    // syllables per second
  double loudness = 0.25;        // peak amplitude
  double spectral_tilt = 1.2;    // harmonic k has amplitude k^-tilt
  uint64_t embedding_seed = 1;
};

inline std::vector<SpeakerParams> default_speakers() {
  return {{0, 115.0, 4.0, 4.6, 0.22, 1.3, 101}, {1, 205.0, 5.0, 5.0, 0.18, 1.1, 202},
          {2, 135.0, 3.0, 4.4, 0.28, 1.5, 303}, {3, 180.0, 6.0, 5.2, 0.20, 1.0, 404},
          {4, 98.0, 3.5, 4.8, 0.25, 1.4, 505}};
}

namespace detail {

inline size_t count_syllables(const std::string& word) {
  size_t groups = 0;
  bool in_vowel = false;
  for (char c : word) {
    const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool v = l == 'a' || l == 'e' || l == 'i' || l == 'o' || l == 'u' || l == 'y';
    if (v && !in_vowel) ++groups;
    in_vowel = v;
  }
  if (groups > 1 && word.size() > 2 && std::tolower(static_cast<unsigned char>(word.back())) == 'e') --groups;
  return std::max<size_t>(1, groups);
}

}  // namespace detail

/// Renders `text` as a speech-like signal. Macro-prosody varies slowly:
/// each phrase (up to a sentence mark) carries a declining pitch line, a
/// tempo and a level that drift from phrase to phrase, and occasional smooth
/// accents; syllables add small micro-variation. Voiced nuclei are harmonic,
/// onsets are noise, words and punctuation are separated by gaps.
/// Deterministic in (text, speaker, seed).
inline dsp::AudioBuffer synthesize_utterance(const std::string& text, const SpeakerParams& sp, uint64_t seed,
                                             int sample_rate_hz = kSampleRateHz) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double fs = sample_rate_hz;
  std::vector<double> x;
  auto silence = [&](double seconds) {
    const size_t n = static_cast<size_t>(seconds * fs);
    for (size_t i = 0; i < n; ++i) x.push_back(3e-4 * noise(rng));
  };

  std::vector<std::string> words;
  {
    std::istringstream in(text);
    for (std::string w; in >> w;) words.push_back(w);
  }

  // Phrase boundaries fall after sentence marks.
  std::vector<size_t> phrase_of(words.size());
  std::vector<size_t> phrase_syllables(1, 0);
  for (size_t i = 0; i < words.size(); ++i) {
    phrase_of[i] = phrase_syllables.size() - 1;
    phrase_syllables.back() += detail::count_syllables(words[i]);
    const char last = words[i].back();
    if ((last == '.' || last == '?' || last == '!') && i + 1 < words.size()) phrase_syllables.push_back(0);
  }

  silence(0.25);
  double phase = 0.0;
  double tempo = 1.0, level = 1.0, register_st = 0.0;
  size_t current_phrase = static_cast<size_t>(-1);
  size_t syl_in_phrase = 0;
  for (size_t wi = 0; wi < words.size(); ++wi) {
    if (phrase_of[wi] != current_phrase) {
      current_phrase = phrase_of[wi];
      syl_in_phrase = 0;
      // Slow drift between phrases.
      tempo = std::clamp(0.6 * tempo + 0.4 * (1.0 + 0.10 * noise(rng)), 0.8, 1.2);
      level = std::clamp(0.6 * level + 0.4 * (1.0 + 0.12 * noise(rng)), 0.7, 1.3);
      register_st = 0.6 * register_st + 0.4 * (1.0 * noise(rng));
    }
    const double n_phrase = std::max<double>(1.0, static_cast<double>(phrase_syllables[current_phrase]));
    const auto& w = words[wi];
    const size_t syl = detail::count_syllables(w);
    for (size_t s = 0; s < syl; ++s, ++syl_in_phrase) {
      const double dur = (1.0 / (sp.syllable_rate * tempo)) * (0.85 + 0.3 * u(rng));
      const double onset = dur * (0.15 + 0.1 * u(rng));
      const double nucleus = dur - onset;
      const bool accent = u(rng) < 0.15;
      const double stress = accent ? 1.0 : 0.8 + 0.15 * u(rng);
      const double progress = static_cast<double>(syl_in_phrase) / n_phrase;
      const double line_st = register_st + 1.5 - 3.0 * progress + 0.3 * (u(rng) - 0.5);
      const double accent_st = accent ? 0.6 * sp.f0_range_st : 0.0;
      const size_t n_on = static_cast<size_t>(onset * fs);
      for (size_t i = 0; i < n_on; ++i) {
        const double env = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_on));
        x.push_back(0.06 * sp.loudness * level * stress * env * noise(rng));
      }
      const size_t n_v = static_cast<size_t>(nucleus * fs);
      for (size_t i = 0; i < n_v; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_v);
        const double st = line_st - 0.5 * t + accent_st * std::sin(std::numbers::pi * t);
        const double f0 = sp.f0_hz * std::pow(2.0, st / 12.0);
        phase += 2.0 * std::numbers::pi * f0 / fs;
        if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
        const int harmonics = std::max(1, static_cast<int>(3800.0 / f0));
        double v = 0.0;
        for (int k = 1; k <= harmonics; ++k)
          v += std::pow(static_cast<double>(k), -sp.spectral_tilt) * std::sin(k * phase);
        const double env = std::pow(std::sin(std::numbers::pi * t), 0.5);
        x.push_back(sp.loudness * level * stress * env * 0.5 * v + 3e-4 * noise(rng));
      }
    }
    const char last = w.back();
    if (last == '.' || last == '?' || last == '!')
      silence(0.30 + 0.15 * u(rng));
    else if (last == ',' || last == ';' || last == ':')
      silence(0.12 + 0.08 * u(rng));
    else
      silence(0.02 + 0.03 * u(rng));
  }
  silence(0.30);
  return dsp::AudioBuffer::from_normalized(x, sample_rate_hz);
}

/// One row of a corpus manifest; paths are absolute after loading.
struct CorpusEntry {
  std::string id;
  std::filesystem::path wav_path;
  std::filesystem::path transcript_path;
  std::filesystem::path embedding_path;
  double duration_s = 0.0;
};

struct Corpus {
  std::vector<CorpusEntry> entries;
  std::vector<std::string> missing;  // rows whose files do not exist
};

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorKind::input, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

/// Parses a corpus CSV. Relative paths resolve against the manifest's
/// directory. Rows with missing files are listed in `missing`, not loaded.
/// A directory argument means its `manifest.csv`.
inline Corpus load_corpus(const std::filesystem::path& path) {
  const auto manifest = std::filesystem::is_directory(path) ? path / "manifest.csv" : path;
  std::ifstream in(manifest);
  if (!in) fail(ErrorKind::input, "cannot open corpus manifest " + manifest.string());
  const auto base = manifest.parent_path();
  Corpus c;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("id,")) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 5) fail(ErrorKind::input, "corpus manifest line " + std::to_string(lineno) + ": expected 5 fields");
    CorpusEntry e;
    e.id = f[0];
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path q(p);
      return q.is_absolute() ? q : base / q;
    };
    e.wav_path = resolve(f[1]);
    e.transcript_path = resolve(f[2]);
    e.embedding_path = resolve(f[3]);
    try {
      e.duration_s = std::stod(f[4]);
    } catch (const std::exception&) {
      fail(ErrorKind::input, "corpus manifest line " + std::to_string(lineno) + ": bad duration");
    }
    if (!std::filesystem::exists(e.wav_path) || !std::filesystem::exists(e.transcript_path) ||
        !std::filesystem::exists(e.embedding_path)) {
      c.missing.push_back(e.id);
      continue;
    }
    c.entries.push_back(std::move(e));
  }
  return c;
}

/// Non-empty lines of a text file.
inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorKind::input, "cannot read " + p.string());
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

/// Source transcripts shipped for fixture generation.
inline std::filesystem::path default_transcript_source() { return default_data_dir() / "corpus" / "conversational.txt"; }

/// Groups consecutive lines into utterance transcripts of at least
/// `min_chars` characters.
inline std::vector<std::string> group_transcripts(const std::vector<std::string>& lines, size_t min_chars = 150) {
  std::vector<std::string> out;
  std::string cur;
  for (const auto& l : lines) {
    if (l.empty()) continue;
    cur += (cur.empty() ? "" : " ") + l;
    if (cur.size() >= min_chars) {
      out.push_back(cur);
      cur.clear();
    }
  }
  return out;
}

struct CorpusOptions {
  size_t utterances = 20;
  uint64_t seed = 2026;
  std::vector<SpeakerParams> speakers = default_speakers();
  double embedding_spread = 0.05;  // per-utterance variation around the speaker
};

/// Writes wav/, txt/, emb/ and manifest.csv under `dir` from the source
/// transcript lines; returns the manifest path.
inline std::filesystem::path generate_corpus(const std::filesystem::path& dir, const std::vector<std::string>& lines,
                                             const CorpusOptions& opt = {}) {
  const auto transcripts = group_transcripts(lines);
  if (transcripts.empty()) fail(ErrorKind::input, "corpus generation: no source transcripts");
  if (opt.speakers.empty()) fail(ErrorKind::config, "corpus generation: no speakers");
  for (const char* sub : {"wav", "txt", "emb"}) std::filesystem::create_directories(dir / sub);
  const auto manifest = dir / "manifest.csv";
  std::ofstream csv(manifest);
  if (!csv) fail(ErrorKind::input, "cannot write " + manifest.string());
  csv << "id,wav_path,transcript_path,embedding_path,duration_s\n";
  for (size_t i = 0; i < opt.utterances; ++i) {
    const auto& sp = opt.speakers[i % opt.speakers.size()];
    const auto& text = transcripts[i % transcripts.size()];
    char id[32];
    std::snprintf(id, sizeof id, "%u-%04zu", sp.id, i);
    const auto audio = synthesize_utterance(text, sp, opt.seed * 1000003 + i);
    dsp::write_wav(dir / "wav" / (std::string(id) + ".wav"), audio);
    std::ofstream(dir / "txt" / (std::string(id) + ".txt")) << text << "\n";
    const auto base = timbre::synthetic_embedding(sp.embedding_seed);
    timbre::save_embedding(dir / "emb" / (std::string(id) + ".emb"),
                           timbre::perturbed_embedding(base, opt.seed + i, opt.embedding_spread), false);
    char dur[32];
    std::snprintf(dur, sizeof dur, "%.3f", audio.duration_s());
    csv << id << ",wav/" << id << ".wav,txt/" << id << ".txt,emb/" << id << ".emb," << dur << "\n";
  }
  return manifest;
}

/// Returns the manifest of a generated fixture corpus under `dir`, creating
/// it from the shipped transcripts unless a complete one is already there.
inline std::filesystem::path ensure_fixture_corpus(const std::filesystem::path& dir, const CorpusOptions& opt = {}) {
  const auto manifest = dir / "manifest.csv";
  if (std::filesystem::exists(manifest)) {
    const Corpus c = load_corpus(manifest);
    if (c.entries.size() == opt.utterances && c.missing.empty()) return manifest;
  }
  return generate_corpus(dir, read_lines(default_transcript_source()), opt);
}

}  // namespace semcodec::pipeline
