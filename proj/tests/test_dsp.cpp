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

// Prosody feature extraction: energy, YIN pitch, speaking rate, VAD,
// speaker statistics and normalization.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "semcodec/dsp/audio.hpp"
#include "semcodec/dsp/energy.hpp"
#include "semcodec/dsp/pitch.hpp"
#include "semcodec/dsp/prosody_track.hpp"
#include "semcodec/dsp/speaking_rate.hpp"
#include "semcodec/dsp/vad.hpp"

using namespace semcodec;
using namespace semcodec::dsp;
using Catch::Approx;

namespace {

constexpr double kFs = 16000.0;

std::vector<double> sine(double freq, double amp, double seconds, double phase = 0.0) {
  std::vector<double> x(static_cast<size_t>(seconds * kFs));
  for (size_t i = 0; i < x.size(); ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / kFs + phase);
  return x;
}

std::vector<double> silence(double seconds) { return std::vector<double>(static_cast<size_t>(seconds * kFs), 0.0); }

std::vector<double> concat(std::initializer_list<std::vector<double>> parts) {
  std::vector<double> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

AudioBuffer buffer(const std::vector<double>& x) { return AudioBuffer::from_normalized(x); }

std::vector<double> white_noise(double seconds, double amp, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> x(static_cast<size_t>(seconds * kFs));
  for (double& v : x) v = u(rng);
  return x;
}

/// Naive O(N * Nw) frame RMS, written independently of the library.
std::vector<double> naive_energy(const AudioBuffer& a) {
  std::vector<double> e;
  for (size_t start = 0; start < a.size(); start += 160) {
    double sum = 0.0;
    for (size_t i = 0; i < 640; ++i) {
      const double v = start + i < a.size() ? a.samples[start + i] / 32768.0 : 0.0;
      sum += v * v;
    }
    e.push_back(std::sqrt(sum / 640.0));
  }
  return e;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

// ---------------------------------------------------------------- audio I/O

TEST_CASE("WAV encode/parse round-trips 16-bit mono PCM", "[dsp][audio]") {
  const auto a = buffer(white_noise(0.25, 0.5, 3));
  const auto b = parse_wav(encode_wav(a));
  CHECK(b.samples == a.samples);
  CHECK(b.sample_rate_hz == 16000);
}

TEST_CASE("WAV parser rejects unsupported formats", "[dsp][audio]") {
  auto bytes = encode_wav(buffer(sine(100, 0.1, 0.1)));
  bytes[24] = 0x44;  // sample rate 44100 -> low byte changed
  CHECK_THROWS_AS(parse_wav(bytes), Error);
  CHECK_THROWS_AS(parse_wav(std::vector<uint8_t>{'R', 'I', 'F', 'F'}), Error);
}

// ------------------------------------------------------------------- energy

TEST_CASE("energy of a constant 0.5 signal is 0.5 on full frames", "[dsp][energy]") {
  const auto e = extract_energy(buffer(std::vector<double>(16000, 0.5)));
  REQUIRE(e.size() == 100);
  for (size_t t = 0; t + 4 <= e.size(); ++t) CHECK(e[t] == Approx(0.5).margin(1e-12));
}

TEST_CASE("energy of silence is zero", "[dsp][energy]") {
  for (double v : extract_energy(buffer(silence(1.0)))) CHECK(v == 0.0);
}

TEST_CASE("energy of a 0.5-amplitude sine is 0.5/sqrt(2)", "[dsp][energy]") {
  const auto e = extract_energy(buffer(sine(250.0, 0.5, 1.0)));
  for (size_t t = 0; t + 4 <= e.size(); ++t) CHECK(e[t] == Approx(0.5 / std::sqrt(2.0)).margin(1e-3));
}

TEST_CASE("energy equals naive direct summation exactly", "[dsp][energy]") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> len(640, 20000);
    const auto a = buffer(white_noise(len(rng) / kFs, 0.9, seed));
    const auto e = extract_energy(a);
    REQUIRE(e.size() == frame_count(a.size()));
    CHECK(e == naive_energy(a));
  }
}

// -------------------------------------------------------------------- pitch

TEST_CASE("YIN tracks a 220 Hz sine", "[dsp][pitch]") {
  const auto p = extract_pitch(buffer(sine(220.0, 0.5, 1.0)));
  std::vector<double> voiced;
  for (size_t t = 0; t < p.size(); ++t)
    if (p.voiced[t]) voiced.push_back(p.f0_hz[t]);
  CHECK(static_cast<double>(voiced.size()) >= 0.95 * static_cast<double>(p.size()) - 3);
  CHECK(median(voiced) == Approx(220.0).margin(2.0));
}

TEST_CASE("YIN output stays within 50-500 Hz across the range", "[dsp][pitch]") {
  for (double f : {60.0, 100.0, 150.0, 300.0, 450.0}) {
    const auto p = extract_pitch(buffer(sine(f, 0.4, 0.5)));
    std::vector<double> voiced;
    for (size_t t = 0; t < p.size(); ++t) {
      if (!p.voiced[t]) {
        CHECK(p.f0_hz[t] == 0.0);
        continue;
      }
      CHECK(p.f0_hz[t] >= 50.0);
      CHECK(p.f0_hz[t] <= 500.0);
      voiced.push_back(p.f0_hz[t]);
    }
    REQUIRE_FALSE(voiced.empty());
    CHECK(median(voiced) == Approx(f).epsilon(0.01));
  }
}

TEST_CASE("YIN marks white noise unvoiced", "[dsp][pitch]") {
  const auto p = extract_pitch(buffer(white_noise(1.0, 0.5, 11)));
  const auto unvoiced = std::count(p.voiced.begin(), p.voiced.end(), false);
  CHECK(static_cast<double>(unvoiced) >= 0.9 * static_cast<double>(p.size()));
}

TEST_CASE("YIN marks silence unvoiced with zero F0", "[dsp][pitch]") {
  const auto p = extract_pitch(buffer(silence(1.0)));
  REQUIRE(p.size() == 100);
  for (size_t t = 0; t < p.size(); ++t) {
    CHECK_FALSE(p.voiced[t]);
    CHECK(p.f0_hz[t] == 0.0);
  }
}

TEST_CASE("YIN rejects buffers shorter than one window", "[dsp][pitch]") {
  CHECK_THROWS_AS(extract_pitch(buffer(std::vector<double>(399, 0.1))), Error);
}

// ------------------------------------------------------------ speaking rate

TEST_CASE("speaking rate of silence is zero", "[dsp][rate]") {
  for (double r : extract_rate(buffer(silence(2.0)))) CHECK(r == 0.0);
}

TEST_CASE("tone bursts at 4 per second give a rate near 4", "[dsp][rate]") {
  // 1 kHz carrier gated on for 120 ms of every 250 ms.
  auto x = sine(1000.0, 0.5, 3.0);
  for (size_t i = 0; i < x.size(); ++i)
    if ((i % 4000) >= 1920) x[i] = 0.0;
  const auto r = extract_rate(buffer(x));
  for (size_t t = 60; t + 60 < r.size(); ++t) CHECK(std::abs(r[t] - 4.0) <= 1.0);
}

TEST_CASE("a single burst counts once within its window", "[dsp][rate]") {
  auto x = silence(2.0);
  const auto burst = sine(800.0, 0.5, 0.1);
  std::copy(burst.begin(), burst.end(), x.begin() + 16000);
  const auto r = extract_rate(buffer(x));
  CHECK(*std::max_element(r.begin(), r.end()) == Approx(1.0));
  CHECK(r[105] == Approx(1.0));
  CHECK(r[10] == 0.0);
}

// ---------------------------------------------------------------------- VAD

TEST_CASE("VAD finds nothing in digital silence", "[dsp][vad]") {
  CHECK(vad_segment(buffer(silence(5.0)), presets::balanced()).empty());
}

TEST_CASE("VAD finds a padded tone", "[dsp][vad]") {
  const auto x = concat({silence(1.0), sine(200.0, 0.5, 1.0), silence(1.0)});
  const auto segs = vad_segment(buffer(x), presets::balanced());
  REQUIRE(segs.size() == 1);
  // 30 ms frames: the tone covers frames [34, 66]; boundaries may shift by one frame.
  CHECK(std::abs(segs[0].start_ms - 1000) <= 30);
  CHECK(std::abs(segs[0].end_ms - 2000) <= 30);
}

TEST_CASE("VAD merges bursts separated by short silence", "[dsp][vad]") {
  const auto x = concat({silence(1.0), sine(200.0, 0.5, 0.3), silence(0.2), sine(200.0, 0.5, 0.3), silence(1.0)});
  const auto segs = vad_segment(buffer(x), presets::balanced());
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].duration_ms() >= 750);
}

TEST_CASE("VAD segmentation enforces speech and silence gates", "[dsp][vad]") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> prob(400);
    double level = 0.0;
    for (double& p : prob) {
      if (coin(rng)) level = 1.0 - level;
      p = level;
    }
    const auto segs = segments_from_probabilities(prob, 0.5, 250, 500);
    for (size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].duration_ms() >= 250);
      if (i) CHECK(segs[i].start_ms - segs[i - 1].end_ms >= 500);
    }
  }
}

// ----------------------------------------------------- statistics & tracks

TEST_CASE("speaker stats of a constant tone hit the sigma floor", "[dsp][stats]") {
  const auto s = estimate_speaker_stats(buffer(sine(220.0, 0.5, 3.5)));
  CHECK(s.mu_f0 == Approx(std::log(220.0)).margin(0.01));
  CHECK(s.sigma_f0 == Approx(kSigmaFloor).margin(1e-9));
  CHECK(s.e_max > s.e_min);
}

TEST_CASE("constant energy triggers the separation guard", "[dsp][stats]") {
  SpeakerStats s;
  estimate_energy_range(std::vector<double>(500, 0.5), 1000, s);
  CHECK(s.e_min == 0.5);
  CHECK(s.e_max == Approx(0.5 * (1.0 + 1e-3)).epsilon(1e-12));
}

TEST_CASE("noise-only input asks for fallback statistics", "[dsp][stats]") {
  const auto raw = extract_raw_prosody(buffer(white_noise(3.5, 0.3, 2)));
  try {
    estimate_speaker_stats(raw);
    FAIL("expected precondition error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::precondition);
  }
  const auto fb = fallback_stats(raw);
  CHECK(fb.fallback);
  CHECK(fb.mu_f0 == Approx(std::log(150.0)));
  CHECK(fb.sigma_f0 == 0.3);
  CHECK(fb.mu_rate == 4.0);
  CHECK(fb.sigma_rate == 1.0);
}

TEST_CASE("short input is rejected by speaker statistics", "[dsp][stats]") {
  CHECK_THROWS_AS(estimate_speaker_stats(buffer(sine(220.0, 0.5, 2.0))), Error);
}

TEST_CASE("normalization anchors follow the definitions", "[dsp][normalize]") {
  SpeakerStats s;
  s.mu_f0 = std::log(180.0);
  s.sigma_f0 = 0.2;
  s.e_min = 0.01;
  s.e_max = 0.2;
  s.mu_rate = 4.0;
  s.sigma_rate = 1.5;
  RawProsody raw;
  raw.f0_hz = {std::exp(s.mu_f0), std::exp(s.mu_f0 + s.sigma_f0), 0.0, 180.0};
  raw.voiced = {true, true, false, true};
  raw.energy = {s.e_max, s.e_min, 1e-9, 10.0};
  raw.rate = {4.0, 5.5, 0.0, 4.0};
  const auto tr = normalize_track(raw, s);
  CHECK(tr.frames[0].f0_norm == Approx(0.0).margin(1e-12));
  CHECK(tr.frames[1].f0_norm == Approx(1.0).margin(1e-12));
  CHECK(tr.frames[2].f0_norm == 0.0);
  CHECK_FALSE(tr.voiced[2]);
  CHECK(tr.frames[0].energy_norm == Approx(1.0).margin(1e-4));
  CHECK(tr.frames[1].energy_norm == Approx(0.0).margin(1e-3));
  CHECK(tr.frames[2].energy_norm == kEnergyNormMin);
  CHECK(tr.frames[3].energy_norm == kEnergyNormMax);
  CHECK(tr.frames[1].rate_norm == Approx(1.0));
  CHECK(tr.frames[2].rate_norm == Approx(-4.0 / 1.5));

  raw.rate.pop_back();
  CHECK_THROWS_AS(normalize_track(raw, s), Error);
}

TEST_CASE("normalized log-pitch inverts to F0", "[dsp][normalize]") {
  auto x = concat({sine(140.0, 0.4, 1.5), sine(190.0, 0.4, 1.5), sine(240.0, 0.4, 1.0)});
  const auto audio = buffer(x);
  const auto raw = extract_raw_prosody(audio);
  const auto s = estimate_speaker_stats(raw);
  const auto tr = normalize_track(raw, s);
  size_t checked = 0;
  for (size_t t = 0; t < tr.size(); ++t) {
    if (!tr.voiced[t]) {
      CHECK(tr.frames[t].f0_norm == 0.0);
      continue;
    }
    const double f0 = std::exp(tr.frames[t].f0_norm * s.sigma_f0 + s.mu_f0);
    CHECK(f0 == Approx(raw.f0_hz[t]).epsilon(1e-6));
    ++checked;
  }
  CHECK(checked > 300);
  for (const auto& f : tr.frames) {
    CHECK(std::isfinite(f.energy_norm));
    CHECK(f.energy_norm >= kEnergyNormMin);
    CHECK(f.energy_norm <= kEnergyNormMax);
  }
}

TEST_CASE("extraction is deterministic", "[dsp]") {
  const auto audio = buffer(concat({sine(150.0, 0.3, 2.0), white_noise(1.5, 0.2, 9)}));
  const auto a = normalize_track(extract_raw_prosody(audio), estimate_speaker_stats(audio));
  const auto b = normalize_track(extract_raw_prosody(audio), estimate_speaker_stats(audio));
  CHECK(a.frames == b.frames);
  CHECK(a.voiced == b.voiced);
}

TEST_CASE("track CSV export has one row per frame", "[dsp]") {
  ProsodyTrack tr;
  tr.frames = {{0.5, 0.25, -1.0}, {0.0, 1.0, 0.0}};
  tr.voiced = {true, false};
  std::ostringstream os;
  write_track_csv(os, tr);
  CHECK(os.str() == "frame_index,f0_norm,energy_norm,rate_norm,voiced\n0,0.5,0.25,-1,1\n1,0,1,0,0\n");
}
