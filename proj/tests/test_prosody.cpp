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

// Keyframe sampling, delta coding, quantization, Huffman coding, payload
// framing and spline reconstruction.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "semcodec/prosody/bit_io.hpp"
#include "semcodec/prosody/huffman.hpp"
#include "semcodec/prosody/keyframes.hpp"
#include "semcodec/prosody/payload.hpp"
#include "semcodec/prosody/prosody_codec.hpp"
#include "semcodec/prosody/quantizer.hpp"
#include "semcodec/prosody/spline.hpp"

using namespace semcodec;
using namespace semcodec::prosody;
using Catch::Approx;

namespace {

/// Independent statement of the dead-zone quantizer used as the oracle.
int oracle_quantize(double d, double tau, double clamp, int bits) {
  const int top = (1 << (bits - 1)) - 1;
  const double alpha = clamp / top;
  if (std::fabs(d) < tau) return 0;
  int q = static_cast<int>(std::ceil(std::fabs(d) / alpha));
  if (q > top) q = top;
  return d < 0 ? -q : q;
}

dsp::ProsodyTrack random_track(size_t frames, uint64_t seed, double voiced_prob = 0.8) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  dsp::ProsodyTrack t;
  t.frames.resize(frames);
  t.voiced.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    t.voiced[i] = u(rng) < voiced_prob;
    t.frames[i] = {t.voiced[i] ? std::clamp(n(rng), -3.5, 3.5) : 0.0, u(rng), std::clamp(n(rng), -3.5, 3.5)};
  }
  return t;
}

QualityModeConfig dense_config(int bits_p, int bits_e, int bits_r, double fk) {
  auto c = presets::balanced();
  c.bits_pitch = bits_p;
  c.bits_energy = bits_e;
  c.bits_rate = bits_r;
  c.keyframe_rate_hz = fk;
  return c;
}

}  // namespace

// ---------------------------------------------------------------- keyframes

TEST_CASE("keyframe schedule follows floor(100 / f_k)", "[prosody][keyframes]") {
  CHECK(sample_keyframes(1000, 0.5).indices == std::vector<size_t>{0, 200, 400, 600, 800});
  const auto dense = sample_keyframes(37, 100.0);
  CHECK(dense.stride_frames == 1);
  CHECK(dense.indices.size() == 37);
  CHECK(sample_keyframes(500, 0.1).indices == std::vector<size_t>{0});
  CHECK(sample_keyframes(1000, 0.3).stride_frames == 333);
  CHECK(sample_keyframes(100, 20.0).stride_frames == 5);
  CHECK_THROWS_AS(sample_keyframes(100, 0.0), Error);
  CHECK_THROWS_AS(sample_keyframes(100, 101.0), Error);
}

TEST_CASE("delta coding of a constant track", "[prosody][delta]") {
  std::vector<KeyframeValues> keys(5, KeyframeValues{{0.7, 0.7, 0.7}, true});
  const auto d = delta_encode(keys);
  CHECK(d[0].is_absolute);
  CHECK(d[0].d[0] == 0.7);
  for (size_t k = 1; k < d.size(); ++k) {
    CHECK_FALSE(d[k].is_absolute);
    for (double v : d[k].d) CHECK(v == 0.0);
  }
}

TEST_CASE("delta coding arithmetic", "[prosody][delta]") {
  std::vector<KeyframeValues> keys = {{{0.0, 0, 0}, true}, {{0.2, 0, 0}, true}, {{0.5, 0, 0}, true}};
  const auto d = delta_encode(keys);
  CHECK(d[0].d[0] == 0.0);
  CHECK(d[1].d[0] == Approx(0.2));
  CHECK(d[2].d[0] == Approx(0.3));
}

TEST_CASE("delta decode inverts delta encode", "[prosody][delta]") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto track = random_track(3000, seed);
    const auto sched = sample_keyframes(track, 5.0);
    const auto keys = keyframe_values(track, sched);
    const auto back = delta_decode(delta_encode(keys, 1 << 30));
    REQUIRE(back.size() == keys.size());
    for (size_t k = 0; k < keys.size(); ++k)
      for (int f = 0; f < 3; ++f) CHECK(back[k].values[f] == Approx(keys[k].values[f]).margin(1e-12));
  }
}

TEST_CASE("periodic absolute keyframes restart the chain", "[prosody][delta]") {
  std::vector<KeyframeValues> keys(40, KeyframeValues{{1.0, 0.5, -1.0}, true});
  const auto d = delta_encode(keys, 16);
  for (size_t k = 0; k < d.size(); ++k) CHECK(d[k].is_absolute == (k % 16 == 0));
}

// ---------------------------------------------------------------- quantizer

TEST_CASE("quantizer examples", "[prosody][quantizer]") {
  const QuantizerSpec q6{6, 0.05, 4.0};
  CHECK(q6.step() == Approx(4.0 / 31.0));
  CHECK(quantize(0.03, q6) == 0);
  CHECK(quantize(0.20, q6) == 2);
  CHECK(quantize(-7.0, q6) == -31);
  CHECK(dequantize(0, q6) == 0.0);
  CHECK(dequantize(2, q6) == Approx(1.5 * 4.0 / 31.0));
  CHECK(dequantize(2, q6) == Approx(0.1935).margin(1e-4));
  CHECK(quantize(std::nan(""), q6) == 0);
}

TEST_CASE("quantizer matches the brute-force oracle on a 1e-3 grid", "[prosody][quantizer]") {
  for (Feature f : kAllFeatures) {
    for (int bits = 2; bits <= 8; ++bits) {
      const double clamp = clamp_range(f);
      const QuantizerSpec q{bits, f == Feature::energy ? 0.02 : 0.05, clamp};
      const long steps = std::lround(clamp / 1e-3);
      for (long i = -steps; i <= steps; ++i) {
        const double d = static_cast<double>(i) * 1e-3;
        const int code = quantize(d, q);
        REQUIRE(code == oracle_quantize(d, q.dead_zone, clamp, bits));
        if (std::fabs(d) < q.dead_zone) {
          REQUIRE(code == 0);
          REQUIRE(dequantize(code, q) == 0.0);
        } else {
          REQUIRE(std::fabs(d - dequantize(code, q)) <= q.step() / 2.0 + 1e-12);
        }
        REQUIRE(std::abs(code) <= q.max_code());
      }
    }
  }
}

// ------------------------------------------------------------------ Huffman

TEST_CASE("Huffman codebooks are complete canonical prefix codes", "[prosody][huffman]") {
  for (Feature f : kAllFeatures) {
    for (int bits = 2; bits <= 8; ++bits) {
      const auto& cb = prosody_codebook(f, bits);
      CHECK(cb.max_code() == (1 << (bits - 1)) - 1);
      long double kraft = 0;
      std::set<std::string> words;
      for (int s = -cb.max_code(); s <= cb.max_code(); ++s) {
        kraft += std::ldexp(1.0L, -cb.length(s));
        std::string w;
        for (int i = cb.length(s) - 1; i >= 0; --i) w.push_back(((cb.codeword(s) >> i) & 1u) ? '1' : '0');
        words.insert(w);
      }
      CHECK(static_cast<double>(kraft) == Approx(1.0));
      // Prefix-freeness: in sorted order, no word is a prefix of its successor.
      for (auto it = words.begin(); std::next(it) != words.end(); ++it)
        CHECK(std::next(it)->rfind(*it, 0) != 0);
    }
  }
}

TEST_CASE("more probable deltas never get longer codewords", "[prosody][huffman]") {
  for (Feature f : kAllFeatures)
    for (int bits = 2; bits <= 8; ++bits) {
      const auto& cb = prosody_codebook(f, bits);
      const auto p = training_distribution(QuantizerSpec{bits, 0.0, clamp_range(f)}, training_model(f, bits));
      const int mc = cb.max_code();
      for (int a = -mc; a <= mc; ++a)
        for (int b = -mc; b <= mc; ++b)
          if (p[static_cast<size_t>(a + mc)] > p[static_cast<size_t>(b + mc)]) REQUIRE(cb.length(a) <= cb.length(b));
    }
}

TEST_CASE("training models are fitted from dead-zone fraction and mean magnitude", "[prosody][huffman]") {
  const auto m = fit_training_model({0.0, 0.01, -0.5, 1.5, 10.0}, 0.05, 4.0);
  CHECK(m.p_zero == Approx(0.4));
  CHECK(m.scale == Approx((0.5 + 1.5 + 4.0) / 3.0));
  CHECK(fit_training_model({0.5, 0.7}, 0.05, 4.0).p_zero == Approx(0.02));
  CHECK_THROWS_AS(fit_training_model({}, 0.05, 4.0), Error);
}

TEST_CASE("entropy coding round-trips 10^4 random code vectors", "[prosody][huffman]") {
  std::mt19937_64 rng(42);
  for (const auto& name : preset_names()) {
    const auto cfg = *preset(name);
    ProsodyEntropyCoder coder(cfg);
    for (int i = 0; i < 10000; ++i) {
      KeyframeCodes k;
      k.voiced = rng() & 1u;
      k.is_absolute = rng() & 1u;
      for (Feature f : kAllFeatures) {
        if (!coder.carries(f, k.voiced)) continue;
        const int mc = (1 << (cfg.bits(f) - 1)) - 1;
        k.codes[static_cast<int>(f)] = std::uniform_int_distribution<int>(-mc, mc)(rng);
      }
      REQUIRE(coder.decode(coder.encode(k)) == k);
    }
  }
}

TEST_CASE("mean code length is within one bit of the training entropy", "[prosody][huffman]") {
  for (Feature f : kAllFeatures) {
    for (int bits = 2; bits <= 8; ++bits) {
      const QuantizerSpec q{bits, 0.0, clamp_range(f)};
      const auto p = training_distribution(q, training_model(f, bits));
      const double h = entropy_bits(p);
      const double mean = prosody_codebook(f, bits).mean_length(p);
      CHECK(mean >= h - 1e-12);
      CHECK(mean <= h + 1.0);
    }
  }
}

TEST_CASE("Huffman construction is deterministic and ties break stably", "[prosody][huffman]") {
  CHECK(huffman_lengths({1, 1, 1, 1}) == std::vector<int>{2, 2, 2, 2});
  CHECK(huffman_lengths({4, 2, 1, 1}) == std::vector<int>{1, 2, 3, 3});
  CHECK(train_codebook(Feature::pitch, 6) == train_codebook(Feature::pitch, 6));
}

TEST_CASE("truncated bitstreams raise decode errors", "[prosody][huffman]") {
  const auto cfg = presets::high_quality();
  ProsodyEntropyCoder coder(cfg);
  const auto bits = coder.encode(KeyframeCodes{true, false, {17, -9, 12}});
  for (size_t cut = 0; cut < bits.bit_count; ++cut) {
    BitString shorter{bits.bytes, cut};
    try {
      coder.decode(shorter, false);
      FAIL("decoded a truncated payload");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::decode);
    }
  }
}

TEST_CASE("codebook files round-trip and match the shipped tables", "[prosody][huffman]") {
  const auto dir = std::filesystem::path(SEMCODEC_DATA_DIR) / "codebooks";
  for (Feature f : kAllFeatures) {
    for (int bits = 2; bits <= 8; ++bits) {
      const auto& cb = prosody_codebook(f, bits);
      std::stringstream ss;
      cb.write(ss, f, bits);
      CHECK(HuffmanCodebook::read(ss) == cb);
      const auto file = dir / (std::string(to_string(f)) + "_" + std::to_string(bits) + ".txt");
      std::ifstream in(file);
      REQUIRE(in.good());
      CHECK(HuffmanCodebook::read(in) == cb);
    }
  }
}

TEST_CASE("incomplete code lengths are rejected", "[prosody][huffman]") {
  CHECK_THROWS_AS(HuffmanCodebook(1, {1, 2, 3}), Error);
  CHECK_NOTHROW(HuffmanCodebook(1, {2, 1, 2}));
}

// ------------------------------------------------------------------ payload

TEST_CASE("payload framing round-trips", "[prosody][payload]") {
  const auto cfg = presets::balanced();
  ProsodyEntropyCoder coder(cfg);
  KeyframeCodes k{true, false, {2, -1, 1}};
  auto bits = coder.encode(k);
  const auto p = packetize_keyframe(200, bits);
  const auto [ts, codes] = parse_payload(p, coder);
  CHECK(ts == 200);
  CHECK(codes == k);
  // An arbitrary 18-bit payload also round-trips through the byte form.
  BitWriter w;
  w.write_bits(0x2ABCD, 18);
  const auto p18 = packetize_keyframe(200, w.take());
  CHECK(p18.bit_count() == 18);
  CHECK(packetize_keyframe(p18.timestamp_cs, p18.huffman_bits) == p18);
  CHECK(bits_from_bytes(payload_bytes(p18.huffman_bits)).bytes == p18.huffman_bits.bytes);
}

TEST_CASE("an empty feature set cannot be packetized", "[prosody][payload]") {
  auto cfg = presets::balanced();
  cfg.features = {false, false, false};
  CHECK_THROWS_AS(ProsodyEntropyCoder(cfg), Error);
  CHECK_THROWS_AS(packetize_keyframe(0, BitString{}), Error);
}

TEST_CASE("unvoiced keyframes omit the pitch codeword", "[prosody][payload]") {
  const auto cfg = presets::balanced();
  ProsodyEntropyCoder coder(cfg);
  const auto voiced = coder.encode(KeyframeCodes{true, false, {0, 0, 0}});
  const auto unvoiced = coder.encode(KeyframeCodes{false, false, {0, 0, 0}});
  CHECK(voiced.bit_count == unvoiced.bit_count + static_cast<size_t>(coder.codebook(Feature::pitch).length(0)));
  CHECK(coder.decode(unvoiced).get(Feature::pitch) == 0);
}

TEST_CASE("stream assembly enforces monotone timestamps across wrap", "[prosody][payload]") {
  ProsodyStreamAssembler s;
  CHECK(s.push(100) == 100);
  CHECK(s.push(300) == 300);
  CHECK_THROWS_AS(s.push(200), Error);
  CHECK(unwrap_timestamp((1u << 24) - 50, 30) == (1u << 24) + 30);
  CHECK(unwrap_timestamp((1u << 24) + 30, (1u << 24) - 60) == (1u << 24) - 60);
  ProsodyStreamAssembler w;
  w.push((1u << 24) - 100);
  CHECK(w.push(100) == (1u << 24) + 100);
}

TEST_CASE("corrupted payloads decode in-alphabet or raise decode errors", "[prosody][payload]") {
  const auto cfg = presets::balanced();
  ProsodyEncoder enc(cfg);
  const auto encoded = enc.encode(random_track(6000, 3));
  std::mt19937_64 rng(7);
  size_t decoded = 0, rejected = 0;
  for (const auto& e : encoded) {
    for (size_t flip = 0; flip < e.bits.bytes.size() * 8; ++flip) {
      BitString b = e.bits;
      b.bit_count = b.bytes.size() * 8;
      b.bytes[flip / 8] ^= static_cast<uint8_t>(0x80u >> (flip % 8));
      ProsodyDecoder dec(cfg);
      try {
        const auto kf = dec.accept(0, b);
        ++decoded;
        if (!kf) continue;
        for (Feature f : kAllFeatures) {
          const double v = kf->values.get(f);
          if (f == Feature::energy) {
            CHECK(v >= dsp::kEnergyNormMin);
            CHECK(v <= dsp::kEnergyNormMax);
          } else {
            CHECK(std::abs(v) <= clamp_range(f));
          }
        }
      } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::decode);
        ++rejected;
      }
    }
  }
  CHECK(decoded + rejected > 0);
}

// ------------------------------------------------------------------- spline

TEST_CASE("a single keyframe reconstructs as a constant", "[prosody][spline]") {
  const auto tr = reconstruct_contour({{120, {{0.8, 0.3, -0.4}, true}}}, 400);
  REQUIRE(tr.size() == 400);
  for (size_t t = 0; t < tr.size(); ++t) {
    CHECK(tr.frames[t].f0_norm == 0.8);
    CHECK(tr.frames[t].energy_norm == 0.3);
    CHECK(tr.frames[t].rate_norm == -0.4);
    CHECK(tr.voiced[t]);
  }
}

TEST_CASE("the natural spline reproduces linear data", "[prosody][spline]") {
  std::vector<ReceivedKeyframe> keys;
  for (uint64_t t = 0; t <= 1000; t += 137)
    keys.push_back({t, {{0.5 + 0.002 * t, 0.1 + 0.0007 * t, -1.0 + 0.001 * t}, true}});
  const auto tr = reconstruct_contour(keys, 960);
  for (size_t t = 0; t <= 959; ++t) {
    CHECK(std::abs(tr.frames[t].f0_norm - (0.5 + 0.002 * t)) <= 1e-9);
    CHECK(std::abs(tr.frames[t].energy_norm - (0.1 + 0.0007 * t)) <= 1e-9);
  }
}

TEST_CASE("the spline passes through keyframes and holds outside", "[prosody][spline]") {
  std::vector<ReceivedKeyframe> keys = {{100, {{1.0, 0.2, 0.0}, true}},
                                        {300, {{-0.5, 0.9, 1.0}, true}},
                                        {500, {{0.25, 0.4, -2.0}, true}}};
  const auto tr = reconstruct_contour(keys, 700);
  for (const auto& k : keys)
    for (Feature f : kAllFeatures) CHECK(tr.frames[k.timestamp_cs].get(f) == Approx(k.values.get(f)).margin(1e-12));
  CHECK(tr.frames[0].f0_norm == 1.0);
  CHECK(tr.frames[699].rate_norm == -2.0);
}

TEST_CASE("natural spline is exact for cubic data with zero end curvature", "[prosody][spline]") {
  // p(x) = x^3 - 3 x^2 x_n + ... has p'' != 0 at the ends, so the natural
  // spline cannot reproduce an arbitrary cubic. Compare against the
  // independent closed-form natural spline through the same knots.
  const std::vector<double> xs = {0, 100, 200, 300, 400, 500};
  auto poly = [](double x) { return 1e-7 * x * x * x - 5e-5 * x * x + 0.01 * x + 0.3; };
  std::vector<double> ys;
  for (double x : xs) ys.push_back(poly(x));
  const NaturalCubicSpline s(xs, ys);
  // Knots are hit exactly.
  for (size_t i = 0; i < xs.size(); ++i) CHECK(s(xs[i]) == Approx(ys[i]).margin(1e-12));
  // Dense-data convergence: with many knots the interior error against the
  // polynomial falls below 1e-6 relative.
  std::vector<double> dx, dy;
  for (int x = 0; x <= 500; x += 5) {
    dx.push_back(x);
    dy.push_back(poly(x));
  }
  const NaturalCubicSpline dense(dx, dy);
  for (double x = 100.5; x < 400.0; x += 1.0) CHECK(std::abs(dense(x) - poly(x)) <= 1e-6 * std::abs(poly(x)));
}

TEST_CASE("pitch is interpolated through voiced keyframes only", "[prosody][spline]") {
  std::vector<ReceivedKeyframe> keys = {{0, {{1.0, 0.5, 0.0}, true}},
                                        {100, {{0.0, 0.5, 0.0}, false}},
                                        {200, {{2.0, 0.5, 0.0}, true}}};
  const auto tr = reconstruct_contour(keys, 201);
  CHECK_FALSE(tr.voiced[100]);
  CHECK(tr.frames[100].f0_norm == 0.0);
  CHECK(tr.voiced[160]);
  CHECK(tr.frames[160].f0_norm == Approx(1.8));
  CHECK(tr.voiced[40]);
}

TEST_CASE("zero keyframes is an error; decoders fall back to neutral", "[prosody][spline]") {
  CHECK_THROWS_AS(reconstruct_contour({}, 100), Error);
  ProsodyDecoder dec(presets::balanced());
  const auto tr = dec.reconstruct(50);
  CHECK(tr.size() == 50);
  CHECK(tr.frames[10].energy_norm == 0.5);
}

// ------------------------------------------------------- encoder / decoder

TEST_CASE("loss-free decoding stays within the accumulated quantization bound", "[prosody][codec]") {
  for (const auto& name : preset_names()) {
    auto cfg = *preset(name);
    cfg.keyframe_rate_hz = 10.0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
      const auto track = random_track(4000, seed);
      const auto encoded = ProsodyEncoder(cfg).encode(track);
      ProsodyDecoder dec(cfg);
      for (const auto& e : encoded) {
        const auto kf = dec.accept(e.timestamp_cs, e.bits);
        REQUIRE(kf);
        for (Feature f : kAllFeatures) {
          if (!cfg.features.has(f)) continue;
          CHECK(std::abs(kf->values.get(f) - e.values.get(f)) <= e.error_bound[static_cast<int>(f)] + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("error grows by at most alpha/2 per in-range delta", "[prosody][codec]") {
  // Keyframe deltas drawn strictly inside (tau, clamp): the bound after k
  // deltas since the last absolute keyframe is (k + 1) * alpha / 2.
  auto cfg = dense_config(6, 5, 5, 100.0);
  cfg.absolute_keyframe_interval = 1 << 20;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mag(0.06, 0.4);
  dsp::ProsodyTrack tr;
  double v = 0.0;
  for (int i = 0; i < 200; ++i) {
    v += (rng() & 1u) ? mag(rng) : -mag(rng);
    v = std::clamp(v, -3.0, 3.0);
    tr.frames.push_back({v, 0.5, 0.0});
    tr.voiced.push_back(true);
  }
  const auto encoded = ProsodyEncoder(cfg).encode(tr);
  ProsodyDecoder dec(cfg);
  const double alpha = quantizer_for(Feature::pitch, cfg).step();
  for (const auto& e : encoded) {
    const auto kf = dec.accept(e.timestamp_cs, e.bits);
    REQUIRE(kf);
    CHECK(std::abs(kf->values.get(Feature::pitch) - e.values.get(Feature::pitch)) <=
          (static_cast<double>(e.index) + 1.0) * alpha / 2.0 + 1e-9);
  }
}

TEST_CASE("a lost delta invalidates the chain until the next absolute keyframe", "[prosody][codec]") {
  auto cfg = dense_config(6, 5, 5, 10.0);
  cfg.absolute_keyframe_interval = 4;
  const auto encoded = ProsodyEncoder(cfg).encode(random_track(200, 5, 1.0));
  REQUIRE(encoded.size() == 20);
  ProsodyDecoder dec(cfg);
  for (const auto& e : encoded) {
    if (e.index == 5) continue;  // dropped on the channel
    const auto kf = dec.accept(e.timestamp_cs, e.bits);
    if (e.index == 6 || e.index == 7)
      CHECK_FALSE(kf);
    else
      CHECK(kf);
  }
  CHECK(dec.discarded() == 2);
  CHECK(dec.keyframes().size() == 17);
}

TEST_CASE("absolute keyframes are every 16th by default", "[prosody][codec]") {
  auto cfg = dense_config(6, 5, 5, 10.0);
  const auto encoded = ProsodyEncoder(cfg).encode(random_track(400, 8));
  for (const auto& e : encoded) CHECK(e.is_absolute() == (e.index % 16 == 0));
}
