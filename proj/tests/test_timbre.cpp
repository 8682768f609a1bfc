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


// Timbre quantization, compression, change detection and profile caching.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <atomic>
#include <functional>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "semcodec/timbre/embedding.hpp"
#include "semcodec/timbre/half.hpp"
#include "semcodec/timbre/timbre_codec.hpp"

using namespace semcodec;
using namespace semcodec::timbre;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::config;
}

/// Reference binary16 rounding by exhaustive nearest search over all finite
/// half values, ties to the even bit pattern.
uint16_t reference_half(float x, const std::vector<std::pair<double, uint16_t>>& table) {
  const double v = x;
  if (v >= 65520.0) return 0x7C00;
  if (v <= -65520.0) return 0xFC00;
  auto it = std::lower_bound(table.begin(), table.end(), std::make_pair(v, uint16_t{0}),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
  uint16_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (auto j = (it == table.begin() ? it : it - 1); j != table.end() && j <= it + 1; ++j) {
    const double err = std::abs(j->first - v);
    if (err < best_err || (err == best_err && (j->second & 1) == 0 && (best & 1) == 1)) {
      best = j->second;
      best_err = err;
    }
  }
  if (v == 0.0 && std::signbit(x)) return 0x8000;
  if (best == 0 && std::signbit(x)) return 0x8000;
  if (best == 0x8000 && !std::signbit(x)) return 0;
  return best;
}

std::vector<std::pair<double, uint16_t>> half_table() {
  std::vector<std::pair<double, uint16_t>> t;
  for (uint32_t h = 0; h < 0x10000; ++h) {
    if ((h & 0x7C00) == 0x7C00) continue;
    if (h == 0x8000) continue;  // keep one zero; sign handled separately
    t.emplace_back(half_to_float(static_cast<uint16_t>(h)), static_cast<uint16_t>(h));
  }
  std::sort(t.begin(), t.end());
  return t;
}

TimbreEmbedding with_similarity(const TimbreEmbedding& base, double target) {
  // base*target + orthogonal*sqrt(1-target^2), with the orthogonal part
  // built by Gram-Schmidt from a second vector.
  auto other = synthetic_embedding(4242, base.dim(), 0.0);
  double dot = 0.0, nb = 0.0;
  for (size_t i = 0; i < base.dim(); ++i) {
    dot += static_cast<double>(other.values[i]) * base.values[i];
    nb += static_cast<double>(base.values[i]) * base.values[i];
  }
  std::vector<double> o(base.dim());
  double no = 0.0;
  for (size_t i = 0; i < o.size(); ++i) {
    o[i] = other.values[i] - dot / nb * base.values[i];
    no += o[i] * o[i];
  }
  TimbreEmbedding e = base;
  for (size_t i = 0; i < o.size(); ++i)
    e.values[i] = static_cast<float>(target * base.values[i] / std::sqrt(nb) +
                                     std::sqrt(1.0 - target * target) * o[i] / std::sqrt(no));
  return e;
}

}  // namespace

// ------------------------------------------------------------------ half

TEST_CASE("every half value widens and narrows back to itself", "[timbre][half]") {
  for (uint32_t h = 0; h < 0x10000; ++h) {
    const auto x = static_cast<uint16_t>(h);
    if ((x & 0x7C00) == 0x7C00 && (x & 0x3FF)) {
      CHECK(std::isnan(half_to_float(x)));
      continue;
    }
    REQUIRE(float_to_half(half_to_float(x)) == x);
  }
}

TEST_CASE("float to half rounds to nearest, ties to even", "[timbre][half]") {
  const auto table = half_table();
  // Every midpoint between adjacent finite halves, and its float neighbours.
  for (size_t i = 0; i + 1 < table.size(); ++i) {
    const double mid = 0.5 * (table[i].first + table[i + 1].first);
    const auto f = static_cast<float>(mid);
    REQUIRE(static_cast<double>(f) == mid);  // midpoints are exact in binary32
    for (float x : {f, std::nextafter(f, -INFINITY), std::nextafter(f, INFINITY)})
      REQUIRE(float_to_half(x) == reference_half(x, table));
  }
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> u(-70000.0f, 70000.0f);
  std::uniform_real_distribution<float> small(-1e-3f, 1e-3f);
  for (int i = 0; i < 100000; ++i) {
    const float a = u(rng), b = small(rng);
    REQUIRE(float_to_half(a) == reference_half(a, table));
    REQUIRE(float_to_half(b) == reference_half(b, table));
  }
  CHECK(float_to_half(INFINITY) == 0x7C00);
  CHECK(float_to_half(-INFINITY) == 0xFC00);
  CHECK((float_to_half(NAN) & 0x7C00) == 0x7C00);
  CHECK(float_to_half(1e-10f) == 0);
  CHECK(float_to_half(-0.0f) == 0x8000);
}

TEST_CASE("half quantization error is within the mantissa bound", "[timbre][half]") {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto e = synthetic_embedding(seed);
    const auto q = quantize_embedding(e, Precision::half, 192);
    const auto d = dequantize_embedding(q, Precision::half);
    for (size_t i = 0; i < e.dim(); ++i) {
      const double v = e.values[i];
      if (std::abs(v) < 6.103515625e-05) continue;  // subnormal halves have absolute, not relative, spacing
      REQUIRE(std::abs(d.values[i] - v) <= std::ldexp(std::abs(v), -11));
    }
  }
}

// ------------------------------------------------------------ quantize

TEST_CASE("quantized payload sizes", "[timbre][quantize]") {
  const auto e = synthetic_embedding(1);
  CHECK(quantize_embedding(e, Precision::half, 192).size() == 384);
  CHECK(quantize_embedding(e, Precision::single, 192).size() == 768);
  CHECK(dequantize_embedding(quantize_embedding(e, Precision::single, 192), Precision::single) == e);
}

TEST_CASE("invalid embeddings are rejected", "[timbre][quantize]") {
  TimbreEmbedding zeros;
  zeros.values.assign(192, 0.0f);
  CHECK(kind_of([&] { quantize_embedding(zeros, Precision::half, 192); }) == ErrorKind::precondition);
  auto e = synthetic_embedding(2);
  CHECK(kind_of([&] { quantize_embedding(e, Precision::half, 128); }) == ErrorKind::precondition);
  e.values[5] = NAN;
  CHECK(kind_of([&] { quantize_embedding(e, Precision::half, 192); }) == ErrorKind::precondition);
  auto big = synthetic_embedding(3);
  big.values[0] = 1e6f;
  CHECK(kind_of([&] { quantize_embedding(big, Precision::half, 192); }) == ErrorKind::precondition);
  CHECK_NOTHROW(quantize_embedding(big, Precision::single, 192));
}

// ------------------------------------------------------------ compress

TEST_CASE("timbre compression round-trips 1000 random embeddings", "[timbre][compress]") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto e = (i % 2) ? synthetic_embedding(rng(), 192, 0.5) : low_entropy_embedding(rng());
    const auto prec = (i % 3) ? Precision::half : Precision::single;
    const auto kind = (i % 5) ? CompressorKind::brotli : CompressorKind::zlib;
    const auto q = quantize_embedding(e, prec, 192);
    const auto d = decompress_embedding(compress_embedding(q, prec, kind));
    REQUIRE(d.precision == prec);
    REQUIRE(d.payload == q);
  }
}

TEST_CASE("low-entropy embeddings shrink by 10-20%", "[timbre][compress]") {
  for (auto kind : {CompressorKind::brotli}) {
    double total = 0.0;
    const int n = 100;
    for (int s = 0; s < n; ++s) {
      const auto q = quantize_embedding(low_entropy_embedding(static_cast<uint64_t>(s)), Precision::half, 192);
      total += static_cast<double>(compress_embedding(q, Precision::half, kind).size());
    }
    const double reduction = 1.0 - total / n / 384.0;
    INFO(to_string(kind) << " reduction " << reduction);
    CHECK(reduction >= 0.10);
    CHECK(reduction <= 0.20);
  }
}

TEST_CASE("incompressible payloads fall back to stored mode", "[timbre][compress]") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    Bytes q(384);
    for (auto& b : q) b = static_cast<uint8_t>(rng());
    for (auto kind : {CompressorKind::brotli, CompressorKind::zlib}) {
      const auto c = compress_embedding(q, Precision::half, kind);
      CHECK(c.size() <= q.size() + 1);
      CHECK(decompress_embedding(c).payload == q);
    }
  }
}

TEST_CASE("corrupt timbre payloads raise decode errors", "[timbre][compress]") {
  const auto q = quantize_embedding(low_entropy_embedding(9), Precision::half, 192);
  auto c = compress_embedding(q, Precision::half, CompressorKind::brotli);
  REQUIRE((c[0] >> 4) == 1);
  auto truncated = c;
  truncated.resize(c.size() / 2);
  CHECK(kind_of([&] { decompress_embedding(truncated); }) == ErrorKind::decode);
  CHECK(kind_of([&] { decompress_embedding(Bytes{}); }) == ErrorKind::decode);
  CHECK(kind_of([&] { decompress_embedding(Bytes{0x35, 1, 2}); }) == ErrorKind::decode);
  CHECK(kind_of([&] { decompress_embedding(Bytes{0x00, 1, 2, 3}); }) == ErrorKind::decode);
}

// ---------------------------------------------------------- similarity

TEST_CASE("cosine similarity basics", "[timbre][similarity]") {
  const auto a = synthetic_embedding(1);
  auto neg = a;
  for (auto& v : neg.values) v = -v;
  CHECK(cosine_similarity(a, a) == Catch::Approx(1.0).margin(1e-12));
  CHECK(cosine_similarity(a, neg) == Catch::Approx(-1.0).margin(1e-12));
  TimbreEmbedding x, y;
  x.values = {1, 0, 0};
  y.values = {0, 1, 0};
  CHECK(cosine_similarity(x, y) == 0.0);
  const auto b = synthetic_embedding(2);
  CHECK(cosine_similarity(a, b) == cosine_similarity(b, a));
  TimbreEmbedding z;
  z.values = {0, 0, 0};
  CHECK(kind_of([&] { cosine_similarity(x, z); }) == ErrorKind::precondition);
}

TEST_CASE("speaker change uses a strict threshold", "[timbre][similarity]") {
  const auto base = synthetic_embedding(3);
  CHECK_FALSE(detect_speaker_change(with_similarity(base, 0.9), base, 0.7));
  CHECK(detect_speaker_change(with_similarity(base, 0.65), base, 0.7));
  const auto at = with_similarity(base, 0.7);
  const double s = cosine_similarity(at, base);
  CHECK_FALSE(detect_speaker_change(at, base, s));
  CHECK(detect_speaker_change(at, base, std::nextafter(s, 2.0)));
  CHECK(presets::balanced().change_similarity_threshold() == Catch::Approx(0.7));
}

// ------------------------------------------------------------- profiles

TEST_CASE("profile ids are stable content hashes", "[timbre][profile]") {
  const auto q = quantize_embedding(synthetic_embedding(4), Precision::half, 192);
  CHECK(profile_id(q) == profile_id(Bytes(q)));
  auto q2 = q;
  q2[0] ^= 1;
  CHECK_FALSE(profile_id(q) == profile_id(q2));
  CHECK(profile_id(Bytes{}).id == 0xcbf29ce484222325ull);
  CHECK(profile_id(Bytes{'a'}).id == 0xaf63dc4c8601ec8cull);
  const auto p = encode_profile_id(profile_id(q));
  CHECK(p.size() == 8);
  CHECK(decode_profile_id(p) == profile_id(q));
  CHECK(kind_of([&] { decode_profile_id(Bytes(7)); }) == ErrorKind::decode);
}

TEST_CASE("profile cache is an LRU of bounded size", "[timbre][cache]") {
  ProfileCache cache(3);
  for (uint64_t i = 1; i <= 3; ++i) cache.insert({i}, synthetic_embedding(i));
  CHECK(cache.get({1}).has_value());  // 1 becomes most recent
  const auto evicted = cache.insert({4}, synthetic_embedding(4));
  REQUIRE(evicted.has_value());
  CHECK(evicted->id == 2);
  CHECK(cache.size() == 3);
  CHECK(cache.contains({1}));
  CHECK_FALSE(cache.contains({2}));
  CHECK(*cache.peek({4}) == synthetic_embedding(4));
  CHECK(ProfileCache().capacity() == 64);
}

TEST_CASE("profile cache tolerates concurrent readers", "[timbre][cache]") {
  ProfileCache cache;
  for (uint64_t i = 0; i < 64; ++i) cache.insert({i}, synthetic_embedding(i, 16));
  std::vector<std::thread> readers;
  std::atomic<int> hits{0};
  for (int t = 0; t < 4; ++t)
    readers.emplace_back([&] {
      for (uint64_t i = 0; i < 64; ++i) hits += cache.peek({i}).has_value();
    });
  for (uint64_t i = 64; i < 96; ++i) cache.insert({i}, synthetic_embedding(i, 16));
  for (auto& r : readers) r.join();
  CHECK(cache.size() == 64);
  CHECK(hits.load() > 0);
}

TEST_CASE("profile resolution: new speaker, warm cache, eviction", "[timbre][profile]") {
  const auto cfg = presets::balanced();
  const auto alice = synthetic_embedding(10);
  ProfileCache cache(1);
  TimbreReceiver rx(cache);

  // Session 1: new speaker, full embedding.
  TimbreSender tx(cfg);
  auto a1 = tx.on_utterance(alice);
  REQUIRE(a1.kind == TimbreAction::Kind::full_embedding);
  CHECK(a1.payload.size() <= 385);
  const auto id = rx.on_full(a1.payload);
  CHECK(id == a1.id);
  tx.acknowledge_full(id);
  // Same speaker, next utterance: nothing to send.
  CHECK(tx.on_utterance(perturbed_embedding(alice, 1, 0.05)).kind == TimbreAction::Kind::none);

  // Session 2 with the same receiver: cache warm, 8-byte profile id.
  TimbreSender tx2(cfg);
  tx2.knowledge() = tx.knowledge();
  auto a2 = tx2.on_utterance(alice);
  REQUIRE(a2.kind == TimbreAction::Kind::profile_id);
  CHECK(a2.payload.size() == 8);
  CHECK(rx.on_profile(a2.payload) == TimbreReceiver::Outcome::resolved);
  REQUIRE(rx.current().has_value());

  // Another speaker evicts alice from the one-slot cache.
  const auto bob = synthetic_embedding(20);
  auto b = tx2.on_utterance(bob);
  REQUIRE(b.kind == TimbreAction::Kind::full_embedding);
  tx2.acknowledge_full(rx.on_full(b.payload));

  // Back to alice: sender believes the receiver holds it, receiver misses and
  // the sender answers with the full embedding within one round trip.
  auto a3 = tx2.on_utterance(alice);
  REQUIRE(a3.kind == TimbreAction::Kind::profile_id);
  CHECK(rx.on_profile(a3.payload) == TimbreReceiver::Outcome::miss);
  CHECK(rx.requesting());
  CHECK_FALSE(rx.current().has_value());
  const auto full = tx2.on_cache_miss(a3.id);
  CHECK(rx.on_full(full) == a3.id);
  CHECK_FALSE(rx.requesting());
  const auto restored = rx.current();
  REQUIRE(restored.has_value());
  CHECK(cosine_similarity(*restored, alice) > 0.9999);
}

TEST_CASE("a lost change signal never leaves a stale profile active", "[timbre][profile]") {
  ProfileCache cache;
  TimbreReceiver rx(cache);
  TimbreSender tx(presets::balanced());
  const auto a = tx.on_utterance(synthetic_embedding(1));
  rx.on_full(a.payload);
  const auto b = tx.on_utterance(synthetic_embedding(2));
  REQUIRE(b.kind == TimbreAction::Kind::full_embedding);
  rx.on_lost(b.id);
  CHECK(rx.requesting());
  CHECK_FALSE(rx.current().has_value());
  rx.on_full(b.payload);
  REQUIRE(rx.current().has_value());
  CHECK(rx.active() == b.id);
}

// ------------------------------------------------------------ file formats

TEST_CASE("embedding fixture files: raw float32 and JSON", "[timbre][io]") {
  const auto e = synthetic_embedding(77);
  const auto dir = std::filesystem::temp_directory_path() / "semcodec_timbre_io";
  std::filesystem::create_directories(dir);
  save_embedding(dir / "a.emb", e, false);
  save_embedding(dir / "a.json", e, true);
  CHECK(std::filesystem::file_size(dir / "a.emb") == 768);
  CHECK(load_embedding(dir / "a.emb") == e);
  CHECK(load_embedding(dir / "a.json") == e);
  CHECK(parse_embedding(" [1, 2.5, -3]").values == std::vector<float>{1.0f, 2.5f, -3.0f});
  CHECK(kind_of([] { parse_embedding("abc"); }) == ErrorKind::input);
  CHECK(kind_of([] { parse_embedding("[1, \"x\"]"); }) == ErrorKind::input);
  CHECK(kind_of([] { parse_embedding("[1, 2"); }) == ErrorKind::input);
  CHECK(kind_of([&] { load_embedding(dir / "missing.emb"); }) == ErrorKind::input);
  std::filesystem::remove_all(dir);
}
