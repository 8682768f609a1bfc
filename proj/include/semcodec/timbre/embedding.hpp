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


// Speaker embeddings and their fixture file formats: raw little-endian
// 32-bit floats, or a JSON array of numbers.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "semcodec/config.hpp"
#include "semcodec/error.hpp"

namespace semcodec::timbre {

struct TimbreEmbedding {
  std::vector<float> values;
  Precision precision = Precision::single;
  std::optional<std::string> speaker_hint;

  size_t dim() const { return values.size(); }

  double norm() const {
    double s = 0.0;
    for (float v : values) s += static_cast<double>(v) * v;
    return std::sqrt(s);
  }

  /// Throws ErrorKind::precondition unless the embedding has `dim` finite
  /// components and a non-zero norm.
  void validate(size_t dim) const {
    if (values.size() != dim)
      fail(ErrorKind::precondition,
           "embedding has " + std::to_string(values.size()) + " components, expected " + std::to_string(dim));
    for (float v : values)
      if (!std::isfinite(v)) fail(ErrorKind::precondition, "embedding contains a non-finite value");
    if (norm() == 0.0) fail(ErrorKind::precondition, "embedding has zero norm");
  }

  friend bool operator==(const TimbreEmbedding& a, const TimbreEmbedding& b) { return a.values == b.values; }
};

/// Parses either format: a buffer whose first non-blank byte is '[' is JSON,
/// anything else is raw little-endian float32.
inline TimbreEmbedding parse_embedding(const std::string& bytes) {
  TimbreEmbedding e;
  const auto first = bytes.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && bytes[first] == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorKind::input, std::string("embedding JSON: ") + ex.what());
    }
    for (const auto& v : j) {
      if (!v.is_number()) fail(ErrorKind::input, "embedding JSON: non-numeric element");
      e.values.push_back(v.get<float>());
    }
    return e;
  }
  if (bytes.size() % 4 != 0) fail(ErrorKind::input, "raw embedding size is not a multiple of 4 bytes");
  e.values.resize(bytes.size() / 4);
  for (size_t i = 0; i < e.values.size(); ++i) {
    uint32_t u = 0;
    for (int b = 3; b >= 0; --b) u = (u << 8) | static_cast<uint8_t>(bytes[4 * i + static_cast<size_t>(b)]);
    e.values[i] = std::bit_cast<float>(u);
  }
  return e;
}

inline TimbreEmbedding load_embedding(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot open embedding file " + path.string());
  return parse_embedding(std::string(std::istreambuf_iterator<char>(in), {}));
}

inline std::string embedding_to_raw(const TimbreEmbedding& e) {
  std::string out(e.values.size() * 4, '\0');
  for (size_t i = 0; i < e.values.size(); ++i) {
    const uint32_t u = std::bit_cast<uint32_t>(e.values[i]);
    for (int b = 0; b < 4; ++b) out[4 * i + static_cast<size_t>(b)] = static_cast<char>((u >> (8 * b)) & 0xFF);
  }
  return out;
}

inline std::string embedding_to_json(const TimbreEmbedding& e) { return nlohmann::json(e.values).dump(); }

inline void save_embedding(const std::filesystem::path& path, const TimbreEmbedding& e, bool json = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::input, "cannot write embedding file " + path.string());
  out << (json ? embedding_to_json(e) : embedding_to_raw(e));
}

/// Speaker-embedding-like vector: smooth (first-order autoregressive)
/// structure plus independent jitter, scaled to unit norm. `correlation`
/// in [0, 1) controls neighbouring-component correlation.
inline TimbreEmbedding synthetic_embedding(uint64_t seed, size_t dim = 192, double correlation = 0.9) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  double state = n(rng);
  for (auto& x : v) {
    state = correlation * state + std::sqrt(1.0 - correlation * correlation) * n(rng);
    x = state;
  }
  double s = 0.0;
  for (double x : v) s += x * x;
  TimbreEmbedding e;
  e.values.reserve(dim);
  for (double x : v) e.values.push_back(static_cast<float>(x / std::sqrt(s)));
  return e;
}

/// Low-entropy variant: a correlated embedding in which a `zero_fraction`
/// share of components is exactly zero (inactive dimensions).
inline TimbreEmbedding low_entropy_embedding(uint64_t seed, size_t dim = 192, double zero_fraction = 0.25) {
  TimbreEmbedding e = synthetic_embedding(seed, dim, 0.9);
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : e.values)
    if (u(rng) < zero_fraction) v = 0.0f;
  if (e.norm() == 0.0) e.values[0] = 1.0f;
  return e;
}

/// A nearby embedding of the same speaker: `base` plus isotropic noise whose
/// norm is `spread` times the base norm, renormalized.
inline TimbreEmbedding perturbed_embedding(const TimbreEmbedding& base, uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> noise(base.dim());
  double ns = 0.0;
  for (auto& x : noise) {
    x = n(rng);
    ns += x * x;
  }
  const double scale = spread * base.norm() / std::sqrt(ns);
  std::vector<double> v(base.dim());
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    v[i] = base.values[i] + scale * noise[i];
    s += v[i] * v[i];
  }
  TimbreEmbedding e = base;
  for (size_t i = 0; i < v.size(); ++i) e.values[i] = static_cast<float>(v[i] / std::sqrt(s) * base.norm());
  return e;
}

}  // namespace semcodec::timbre
