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


// Timbre stream: embedding quantization, lossless payload compression,
// change detection, content-addressed profile ids and the receiver cache.
//
// TIMBRE payload:         [precision | codec << 4][body]
//   precision: 0 = half, 1 = single; codec: 0 = stored, 1 = brotli, 2 = zlib
// TIMBRE_PROFILE payload: [profile id: 8 bytes, big endian]

#pragma once

#include <cmath>
#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/error.hpp"
#include "semcodec/text/compressor.hpp"
#include "semcodec/timbre/embedding.hpp"
#include "semcodec/timbre/half.hpp"

namespace semcodec::timbre {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline constexpr size_t kProfileIdBytes = 8;
inline constexpr size_t kDefaultCacheCapacity = 64;
/// Runtime default similarity threshold for change detection.
inline constexpr double kDefaultChangeSimilarity = 0.7;
/// Compression effort for the one-off timbre payload.
inline constexpr int kTimbreBrotliLevel = 11;
inline constexpr int kTimbreZlibLevel = 9;

inline size_t bytes_per_component(Precision p) { return p == Precision::half ? 2 : 4; }

/// Little-endian half (2 bytes) or single (4 bytes) per component. Throws
/// ErrorKind::precondition on non-finite input or half-precision overflow.
inline Bytes quantize_embedding(const TimbreEmbedding& e, Precision precision, size_t dim) {
  e.validate(dim);
  Bytes out;
  out.reserve(dim * bytes_per_component(precision));
  for (float v : e.values) {
    if (precision == Precision::half) {
      const uint16_t h = float_to_half(v);
      if ((h & 0x7C00u) == 0x7C00u) fail(ErrorKind::precondition, "embedding value overflows half precision");
      out.push_back(static_cast<uint8_t>(h & 0xFF));
      out.push_back(static_cast<uint8_t>(h >> 8));
    } else {
      const uint32_t u = std::bit_cast<uint32_t>(v);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<uint8_t>((u >> (8 * b)) & 0xFF));
    }
  }
  return out;
}

inline TimbreEmbedding dequantize_embedding(ByteView payload, Precision precision) {
  const size_t w = bytes_per_component(precision);
  if (payload.empty() || payload.size() % w != 0) fail(ErrorKind::decode, "timbre payload has a partial component");
  TimbreEmbedding e;
  e.precision = precision;
  e.values.reserve(payload.size() / w);
  for (size_t i = 0; i < payload.size(); i += w) {
    if (precision == Precision::half) {
      e.values.push_back(half_to_float(static_cast<uint16_t>(payload[i] | payload[i + 1] << 8)));
    } else {
      uint32_t u = 0;
      for (int b = 3; b >= 0; --b) u = (u << 8) | payload[i + static_cast<size_t>(b)];
      e.values.push_back(std::bit_cast<float>(u));
    }
  }
  return e;
}

/// Compresses a quantized payload; falls back to stored mode whenever the
/// compressor would not shrink it.
inline Bytes compress_embedding(ByteView payload, Precision precision, CompressorKind kind) {
  const auto& c = text::compressor_for(kind);
  Bytes body = c.compress(payload, {}, kind == CompressorKind::brotli ? kTimbreBrotliLevel : kTimbreZlibLevel);
  uint8_t codec = kind == CompressorKind::brotli ? 1 : 2;
  if (body.size() >= payload.size()) {
    body.assign(payload.begin(), payload.end());
    codec = 0;
  }
  Bytes out;
  out.reserve(body.size() + 1);
  out.push_back(static_cast<uint8_t>((precision == Precision::half ? 0 : 1) | codec << 4));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

struct DecodedTimbre {
  Precision precision;
  Bytes payload;
};

inline DecodedTimbre decompress_embedding(ByteView bytes) {
  if (bytes.empty()) fail(ErrorKind::decode, "empty timbre payload");
  const uint8_t fmt = bytes[0];
  const uint8_t prec = fmt & 0x0F, codec = fmt >> 4;
  if (prec > 1 || codec > 2) fail(ErrorKind::decode, "timbre payload: unknown format byte");
  const Precision precision = prec == 0 ? Precision::half : Precision::single;
  const ByteView body = bytes.subspan(1);
  Bytes payload;
  if (codec == 0) {
    payload.assign(body.begin(), body.end());
  } else {
    payload = text::compressor_for(codec == 1 ? CompressorKind::brotli : CompressorKind::zlib)
                  .decompress(body, {}, 64 * 1024);
  }
  if (payload.empty() || payload.size() % bytes_per_component(precision) != 0)
    fail(ErrorKind::decode, "timbre payload has a partial component");
  return {precision, std::move(payload)};
}

/// a·b / (|a||b|), clamped to [-1, 1]. Throws ErrorKind::precondition on a
/// dimension mismatch or zero norm.
inline double cosine_similarity(const TimbreEmbedding& a, const TimbreEmbedding& b) {
  if (a.dim() != b.dim()) fail(ErrorKind::precondition, "cosine similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.dim(); ++i) {
    dot += static_cast<double>(a.values[i]) * b.values[i];
    na += static_cast<double>(a.values[i]) * a.values[i];
    nb += static_cast<double>(b.values[i]) * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) fail(ErrorKind::precondition, "cosine similarity: zero norm");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

/// True iff the similarity to the previous embedding is strictly below
/// `similarity_threshold`.
inline bool detect_speaker_change(const TimbreEmbedding& current, const TimbreEmbedding& previous,
                                  double similarity_threshold = kDefaultChangeSimilarity) {
  return cosine_similarity(current, previous) < similarity_threshold;
}

/// 64-bit FNV-1a over the quantized bytes.
struct TimbreProfileId {
  uint64_t id = 0;
  friend bool operator==(const TimbreProfileId&, const TimbreProfileId&) = default;
};

inline TimbreProfileId profile_id(ByteView quantized) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint8_t b : quantized) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return {h};
}

inline Bytes encode_profile_id(TimbreProfileId id) {
  Bytes out(kProfileIdBytes);
  for (size_t i = 0; i < kProfileIdBytes; ++i) out[i] = static_cast<uint8_t>(id.id >> (8 * (7 - i)));
  return out;
}

inline TimbreProfileId decode_profile_id(ByteView bytes) {
  if (bytes.size() != kProfileIdBytes) fail(ErrorKind::decode, "timbre profile payload must be 8 bytes");
  uint64_t v = 0;
  for (uint8_t b : bytes) v = (v << 8) | b;
  return {v};
}

}  // namespace semcodec::timbre

template <>
struct std::hash<semcodec::timbre::TimbreProfileId> {
  size_t operator()(const semcodec::timbre::TimbreProfileId& p) const noexcept { return std::hash<uint64_t>{}(p.id); }
};

namespace semcodec::timbre {

/// Receiver-side LRU store of embeddings keyed by profile id. Mutations take
/// an exclusive lock; contains() and peek() may run concurrently.
class ProfileCache {
 public:
  explicit ProfileCache(size_t capacity = kDefaultCacheCapacity) : capacity_(capacity) {
    if (capacity_ == 0) fail(ErrorKind::precondition, "profile cache capacity must be positive");
  }

  /// Inserts or refreshes an entry; returns the id evicted to make room.
  std::optional<TimbreProfileId> insert(TimbreProfileId id, TimbreEmbedding e) {
    std::unique_lock lock(mu_);
    if (auto it = index_.find(id); it != index_.end()) {
      it->second->second = std::move(e);
      order_.splice(order_.begin(), order_, it->second);
      return std::nullopt;
    }
    std::optional<TimbreProfileId> evicted;
    if (order_.size() == capacity_) {
      evicted = order_.back().first;
      index_.erase(order_.back().first);
      order_.pop_back();
    }
    order_.emplace_front(id, std::move(e));
    index_[id] = order_.begin();
    return evicted;
  }

  /// Lookup that marks the entry most recently used.
  std::optional<TimbreEmbedding> get(TimbreProfileId id) {
    std::unique_lock lock(mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  /// Lookup without touching recency.
  std::optional<TimbreEmbedding> peek(TimbreProfileId id) const {
    std::shared_lock lock(mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second->second;
  }

  bool contains(TimbreProfileId id) const {
    std::shared_lock lock(mu_);
    return index_.count(id) > 0;
  }

  bool erase(TimbreProfileId id) {
    std::unique_lock lock(mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return false;
    order_.erase(it->second);
    index_.erase(it);
    return true;
  }

  size_t size() const {
    std::shared_lock lock(mu_);
    return order_.size();
  }
  size_t capacity() const { return capacity_; }

 private:
  using Entry = std::pair<TimbreProfileId, TimbreEmbedding>;
  size_t capacity_;
  mutable std::shared_mutex mu_;
  std::list<Entry> order_;
  std::unordered_map<TimbreProfileId, std::list<Entry>::iterator> index_;
};

enum class ProfileDecision { send_profile_id, send_full_embedding };

/// Sender's knowledge of which profiles the receiver holds (learned from
/// acknowledged full-embedding deliveries; cleared on a reported miss).
struct ReceiverKnowledge {
  std::unordered_set<TimbreProfileId> held;
};

inline ProfileDecision resolve_profile(const ReceiverKnowledge& known, TimbreProfileId id) {
  return known.held.count(id) ? ProfileDecision::send_profile_id : ProfileDecision::send_full_embedding;
}

/// What the sender must put on the wire for one utterance.
struct TimbreAction {
  enum class Kind { none, profile_id, full_embedding } kind = Kind::none;
  TimbreProfileId id;
  Bytes payload;  // TIMBRE or TIMBRE_PROFILE payload, empty for none
};

/// Sender-side state machine: change detection against the previously
/// signalled embedding, then profile-id vs full-embedding resolution.
class TimbreSender {
 public:
  explicit TimbreSender(const QualityModeConfig& cfg) : cfg_(cfg) {}

  TimbreAction on_utterance(const TimbreEmbedding& e) {
    const Bytes q = quantize_embedding(e, cfg_.embedding_precision, static_cast<size_t>(cfg_.embedding_dim));
    const TimbreProfileId id = profile_id(q);
    if (previous_ && !detect_speaker_change(e, *previous_, cfg_.change_similarity_threshold())) return {};
    previous_ = e;
    active_ = id;
    if (resolve_profile(known_, id) == ProfileDecision::send_profile_id)
      return {TimbreAction::Kind::profile_id, id, encode_profile_id(id)};
    last_full_ = compress_embedding(q, cfg_.embedding_precision, cfg_.timbre_compressor);
    return {TimbreAction::Kind::full_embedding, id, last_full_};
  }

  /// Receiver confirmed it stored the full embedding for `id`.
  void acknowledge_full(TimbreProfileId id) { known_.held.insert(id); }

  /// Receiver reported a cache miss: forget the id and return the full
  /// embedding payload to send instead.
  Bytes on_cache_miss(TimbreProfileId id) {
    known_.held.erase(id);
    return last_full_for(id);
  }

  std::optional<TimbreProfileId> active() const { return active_; }
  ReceiverKnowledge& knowledge() { return known_; }

 private:
  Bytes last_full_for(TimbreProfileId id) {
    if (previous_) {
      const Bytes q =
          quantize_embedding(*previous_, cfg_.embedding_precision, static_cast<size_t>(cfg_.embedding_dim));
      if (profile_id(q) == id) return compress_embedding(q, cfg_.embedding_precision, cfg_.timbre_compressor);
    }
    return last_full_;
  }

  QualityModeConfig cfg_;
  std::optional<TimbreEmbedding> previous_;
  std::optional<TimbreProfileId> active_;
  ReceiverKnowledge known_;
  Bytes last_full_;
};

/// Receiver-side state: the active profile is either resolved (embedding in
/// hand) or requesting (a full embedding has been asked for). It never
/// reports an embedding that does not match the signalled id.
class TimbreReceiver {
 public:
  explicit TimbreReceiver(ProfileCache& cache) : cache_(cache) {}

  enum class Outcome { resolved, miss };

  /// Full TIMBRE payload: decode, cache under its content id, activate.
  TimbreProfileId on_full(ByteView payload) {
    auto d = decompress_embedding(payload);
    const TimbreProfileId id = profile_id(d.payload);
    cache_.insert(id, dequantize_embedding(d.payload, d.precision));
    active_ = id;
    requesting_ = false;
    return id;
  }

  /// TIMBRE_PROFILE payload: activate from cache or enter requesting state.
  Outcome on_profile(ByteView payload) {
    const TimbreProfileId id = decode_profile_id(payload);
    active_ = id;
    requesting_ = !cache_.get(id).has_value();
    return requesting_ ? Outcome::miss : Outcome::resolved;
  }

  /// A timbre packet for a signalled change was lost: do not keep using the
  /// old profile.
  void on_lost(std::optional<TimbreProfileId> signalled) {
    if (signalled) active_ = signalled;
    requesting_ = true;
  }

  bool requesting() const { return requesting_; }
  std::optional<TimbreProfileId> active() const { return active_; }

  /// Embedding for synthesis, or nothing while requesting.
  std::optional<TimbreEmbedding> current() const {
    if (requesting_ || !active_) return std::nullopt;
    return cache_.peek(*active_);
  }

 private:
  ProfileCache& cache_;
  std::optional<TimbreProfileId> active_;
  bool requesting_ = false;
};

}  // namespace semcodec::timbre
