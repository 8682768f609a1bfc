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


// End-to-end sessions: analysis, the three component encoders, the lossy
// link and the receiver that turns accepted packets into a reconstruction
// manifest. One link tick is 10 ms, so prosody timestamps double as release
// ticks.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/dsp/audio.hpp"
#include "semcodec/dsp/prosody_track.hpp"
#include "semcodec/dsp/vad.hpp"
#include "semcodec/error.hpp"
#include "semcodec/pipeline/adapters.hpp"
#include "semcodec/pipeline/manifest.hpp"
#include "semcodec/prosody/payload.hpp"
#include "semcodec/prosody/prosody_codec.hpp"
#include "semcodec/text/text_codec.hpp"
#include "semcodec/timbre/embedding.hpp"
#include "semcodec/timbre/timbre_codec.hpp"
#include "semcodec/transport/capture.hpp"
#include "semcodec/transport/link.hpp"
#include "semcodec/transport/packet.hpp"
#include "semcodec/transport/report.hpp"

namespace semcodec::pipeline {

/// Sender-side view of the input before anything is transmitted.
struct Analysis {
  std::vector<dsp::VadSegment> segments;
  std::vector<TimedChunk> chunks;
  dsp::ProsodyTrack track;
  dsp::SpeakerStats stats;
};

inline Analysis analyze(const dsp::AudioBuffer& audio, SttAdapter& stt, const QualityModeConfig& cfg) {
  if (audio.empty()) fail(ErrorKind::input, "session: zero-length audio");
  Analysis a;
  a.segments = dsp::vad_segment(audio, cfg);
  a.chunks = stt.transcribe(audio, a.segments, cfg);
  const dsp::RawProsody raw = dsp::extract_raw_prosody(audio);
  try {
    a.stats = dsp::estimate_speaker_stats(raw);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::precondition) throw;
    a.stats = dsp::fallback_stats(raw);
  }
  a.track = dsp::normalize_track(raw, a.stats);
  return a;
}

/// Timbre knowledge that outlives a single session: the receiver's profile
/// cache and what the sender knows the receiver holds.
struct TimbreMemory {
  timbre::ProfileCache cache;
  timbre::ReceiverKnowledge known;
};

/// Receiver state shared by live sessions and capture replay. Every packet
/// it accepts (or answers with a cache miss) is appended to the capture, so
/// replaying the capture reproduces the same manifest.
class SessionReceiver {
 public:
  explicit SessionReceiver(const QualityModeConfig& cfg, timbre::ProfileCache* shared_cache = nullptr)
      : cfg_(cfg),
        coder_(cfg),
        text_(cfg),
        own_cache_(shared_cache ? nullptr : std::make_unique<timbre::ProfileCache>()),
        timbre_(shared_cache ? *shared_cache : *own_cache_) {}

  transport::Verdict on_packet(const transport::Packet& p) {
    using transport::PacketType;
    using transport::Verdict;
    std::optional<Verdict> v;
    switch (p.header.ptype) {
      case PacketType::text: v = on_text(p); break;
      case PacketType::prosody_key:
      case PacketType::prosody_delta: v = on_prosody(p.header.timestamp_cs, p.payload); break;
      case PacketType::timbre:
        try {
          timbre_.on_full(p.payload);
          v = Verdict::accept;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::decode) throw;
        }
        break;
      case PacketType::timbre_profile:
        try {
          v = timbre_.on_profile(p.payload) == timbre::TimbreReceiver::Outcome::miss ? Verdict::miss : Verdict::accept;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::decode) throw;
        }
        break;
    }
    if (!v) return Verdict::reject;
    if (p.header.ptype == PacketType::timbre || p.header.ptype == PacketType::timbre_profile) ++timbre_packets_;
    frames_.push_back(transport::frame_packet(p));
    return *v;
  }

  /// The link gave up on a TEXT message.
  void on_text_lost(uint16_t seq) { mark_text_gaps(static_cast<uint16_t>(seq + 1)); }

  /// The link gave up on a timbre message signalling `id`.
  void on_timbre_lost(std::optional<timbre::TimbreProfileId> id) { timbre_.on_lost(id); }

  /// Decodes buffered prosody in timestamp order and assembles the manifest.
  ReconstructionManifest finish(uint32_t duration_cs) {
    prosody::ProsodyDecoder decoder(cfg_);
    auto sorted = prosody_;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [ts, codes] : sorted) decoder.accept_codes(ts, codes);
    keyframes_ = decoder.keyframes();

    ReconstructionManifest m;
    m.mode = cfg_.mode_name;
    m.duration_cs = duration_cs;
    m.utterances = utterances_;
    m.gaps = gaps_;
    m.prosody = decoder.reconstruct(duration_cs);
    if (timbre_.requesting()) {
      m.timbre_state = "requesting";
    } else if (auto e = timbre_.current()) {
      m.timbre_state = "resolved";
      m.timbre_dim = e->dim();
    }
    if (auto id = timbre_.active()) m.timbre_profile = id->id;
    m.stats = {keyframes_.size(), decoder.discarded(), utterances_.size(), timbre_packets_};
    return m;
  }

  const std::vector<transport::Bytes>& frames() const { return frames_; }
  const text::ContextDictionary& dictionary() const { return text_.dictionary(); }
  /// Keyframes reconstructed by the last finish().
  const std::vector<prosody::ReceivedKeyframe>& keyframes() const { return keyframes_; }

 private:
  std::optional<transport::Verdict> on_text(const transport::Packet& p) {
    transport::ByteView body = p.payload;
    transport::Piggyback pb;
    transport::Bytes text_bytes;
    std::vector<std::pair<uint64_t, prosody::KeyframeCodes>> riders;
    try {
      if (p.header.flags) {
        std::tie(pb, text_bytes) = transport::split_piggyback(body);
        body = text_bytes;
        const uint64_t spacing = keyframe_spacing();
        for (size_t i = 0; i < pb.keyframes.size(); ++i)
          riders.emplace_back(pb.first_timestamp_cs + i * spacing,
                              coder_.decode(prosody::bits_from_bytes(pb.keyframes[i])));
      }
      // Decoding advances the dictionary only on success.
      std::string text = text_.decode(body);
      mark_text_gaps(p.header.seq);
      utterances_.push_back({p.header.seq, p.header.timestamp_cs, std::move(text)});
      next_text_seq_ = static_cast<uint16_t>(p.header.seq + 1);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::decode && e.kind() != ErrorKind::desync) throw;
      return std::nullopt;
    }
    prosody_.insert(prosody_.end(), riders.begin(), riders.end());
    return transport::Verdict::accept;
  }

  std::optional<transport::Verdict> on_prosody(uint32_t ts, const transport::Bytes& payload) {
    try {
      prosody_.emplace_back(ts, coder_.decode(prosody::bits_from_bytes(payload)));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::decode) throw;
      return std::nullopt;
    }
    return transport::Verdict::accept;
  }

  /// Records every TEXT sequence number skipped before `upto`.
  void mark_text_gaps(uint16_t upto) {
    while (next_text_seq_ != upto) {
      gaps_.push_back({next_text_seq_});
      next_text_seq_ = static_cast<uint16_t>(next_text_seq_ + 1);
    }
  }

  uint64_t keyframe_spacing() const {
    return prosody::keyframe_stride(cfg_.keyframe_rate_hz) * static_cast<uint64_t>(cfg_.absolute_keyframe_interval);
  }

  QualityModeConfig cfg_;
  prosody::ProsodyEntropyCoder coder_;
  text::TextDecoder text_;
  std::unique_ptr<timbre::ProfileCache> own_cache_;
  timbre::TimbreReceiver timbre_;
  uint16_t next_text_seq_ = 0;
  std::vector<ManifestUtterance> utterances_;
  std::vector<TextGap> gaps_;
  std::vector<std::pair<uint64_t, prosody::KeyframeCodes>> prosody_;
  std::vector<prosody::ReceivedKeyframe> keyframes_;
  std::vector<transport::Bytes> frames_;
  size_t timbre_packets_ = 0;
};

struct SessionOptions {
  transport::ChannelModel channel{};
  transport::LinkPolicy policy{};
  /// Persistent timbre state; a fresh cache is used when null.
  TimbreMemory* timbre_memory = nullptr;
};

/// Per-type link counters plus the receiver-side view.
struct DeliveryStats {
  std::array<transport::TypeStats, 5> by_type{};
  size_t text_gaps = 0;
  size_t keyframes_sent = 0;
  size_t keyframes_received = 0;
  size_t deltas_discarded = 0;

  const transport::TypeStats& of(transport::PacketType t) const { return by_type[static_cast<size_t>(t)]; }
  uint64_t retransmissions() const {
    uint64_t n = 0;
    for (const auto& s : by_type) n += s.retransmissions;
    return n;
  }
  uint64_t dropped_frames() const {
    uint64_t n = 0;
    for (const auto& s : by_type) n += s.dropped_frames;
    return n;
  }
  /// Fraction of PROSODY_DELTA messages that reached the receiver intact.
  double delta_survival() const {
    const auto& d = of(transport::PacketType::prosody_delta);
    return d.messages ? static_cast<double>(d.delivered) / static_cast<double>(d.messages) : 1.0;
  }

  nlohmann::json to_json() const {
    nlohmann::json types = nlohmann::json::object();
    for (size_t i = 0; i < by_type.size(); ++i) {
      const auto& s = by_type[i];
      types[transport::to_string(static_cast<transport::PacketType>(i))] = {
          {"messages", s.messages},         {"transmissions", s.transmissions},
          {"retransmissions", s.retransmissions}, {"delivered", s.delivered},
          {"lost", s.lost},                 {"dropped_frames", s.dropped_frames},
          {"corrupted_frames", s.corrupted_frames}, {"combined_recoveries", s.combined_recoveries},
          {"overflow_drops", s.overflow_drops}};
    }
    return {{"types", types},
            {"retransmissions", retransmissions()},
            {"dropped_frames", dropped_frames()},
            {"text_gaps", text_gaps},
            {"keyframes_sent", keyframes_sent},
            {"keyframes_received", keyframes_received},
            {"deltas_discarded", deltas_discarded},
            {"delta_survival", delta_survival()}};
  }
};

struct SessionResult {
  transport::BitrateReport report;
  DeliveryStats delivery;
  transport::Capture capture;
  ReconstructionManifest manifest;
  std::vector<transport::TraceRecord> trace;
  std::string trace_text;
  std::vector<std::string> sent_texts;  // prepared chunk texts, in order
  std::vector<prosody::EncodedKeyframe> sent_keyframes;
  std::vector<prosody::ReceivedKeyframe> received_keyframes;
  text::ContextDictionary sender_dictionary;
  text::ContextDictionary receiver_dictionary;
};

namespace detail {

/// Absolute keyframes that ride in each TEXT chunk: every absolute keyframe
/// due by the chunk's release joins the first such chunk, provided the group
/// is evenly spaced at the absolute-keyframe cadence.
inline std::vector<std::vector<size_t>> plan_piggyback(const std::vector<prosody::EncodedKeyframe>& kfs,
                                                       const std::vector<TimedChunk>& chunks,
                                                       const QualityModeConfig& cfg) {
  std::vector<std::vector<size_t>> plan(chunks.size());
  if (!cfg.piggyback_keyframes) return plan;
  const uint64_t spacing =
      prosody::keyframe_stride(cfg.keyframe_rate_hz) * static_cast<uint64_t>(cfg.absolute_keyframe_interval);
  size_t c = 0;
  for (size_t k = 0; k < kfs.size(); ++k) {
    if (!kfs[k].is_absolute()) continue;
    while (c < chunks.size() && chunks[c].end_cs < kfs[k].timestamp_cs) ++c;
    if (c == chunks.size()) break;
    auto& group = plan[c];
    const bool fits = group.empty() || (kfs[k].timestamp_cs == kfs[group.back()].timestamp_cs + spacing &&
                                        group.size() < 255 && kfs[k].bits.bytes.size() <= 255);
    if (fits && !kfs[k].bits.bytes.empty() && kfs[k].bits.bytes.size() <= 255) group.push_back(k);
  }
  return plan;
}

}  // namespace detail

/// Runs one session over the simulated link: VAD, recognition, prosody
/// analysis, then TEXT (stop-and-wait, dictionary advancing on
/// acknowledgement), PROSODY_KEY / PROSODY_DELTA at their timestamps and the
/// timbre decision at the start.
/// Variant taking a precomputed analysis, so experiments that re-encode the
/// same audio under several settings analyze it once.
inline SessionResult encode_session(const dsp::AudioBuffer& audio, const Analysis& analysis,
                                    const timbre::TimbreEmbedding& embedding, const QualityModeConfig& cfg,
                                    const SessionOptions& opt = {}) {
  using transport::Message;
  using transport::PacketType;
  using transport::SenderOutcome;
  if (audio.empty()) fail(ErrorKind::input, "session: zero-length audio");
  throw_if_invalid(validate_config(cfg));
  embedding.validate(static_cast<size_t>(cfg.embedding_dim));
  const auto duration_cs = static_cast<uint32_t>(analysis.track.size());

  SessionResult result;
  result.sent_keyframes = prosody::ProsodyEncoder(cfg).encode(analysis.track);

  text::TextEncoder text_enc(cfg);
  std::vector<TimedChunk> chunks;
  for (const auto& c : analysis.chunks) {
    std::string prepared = text_enc.prepare(c.text);
    if (prepared.size() < text::kMinChunkChars) continue;
    chunks.push_back({std::move(prepared), c.start_cs, c.end_cs});
  }
  for (const auto& c : chunks) result.sent_texts.push_back(c.text);
  const auto piggyback = detail::plan_piggyback(result.sent_keyframes, chunks, cfg);
  std::vector<bool> rides(result.sent_keyframes.size(), false);
  for (const auto& g : piggyback)
    for (size_t k : g) rides[k] = true;

  transport::Link link(opt.channel, opt.policy);
  SessionReceiver rx(cfg, opt.timbre_memory ? &opt.timbre_memory->cache : nullptr);
  timbre::TimbreSender timbre_tx(cfg);
  if (opt.timbre_memory) timbre_tx.knowledge() = opt.timbre_memory->known;

  std::map<uint64_t, size_t> text_ids;  // message id -> chunk index
  std::map<uint64_t, timbre::TimbreProfileId> timbre_ids;

  auto submit_text = [&](size_t i, uint64_t not_before) {
    const TimedChunk& c = chunks[i];
    Message m{PacketType::text, c.start_cs, text_enc.encode(c.text)};
    m.content_bits = 8 * m.payload.size();
    if (!piggyback[i].empty()) {
      transport::Piggyback pb;
      pb.first_timestamp_cs = result.sent_keyframes[piggyback[i].front()].timestamp_cs;
      for (size_t k : piggyback[i]) {
        pb.keyframes.push_back(result.sent_keyframes[k].bits.bytes);
        m.piggyback_bits += result.sent_keyframes[k].bits.bit_count;
      }
      m.payload = transport::compose_piggyback(pb, m.payload);
      m.flags = true;
      m.framing_bytes = pb.framing_bytes();
    }
    text_ids[link.submit(std::move(m), std::max<uint64_t>(not_before, c.end_cs))] = i;
  };
  auto submit_timbre = [&](PacketType t, timbre::TimbreProfileId id, transport::Bytes payload, uint64_t at) {
    Message m{t, 0, std::move(payload)};
    m.content_bits = 8 * m.payload.size();
    timbre_ids[link.submit(std::move(m), at)] = id;
  };

  link.on_receive = [&](const transport::Packet& p, uint64_t) { return rx.on_packet(p); };
  link.on_outcome = [&](uint64_t id, const Message& m, SenderOutcome outcome, uint64_t tick) {
    switch (m.ptype) {
      case PacketType::text: {
        const size_t i = text_ids.at(id);
        if (outcome == SenderOutcome::acked) text_enc.acknowledge(chunks[i].text);
        if (i + 1 < chunks.size()) submit_text(i + 1, tick);
        break;
      }
      case PacketType::timbre:
        if (outcome == SenderOutcome::acked) timbre_tx.acknowledge_full(timbre_ids.at(id));
        break;
      case PacketType::timbre_profile:
        if (outcome == SenderOutcome::miss) {
          const auto pid = timbre_ids.at(id);
          submit_timbre(PacketType::timbre, pid, timbre_tx.on_cache_miss(pid), tick);
        }
        break;
      default: break;
    }
  };
  link.on_loss = [&](uint64_t id, PacketType t, uint16_t seq, uint64_t) {
    if (t == PacketType::text) rx.on_text_lost(seq);
    if (t == PacketType::timbre || t == PacketType::timbre_profile) rx.on_timbre_lost(timbre_ids.at(id));
  };

  const timbre::TimbreAction action = timbre_tx.on_utterance(embedding);
  if (action.kind == timbre::TimbreAction::Kind::full_embedding)
    submit_timbre(PacketType::timbre, action.id, action.payload, 0);
  else if (action.kind == timbre::TimbreAction::Kind::profile_id)
    submit_timbre(PacketType::timbre_profile, action.id, action.payload, 0);

  for (size_t k = 0; k < result.sent_keyframes.size(); ++k) {
    if (rides[k]) continue;
    const auto& kf = result.sent_keyframes[k];
    Message m{kf.is_absolute() ? PacketType::prosody_key : PacketType::prosody_delta, kf.timestamp_cs, kf.bits.bytes};
    m.content_bits = kf.bits.bit_count;
    link.submit(std::move(m), kf.timestamp_cs);
  }
  if (!chunks.empty()) submit_text(0, 0);

  link.run();

  result.manifest = rx.finish(duration_cs);
  result.received_keyframes = rx.keyframes();
  result.capture = {cfg.mode_name, duration_cs, rx.frames()};
  result.trace = link.trace_records();
  result.trace_text = link.trace_text();
  result.report = transport::account_bitrate(transport::count_bits(result.trace), audio.duration_s());
  for (size_t t = 0; t < result.delivery.by_type.size(); ++t)
    result.delivery.by_type[t] = link.stats(static_cast<PacketType>(t));
  result.delivery.text_gaps = result.manifest.gaps.size();
  result.delivery.keyframes_sent = result.sent_keyframes.size();
  result.delivery.keyframes_received = result.manifest.stats.keyframes_received;
  result.delivery.deltas_discarded = result.manifest.stats.deltas_discarded;
  result.sender_dictionary = text_enc.dictionary();
  result.receiver_dictionary = rx.dictionary();
  if (opt.timbre_memory) opt.timbre_memory->known = timbre_tx.knowledge();
  return result;
}

inline SessionResult encode_session(const dsp::AudioBuffer& audio, SttAdapter& stt,
                                    const timbre::TimbreEmbedding& embedding, const QualityModeConfig& cfg,
                                    const SessionOptions& opt = {}) {
  throw_if_invalid(validate_config(cfg));
  embedding.validate(static_cast<size_t>(cfg.embedding_dim));
  return encode_session(audio, analyze(audio, stt, cfg), embedding, cfg, opt);
}

/// Replays a capture through a fresh receiver.
inline ReconstructionManifest decode_session(const transport::Capture& capture, const QualityModeConfig& cfg,
                                             timbre::ProfileCache* cache = nullptr) {
  SessionReceiver rx(cfg, cache);
  for (size_t i = 0; i < capture.frames.size(); ++i) {
    transport::Packet p;
    try {
      p = transport::parse_frame(capture.frames[i]);
    } catch (const Error& e) {
      fail(ErrorKind::input, "capture: frame " + std::to_string(i) + " is malformed: " + e.what());
    }
    rx.on_packet(p);
  }
  return rx.finish(capture.duration_cs);
}

/// Mode of a capture: a preset named in its preamble.
inline QualityModeConfig capture_mode(const transport::Capture& capture) {
  auto cfg = preset(capture.mode_name);
  if (!cfg) fail(ErrorKind::config, "capture names unknown mode '" + capture.mode_name + "'; pass --mode");
  return *cfg;
}

}  // namespace semcodec::pipeline
