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


// End-to-end sessions, capture replay, adapters, and the corpus-level
// benchmark and sweep runners.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "semcodec/pipeline/adapters.hpp"
#include "semcodec/pipeline/benchmark.hpp"
#include "semcodec/pipeline/corpus.hpp"
#include "semcodec/pipeline/manifest.hpp"
#include "semcodec/pipeline/session.hpp"
#include "semcodec/pipeline/subprocess.hpp"
#include "semcodec/prosody/spline.hpp"
#include "semcodec/transport/capture.hpp"

using namespace semcodec;
using namespace semcodec::pipeline;
using transport::PacketType;

namespace {

ErrorKind kind_of(const std::function<void()>& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::config;
}

const std::vector<LoadedUtterance>& fixtures() {
  static const std::vector<LoadedUtterance> utts =
      load_utterances(load_corpus(ensure_fixture_corpus(SEMCODEC_FIXTURE_DIR)));
  return utts;
}

const Corpus& fixture_corpus() {
  static const Corpus c = load_corpus(ensure_fixture_corpus(SEMCODEC_FIXTURE_DIR));
  return c;
}

SessionResult run(const LoadedUtterance& u, const QualityModeConfig& cfg, SessionOptions opt = {}) {
  TranscriptReplayStt stt(u.transcript);
  return encode_session(u.audio, stt, u.embedding, cfg, opt);
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("semcodec_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

size_t count_frames(const transport::Capture& c, PacketType t) {
  size_t n = 0;
  for (const auto& f : c.frames)
    if (transport::parse_frame(f).header.ptype == t) ++n;
  return n;
}

}  // namespace

TEST_CASE("fixture corpus has twenty speech-length utterances", "[pipeline][corpus]") {
  const auto& c = fixture_corpus();
  REQUIRE(c.entries.size() == 20);
  REQUIRE(c.missing.empty());
  // A corpus directory resolves to its manifest.
  CHECK(load_corpus(SEMCODEC_FIXTURE_DIR).entries.size() == c.entries.size());
  for (const auto& e : c.entries) {
    CHECK(e.duration_s > 5.0);
    CHECK(e.duration_s < 30.0);
  }
}

TEST_CASE("transcript replay: push-to-talk yields one chunk spanning speech", "[pipeline][stt]") {
  const auto& u = fixtures().front();
  auto cfg = presets::balanced();
  const auto segs = dsp::vad_segment(u.audio, cfg);
  REQUIRE_FALSE(segs.empty());
  TranscriptReplayStt stt(u.transcript);
  const auto chunks = stt.transcribe(u.audio, segs, cfg);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].start_cs == static_cast<uint32_t>(segs.front().start_ms / 10));
  CHECK(chunks[0].end_cs == static_cast<uint32_t>(segs.back().end_ms / 10));
}

TEST_CASE("transcript replay: streaming splits words over VAD segments", "[pipeline][stt]") {
  auto cfg = presets::balanced();
  cfg.push_to_talk = false;
  const std::string text = "one two three four five six seven eight nine ten eleven twelve";
  dsp::AudioBuffer audio;
  audio.samples.assign(16000 * 10, 0);
  const std::vector<dsp::VadSegment> segs{{0, 2000}, {3000, 7000}, {8000, 9000}};
  TranscriptReplayStt stt(text);
  const auto chunks = stt.transcribe(audio, segs, cfg);
  REQUIRE(chunks.size() == 3);
  std::string joined;
  for (size_t i = 0; i < chunks.size(); ++i) {
    CHECK(chunks[i].text.size() >= 3);
    CHECK(chunks[i].start_cs == static_cast<uint32_t>(segs[i].start_ms / 10));
    CHECK(chunks[i].end_cs == static_cast<uint32_t>(segs[i].end_ms / 10));
    joined += (i ? " " : "") + chunks[i].text;
  }
  CHECK(joined == text);
}

TEST_CASE("zero-length audio is rejected before anything is sent", "[pipeline][session]") {
  struct CountingStt final : SttAdapter {
    int calls = 0;
    std::string name() const override { return "counting"; }
    std::vector<TimedChunk> transcribe(const dsp::AudioBuffer&, const std::vector<dsp::VadSegment>&,
                                       const QualityModeConfig&) override {
      ++calls;
      return {};
    }
  } stt;
  const auto emb = timbre::synthetic_embedding(1);
  CHECK(kind_of([&] { encode_session(dsp::AudioBuffer{}, stt, emb, presets::balanced()); }) == ErrorKind::input);
  CHECK(stt.calls == 0);
}

TEST_CASE("clean-channel round trip is exact for every fixture and mode", "[pipeline][roundtrip]") {
  for (const auto& name : preset_names()) {
    const auto cfg = *preset(name);
    for (const auto& u : fixtures()) {
      INFO(name << " " << u.id);
      const SessionResult r = run(u, cfg);
      // Text identity, in order, no gaps.
      REQUIRE(r.manifest.gaps.empty());
      REQUIRE(r.manifest.utterances.size() == r.sent_texts.size());
      for (size_t i = 0; i < r.sent_texts.size(); ++i) CHECK(r.manifest.utterances[i].text == r.sent_texts[i]);
      // Dictionaries agree byte for byte.
      CHECK(r.sender_dictionary.window() == r.receiver_dictionary.window());
      CHECK(r.sender_dictionary.version() == r.receiver_dictionary.version());
      // Every keyframe arrives within its accumulated quantization bound.
      REQUIRE(r.received_keyframes.size() == r.sent_keyframes.size());
      prosody::ProsodyEntropyCoder coder(cfg);
      for (size_t k = 0; k < r.sent_keyframes.size(); ++k) {
        const auto& s = r.sent_keyframes[k];
        const auto& g = r.received_keyframes[k];
        REQUIRE(g.timestamp_cs == s.timestamp_cs);
        for (Feature f : kAllFeatures) {
          if (!coder.carries(f, s.codes.voiced)) continue;
          const int fi = static_cast<int>(f);
          CHECK(std::abs(g.values.values[fi] - s.values.values[fi]) <= s.error_bound[fi] + 1e-9);
        }
      }
      // The prosody track covers the session.
      CHECK(r.manifest.prosody.size() == r.capture.duration_cs);
      CHECK(r.manifest.timbre_state == "resolved");
      // Replaying the capture reproduces the live reconstruction.
      CHECK(decode_session(r.capture, cfg).to_json() == r.manifest.to_json());
    }
  }
}

TEST_CASE("capture survives serialization and replays from disk", "[pipeline][capture]") {
  const auto cfg = presets::balanced();
  const SessionResult r = run(fixtures()[1], cfg);
  const auto path = temp_dir("capture") / "a.stct";
  transport::write_capture(path, r.capture);
  const auto back = transport::read_capture(path);
  CHECK(back == r.capture);
  CHECK(capture_mode(back).mode_name == "balanced");
  CHECK(decode_session(back, capture_mode(back)).text() == r.manifest.text());
}

TEST_CASE("capture without PROSODY_DELTA packets still decodes to a full manifest", "[pipeline][capture]") {
  const auto cfg = presets::high_quality();
  const SessionResult r = run(fixtures()[2], cfg);
  transport::Capture stripped = r.capture;
  std::erase_if(stripped.frames,
                [](const auto& f) { return transport::parse_frame(f).header.ptype == PacketType::prosody_delta; });
  REQUIRE(stripped.frames.size() < r.capture.frames.size());
  const auto m = decode_session(stripped, cfg);
  CHECK(m.text() == r.manifest.text());
  CHECK(m.prosody.size() == r.capture.duration_cs);

  // The track is the spline through the absolute keyframes alone.
  std::vector<prosody::ReceivedKeyframe> keys;
  for (const auto& k : r.received_keyframes)
    for (const auto& s : r.sent_keyframes)
      if (s.timestamp_cs == k.timestamp_cs && s.is_absolute()) keys.push_back(k);
  REQUIRE(m.stats.keyframes_received == keys.size());
  const auto expect = prosody::reconstruct_contour(keys, r.capture.duration_cs, cfg.features);
  for (size_t t = 0; t < expect.size(); t += 7) {
    CHECK(m.prosody.frames[t].f0_norm == Catch::Approx(expect.frames[t].f0_norm).margin(1e-12));
    CHECK(m.prosody.frames[t].energy_norm == Catch::Approx(expect.frames[t].energy_norm).margin(1e-12));
    CHECK(m.prosody.frames[t].rate_norm == Catch::Approx(expect.frames[t].rate_norm).margin(1e-12));
  }
}

TEST_CASE("truncated capture names the last complete frame", "[pipeline][capture]") {
  const SessionResult r = run(fixtures()[3], presets::balanced());
  REQUIRE(r.capture.frames.size() > 4);
  auto bytes = transport::serialize_capture(r.capture);
  size_t keep = 6 + r.capture.mode_name.size() + 4;
  for (size_t i = 0; i < 3; ++i) keep += 2 + r.capture.frames[i].size();
  bytes.resize(keep + 3);  // three frames plus part of the fourth
  std::string msg;
  CHECK(kind_of([&] { transport::parse_capture(bytes); }, &msg) == ErrorKind::input);
  CHECK(msg.find("frame 2 (3 complete frames)") != std::string::npos);
}

TEST_CASE("noisy channels: text always arrives, deltas thin out with BER", "[pipeline][noise]") {
  const auto cfg = presets::balanced();
  std::vector<double> survival, retrans;
  for (double ber : {0.001, 0.01, 0.1}) {
    double surv = 0.0, rt = 0.0;
    for (size_t i = 0; i < fixtures().size(); ++i) {
      SessionOptions opt;
      opt.channel.ber = ber;
      opt.channel.seed = cell_seed(5, i, 0);
      const auto r = run(fixtures()[i], cfg, opt);
      INFO("ber " << ber << " " << fixtures()[i].id);
      CHECK(text_intact(r));
      CHECK(r.sender_dictionary.window() == r.receiver_dictionary.window());
      CHECK(r.manifest.prosody.size() == r.capture.duration_cs);
      CHECK(r.manifest.timbre_state == "resolved");
      CHECK(decode_session(r.capture, cfg).to_json() == r.manifest.to_json());
      surv += r.delivery.delta_survival();
      rt += static_cast<double>(r.delivery.retransmissions());
    }
    survival.push_back(surv);
    retrans.push_back(rt);
  }
  CHECK(survival[0] > survival[1]);
  CHECK(survival[1] > survival[2]);
  CHECK(retrans[0] < retrans[1]);
  CHECK(retrans[1] < retrans[2]);
}

TEST_CASE("unrecoverable TEXT loss leaves explicit gap markers", "[pipeline][noise]") {
  auto cfg = presets::balanced();
  cfg.push_to_talk = false;
  cfg.vad_min_silence_ms = 250;  // split at sentence pauses
  const auto& u = fixtures()[4];
  SessionOptions opt;
  opt.channel.drop_rate = 0.5;
  opt.channel.seed = 3;
  opt.policy.max_reliable_attempts = 1;
  opt.policy.incremental_redundancy = false;
  const auto r = run(u, cfg, opt);
  const auto& m = r.manifest;
  REQUIRE(r.sent_texts.size() > 2);
  std::set<uint16_t> seqs;
  for (const auto& x : m.utterances) seqs.insert(x.seq);
  for (const auto& g : m.gaps) seqs.insert(g.seq);
  CHECK(seqs.size() == m.utterances.size() + m.gaps.size());
  CHECK(seqs.size() == r.sent_texts.size());
  CHECK_FALSE(m.gaps.empty());
  CHECK(m.prosody.size() == r.capture.duration_cs);
  const auto j = m.to_json();
  CHECK(j["gaps"].size() == m.gaps.size());
  CHECK(j["gaps"][0]["marker"] == "[missing text]");
}

TEST_CASE("piggybacked keyframes ride in TEXT and decode identically", "[pipeline][piggyback]") {
  auto cfg = presets::high_quality();
  const auto& u = fixtures()[5];
  const auto plain = run(u, cfg);
  cfg.piggyback_keyframes = true;
  const auto pb = run(u, cfg);
  CHECK(pb.manifest.text() == plain.manifest.text());
  REQUIRE(pb.received_keyframes.size() == plain.received_keyframes.size());
  for (size_t k = 0; k < pb.received_keyframes.size(); ++k)
    CHECK(pb.received_keyframes[k].values == plain.received_keyframes[k].values);
  CHECK(count_frames(pb.capture, PacketType::prosody_key) < count_frames(plain.capture, PacketType::prosody_key));
  // Same component payload; fewer headers on the wire.
  CHECK(pb.report.bits.prosody == plain.report.bits.prosody);
  CHECK(pb.report.bits.wire_total() < plain.report.bits.wire_total());
  CHECK(decode_session(pb.capture, cfg).to_json() == pb.manifest.to_json());
}

TEST_CASE("profile cache: a returning speaker costs an 8-byte id", "[pipeline][timbre]") {
  const auto cfg = presets::balanced();
  const auto& u = fixtures()[0];
  TimbreMemory memory;
  SessionOptions opt;
  opt.timbre_memory = &memory;
  const auto first = run(u, cfg, opt);
  CHECK(count_frames(first.capture, PacketType::timbre) == 1);
  const auto second = run(u, cfg, opt);
  CHECK(count_frames(second.capture, PacketType::timbre) == 0);
  CHECK(count_frames(second.capture, PacketType::timbre_profile) == 1);
  CHECK(second.report.bits.timbre == 8 * timbre::kProfileIdBytes);
  CHECK(second.manifest.timbre_state == "resolved");
  CHECK(second.manifest.timbre_profile == first.manifest.timbre_profile);
}

TEST_CASE("profile cache miss triggers a full embedding resend", "[pipeline][timbre]") {
  const auto cfg = presets::balanced();
  const auto& u = fixtures()[0];
  TimbreMemory memory;
  SessionOptions opt;
  opt.timbre_memory = &memory;
  const auto first = run(u, cfg, opt);
  // The receiver evicts the profile; the sender does not know.
  REQUIRE(memory.cache.erase(timbre::TimbreProfileId{*first.manifest.timbre_profile}));
  const auto r = run(u, cfg, opt);
  CHECK(count_frames(r.capture, PacketType::timbre_profile) == 1);
  CHECK(count_frames(r.capture, PacketType::timbre) == 1);
  CHECK(r.manifest.timbre_state == "resolved");
  // The replay sees the same miss-then-full sequence.
  CHECK(decode_session(r.capture, cfg).timbre_state == "resolved");
}

TEST_CASE("report agrees with the trace", "[pipeline][report]") {
  SessionOptions opt;
  opt.channel.ber = 0.01;
  opt.channel.seed = 11;
  const auto r = run(fixtures()[6], presets::balanced(), opt);
  uint64_t text = 0, prosody = 0, timbre = 0, overhead = 0, payload = 0;
  for (const auto& t : r.trace) {
    if (t.event == "submit") {
      (t.ptype == PacketType::text                                                     ? text
       : t.ptype == PacketType::prosody_key || t.ptype == PacketType::prosody_delta ? prosody
                                                                                    : timbre) += t.content_bits;
    } else if (t.event == "dispatch") {
      overhead += 8 * t.overhead_bytes;
      payload += 8 * (t.wire_bytes - t.overhead_bytes);
    }
  }
  const double d = fixtures()[6].audio.duration_s();
  CHECK(r.report.text_bps == Catch::Approx(text / d));
  CHECK(r.report.prosody_bps == Catch::Approx(prosody / d));
  CHECK(r.report.timbre_bps == Catch::Approx(timbre / d));
  CHECK(r.report.wire_bps == Catch::Approx((overhead + payload) / d));
  CHECK(r.report.header_overhead_fraction == Catch::Approx(double(overhead) / double(overhead + payload)));
  CHECK(r.report.total_bps == Catch::Approx(r.report.total_excl_timbre_bps + r.report.timbre_bps));
  // Prosody payload bits are the exact Huffman bit counts.
  uint64_t huff = 0;
  for (const auto& k : r.sent_keyframes) huff += k.bits.bit_count;
  CHECK(prosody == huff);
}

TEST_CASE("identical seeds give byte-identical captures, traces and reports", "[pipeline][determinism]") {
  SessionOptions opt;
  opt.channel.ber = 0.01;
  opt.channel.seed = 77;
  const auto a = run(fixtures()[7], presets::balanced(), opt);
  const auto b = run(fixtures()[7], presets::balanced(), opt);
  CHECK(transport::serialize_capture(a.capture) == transport::serialize_capture(b.capture));
  CHECK(a.trace_text == b.trace_text);
  CHECK(a.report.to_json().dump() == b.report.to_json().dump());
  opt.channel.seed = 78;
  const auto c = run(fixtures()[7], presets::balanced(), opt);
  CHECK(a.trace_text != c.trace_text);
}

TEST_CASE("single fixture bitrates match the per-mode expectations", "[pipeline][bitrate]") {
  const auto& u = fixtures()[8];
  const auto lo = run(u, presets::minimal());
  const auto hi = run(u, presets::high_quality());
  CHECK(lo.report.prosody_bps <= 1.5);
  CHECK(lo.report.text_bps >= 70.9 - 3 * 8.8);
  CHECK(lo.report.text_bps <= 70.9 + 3 * 8.8);
  CHECK(hi.report.prosody_bps > lo.report.prosody_bps);
  CHECK(hi.report.prosody_bps >= 10.0);
}

TEST_CASE("base64 round-trips arbitrary bytes", "[pipeline][subprocess]") {
  std::vector<uint8_t> data;
  for (size_t n = 0; n < 40; ++n) {
    CHECK(base64_decode(base64_encode(data)) == data);
    data.push_back(static_cast<uint8_t>(n * 37 + 5));
  }
  CHECK(base64_encode(std::vector<uint8_t>{'M', 'a', 'n'}) == "TWFu");
}

TEST_CASE("subprocess STT: echo stub transcript drives the session", "[pipeline][subprocess]") {
  SubprocessStt stt(
      "read line; echo '{\"chunks\":[{\"text\":\"hello from the stub\",\"start_cs\":10,\"end_cs\":200}]}'; "
      "read line");
  const auto& u = fixtures()[0];
  const auto r = encode_session(u.audio, stt, u.embedding, presets::balanced());
  REQUIRE(r.manifest.utterances.size() == 1);
  CHECK(r.manifest.utterances[0].text == r.sent_texts[0]);
  CHECK(r.sent_texts[0].find("hello") != std::string::npos);
  CHECK(r.manifest.utterances[0].start_cs == 10);
}

TEST_CASE("subprocess STT: child exit surfaces as an adapter error", "[pipeline][subprocess]") {
  SubprocessStt stt("exit 0");
  const auto& u = fixtures()[0];
  CHECK(kind_of([&] { encode_session(u.audio, stt, u.embedding, presets::balanced()); }) == ErrorKind::adapter);
}

TEST_CASE("subprocess STT: malformed response names the line", "[pipeline][subprocess]") {
  SubprocessStt stt("read line; echo 'this is not json'");
  const auto& u = fixtures()[0];
  std::string msg;
  CHECK(kind_of([&] { encode_session(u.audio, stt, u.embedding, presets::balanced()); }, &msg) ==
        ErrorKind::protocol);
  CHECK(msg.find("line 1") != std::string::npos);
  CHECK(msg.find("this is not json") != std::string::npos);
}

TEST_CASE("subprocess STT: silence past the timeout is an adapter error", "[pipeline][subprocess]") {
  SubprocessStt stt("sleep 5", std::chrono::milliseconds(200));
  const auto& u = fixtures()[0];
  std::string msg;
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(kind_of([&] { encode_session(u.audio, stt, u.embedding, presets::balanced()); }, &msg) ==
        ErrorKind::adapter);
  CHECK(msg.find("timed out") != std::string::npos);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(3));
}

TEST_CASE("subprocess STT: out-of-range chunk timestamps violate the protocol", "[pipeline][subprocess]") {
  SubprocessStt stt("read line; echo '{\"chunks\":[{\"text\":\"abc\",\"start_cs\":0,\"end_cs\":99999999}]}'");
  const auto& u = fixtures()[0];
  CHECK(kind_of([&] { encode_session(u.audio, stt, u.embedding, presets::balanced()); }) == ErrorKind::protocol);
}

TEST_CASE("subprocess TTS: stub consumes the manifest", "[pipeline][subprocess]") {
  const auto r = run(fixtures()[0], presets::minimal());
  SubprocessTts tts("read line; case \"$line\" in *synthesize*) echo '{\"status\":\"ok\"}';; *) echo '{}';; esac");
  CHECK(tts.synthesize(r.manifest)["status"] == "ok");
  SubprocessTts bad("read line; echo '{\"error\":\"no voice\"}'");
  CHECK(kind_of([&] { bad.synthesize(r.manifest); }) == ErrorKind::adapter);
}

TEST_CASE("manifest TTS writes the reconstruction as JSON", "[pipeline][tts]") {
  const auto r = run(fixtures()[0], presets::minimal());
  const auto path = temp_dir("manifest") / "m.json";
  ManifestTts tts(path);
  CHECK(tts.synthesize(r.manifest)["status"] == "ok");
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["utterances"][0]["text"] == r.sent_texts[0]);
  CHECK(j["prosody"]["pitch"].size() == r.capture.duration_cs);
  CHECK(j["timbre"]["state"] == "resolved");
}

TEST_CASE("benchmark: empty corpus gives an empty table; missing entries are listed", "[pipeline][bench]") {
  const auto dir = temp_dir("bench");
  std::ofstream(dir / "empty.csv") << "id,wav_path,transcript_path,embedding_path,duration_s\n";
  const auto empty = run_benchmark(load_corpus(dir / "empty.csv"), {});
  CHECK(empty.empty());

  std::ofstream(dir / "partial.csv") << "id,wav_path,transcript_path,embedding_path,duration_s\n"
                                     << "ghost,nope.wav,nope.txt,nope.emb,3.0\n";
  const auto partial = run_benchmark(load_corpus(dir / "partial.csv"), {});
  CHECK(partial.empty());
  REQUIRE(partial.missing.size() == 1);
  CHECK(partial.missing[0] == "ghost");
}

TEST_CASE("benchmark: totals excluding timbre are ordered by mode", "[pipeline][bench]") {
  BenchOptions opt;
  opt.bers = {0.0, 0.01};
  const auto t = run_benchmark(fixture_corpus(), opt);
  REQUIRE(t.rows.size() == 6);
  const auto* lo = t.find("minimal", 0.0);
  const auto* mid = t.find("balanced", 0.0);
  const auto* hi = t.find("high_quality", 0.0);
  REQUIRE((lo && mid && hi));
  CHECK(lo->total_excl_timbre_bps.mean < mid->total_excl_timbre_bps.mean);
  CHECK(mid->total_excl_timbre_bps.mean < hi->total_excl_timbre_bps.mean);
  for (const auto& row : t.rows) CHECK(row.text_delivery == 1.0);
  CHECK(t.find("balanced", 0.01)->retransmissions.mean > mid->retransmissions.mean);
  CHECK(t.utterances.size() == 6 * fixture_corpus().entries.size());
  const auto csv = t.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("sweep: invalid keyframe rates are rejected", "[pipeline][sweep]") {
  CHECK(kind_of([] { run_prosody_sweep(fixture_corpus(), {0.0}); }) == ErrorKind::config);
  CHECK(kind_of([] { run_prosody_sweep(fixture_corpus(), {0.5, 101.0}); }) == ErrorKind::config);
  CHECK(kind_of([] { run_prosody_sweep(fixture_corpus(), {}); }) == ErrorKind::config);
}

TEST_CASE("linear fit recovers an exact line", "[pipeline][sweep]") {
  const auto f = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == Catch::Approx(2.0));
  CHECK(f.intercept == Catch::Approx(1.0));
  CHECK(f.r_squared == Catch::Approx(1.0));
}

TEST_CASE("sixty seconds of audio encode and decode well within budget", "[pipeline][performance]") {
  std::string text;
  for (const auto& u : fixtures()) {
    text += (text.empty() ? "" : " ") + u.transcript;
    if (text.size() > 900) break;
  }
  const auto audio = synthesize_utterance(text, default_speakers()[0], 99);
  REQUIRE(audio.duration_s() >= 60.0);
  const auto emb = timbre::synthetic_embedding(4);
  const auto t0 = std::chrono::steady_clock::now();
  TranscriptReplayStt stt(text);
  const auto r = encode_session(audio, stt, emb, presets::balanced());
  ManifestTts tts;
  tts.synthesize(decode_session(r.capture, presets::balanced()));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  INFO("encode+decode of " << audio.duration_s() << " s took " << secs << " s");
  CHECK(secs < 6.0);
  CHECK(text_intact(r));
}
