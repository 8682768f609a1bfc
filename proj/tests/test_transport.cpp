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


// Packet framing, scheduling, the channel model, the reliability layer,
// capture files and bitrate accounting.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "semcodec/transport/capture.hpp"
#include "semcodec/transport/channel.hpp"
#include "semcodec/transport/header.hpp"
#include "semcodec/transport/link.hpp"
#include "semcodec/transport/packet.hpp"
#include "semcodec/transport/report.hpp"
#include "semcodec/transport/scheduler.hpp"

using namespace semcodec;
using namespace semcodec::transport;

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

Bytes random_bytes(std::mt19937_64& rng, size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<uint8_t>(rng());
  return b;
}

// Runs `n` TEXT messages of `size` bytes through a link and returns how many
// arrived intact and in order.
struct TextRun {
  size_t intact = 0;
  size_t in_order = 0;
  uint64_t retransmissions = 0;
  bool any_failed = false;
};

TextRun run_text(double ber, uint64_t seed, size_t n, size_t size) {
  Link link({ber, 0.0, 4, seed});
  std::mt19937_64 rng(seed * 7919 + 1);
  std::vector<Bytes> sent;
  for (size_t i = 0; i < n; ++i) sent.push_back(random_bytes(rng, size));
  TextRun r;
  std::vector<Bytes> received;
  link.on_receive = [&](const Packet& p, uint64_t) {
    received.push_back(p.payload);
    return Verdict::accept;
  };
  // Stop-and-wait: the next chunk is released once the previous is settled.
  size_t next = 0;
  link.on_outcome = [&](uint64_t, const Message&, SenderOutcome o, uint64_t tick) {
    if (o == SenderOutcome::failed) r.any_failed = true;
    if (next < n) link.submit({PacketType::text, static_cast<uint32_t>(next * 100), sent[next++]}, tick);
  };
  link.submit({PacketType::text, 0, sent[next++]}, 0);
  link.run();
  for (size_t i = 0; i < received.size() && i < sent.size(); ++i)
    if (received[i] == sent[i]) ++r.intact;
  r.in_order = received == sent ? n : 0;
  r.retransmissions = link.stats(PacketType::text).retransmissions;
  return r;
}

}  // namespace

// ----------------------------------------------------------------- headers

TEST_CASE("header parse inverts build over field boundaries", "[transport][header]") {
  const std::vector<uint16_t> seqs{0, 1, 0x7F, 0x80, 0xFF, 0x100, 0x7FFF, 0x8000, 0xFFFE, 0xFFFF};
  const std::vector<uint32_t> stamps{0, 1, 0xFF, 0x100, 0xFFFF, 0x10000, 0x7FFFFF, 0x800000, kMaxTimestamp - 1,
                                     kMaxTimestamp};
  const std::vector<uint16_t> lengths{0, 1, 0xFF, 0x100, 0xFFFF};
  size_t cases = 0;
  for (auto t : kAllPacketTypes)
    for (auto pr : {Priority::high, Priority::medium, Priority::low})
      for (bool flags : {false, true})
        for (auto seq : seqs)
          for (auto ts : stamps)
            for (auto len : lengths) {
              PacketHeader h{kProtocolVersion, t, pr, flags, seq, ts, has_length_field(t) ? len : uint16_t{0}};
              const auto bytes = build_header(h);
              REQUIRE(bytes.size() == h.size());
              REQUIRE(parse_header(bytes) == h);
              ++cases;
            }
  CHECK(cases == 5 * 3 * 2 * seqs.size() * stamps.size() * lengths.size());
}

TEST_CASE("header sizes and guards", "[transport][header]") {
  PacketHeader key{kProtocolVersion, PacketType::prosody_key, Priority::medium, false, 7, 150, 0};
  const auto kb = build_header(key);
  CHECK(kb.size() == 6);
  CHECK(parse_header(kb) == key);

  PacketHeader text{kProtocolVersion, PacketType::text, Priority::high, false, 0, 0, 112};
  CHECK(build_header(text).size() == 8);
  CHECK(build_header(PacketHeader{kProtocolVersion, PacketType::timbre}).size() == 8);
  CHECK(build_header(PacketHeader{kProtocolVersion, PacketType::timbre_profile}).size() == 6);
  CHECK(build_header(PacketHeader{kProtocolVersion, PacketType::prosody_delta}).size() == 6);

  auto bad = kb;
  bad[0] = static_cast<uint8_t>((bad[0] & 0x3F) | 0xC0);  // version bits = 3
  CHECK(kind_of([&] { parse_header(bad); }) == ErrorKind::decode);
  CHECK(kind_of([&] { parse_header(ByteView(kb).first(5)); }) == ErrorKind::decode);
  CHECK(kind_of([&] { parse_header(ByteView(build_header(text)).first(7)); }) == ErrorKind::decode);
  auto unknown_type = kb;
  unknown_type[0] = static_cast<uint8_t>((unknown_type[0] & 0xC7) | (5 << 3));
  CHECK(kind_of([&] { parse_header(unknown_type); }) == ErrorKind::decode);
  PacketHeader big_ts = key;
  big_ts.timestamp_cs = kMaxTimestamp + 1;
  CHECK(kind_of([&] { build_header(big_ts); }) == ErrorKind::precondition);
}

TEST_CASE("frames carry a verified checksum", "[transport][packet]") {
  std::mt19937_64 rng(3);
  for (auto t : kAllPacketTypes) {
    Packet p{{kProtocolVersion, t, priority_of(t), false, 42, 1234, 0}, random_bytes(rng, 17)};
    const auto frame = frame_packet(p);
    const auto back = parse_frame(frame);
    CHECK(back.payload == p.payload);
    CHECK(back.header.seq == 42);
    CHECK(frame.size() == p.payload.size() + p.header.size() + kCrcBytes);
    for (size_t bit = 0; bit < frame.size() * 8; ++bit) {
      auto bad = frame;
      bad[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
      REQUIRE(kind_of([&] { parse_frame(bad); }) == ErrorKind::decode);
    }
  }
}

TEST_CASE("piggybacked keyframes round-trip inside a TEXT payload", "[transport][packet]") {
  Piggyback pb{300, {Bytes{0x81, 0x40}, Bytes{0x02}, Bytes{0xFF, 0x00, 0x11}}};
  const Bytes text{1, 2, 3, 4, 5};
  const auto payload = compose_piggyback(pb, text);
  CHECK(payload.size() == text.size() + pb.framing_bytes() + 6);
  const auto [back, rest] = split_piggyback(payload);
  CHECK(back.first_timestamp_cs == 300);
  CHECK(back.keyframes == pb.keyframes);
  CHECK(rest == text);
  CHECK(kind_of([&] { split_piggyback(ByteView(payload).first(6)); }) == ErrorKind::decode);
  CHECK(kind_of([&] { compose_piggyback(Piggyback{}, text); }) == ErrorKind::precondition);
}

// --------------------------------------------------------------- scheduler

TEST_CASE("strict priority with FIFO inside a class", "[transport][scheduler]") {
  PriorityScheduler s;
  s.enqueue({1, Priority::low, PacketType::prosody_delta, 0});
  s.enqueue({2, Priority::high, PacketType::text, 0});
  s.enqueue({3, Priority::high, PacketType::text, 1});
  s.enqueue({4, Priority::medium, PacketType::prosody_key, 0});
  std::vector<uint64_t> order;
  while (auto f = s.dispatch()) order.push_back(f->message_id);
  CHECK(order == std::vector<uint64_t>{2, 3, 4, 1});
}

TEST_CASE("overflow drops the lowest class and keeps HIGH intact", "[transport][scheduler]") {
  PriorityScheduler s(4);
  s.enqueue({1, Priority::high, PacketType::text});
  s.enqueue({2, Priority::low, PacketType::prosody_delta});
  s.enqueue({3, Priority::medium, PacketType::prosody_key});
  s.enqueue({4, Priority::low, PacketType::prosody_delta});
  auto v = s.enqueue({5, Priority::high, PacketType::text});
  REQUIRE(v);
  CHECK(v->message_id == 4);
  v = s.enqueue({6, Priority::high, PacketType::text});
  REQUIRE(v);
  CHECK(v->message_id == 2);
  v = s.enqueue({7, Priority::high, PacketType::text});
  REQUIRE(v);
  CHECK(v->message_id == 3);
  CHECK(s.size(Priority::high) == 4);
  CHECK(s.overflow_drops() == 3);
}

TEST_CASE("no LOW frame is dispatched while HIGH is queued over randomized schedules", "[transport][scheduler]") {
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 rng(seed);
    Link link({0.02 * static_cast<double>(rng() % 4), 0.05 * static_cast<double>(rng() % 3), static_cast<uint32_t>(1 + rng() % 6), seed},
              {8, 1, true, 16 + rng() % 48, 5'000'000});
    const size_t n = 20 + rng() % 60;
    for (size_t i = 0; i < n; ++i) {
      const auto t = kAllPacketTypes[rng() % 5];
      link.submit({t, static_cast<uint32_t>(i * 10), random_bytes(rng, 1 + rng() % 40)}, rng() % 200);
    }
    link.run();
    size_t dispatches = 0;
    for (const auto& r : link.trace_records()) {
      if (r.event != "dispatch") continue;
      ++dispatches;
      const auto high = r.queued[0], medium = r.queued[1];
      if (r.priority == Priority::low) REQUIRE(high + medium == 0);
      if (r.priority == Priority::medium) REQUIRE(high == 0);
    }
    REQUIRE(dispatches > 0);
  }
}

// ----------------------------------------------------------------- channel

TEST_CASE("channel extremes and flip statistics", "[transport][channel]") {
  std::mt19937_64 rng(5);
  const auto frame = random_bytes(rng, 64);
  Channel clean({0.0, 0.0, 4, 1});
  CHECK(*clean.transmit(frame) == frame);

  Channel inverted({1.0, 0.0, 4, 1});
  const auto inv = *inverted.transmit(frame);
  for (size_t i = 0; i < frame.size(); ++i) CHECK(inv[i] == static_cast<uint8_t>(~frame[i]));

  Channel noisy({0.01, 0.0, 4, 2024});
  const Bytes block(1000, 0);
  for (int i = 0; i < 125; ++i) (void)noisy.transmit(block);  // 10^6 bits
  CHECK(noisy.stats().bits == 1'000'000);
  CHECK(noisy.stats().flipped_bits >= 9500);
  CHECK(noisy.stats().flipped_bits <= 10500);

  Channel lossy({0.0, 0.3, 4, 9});
  size_t dropped = 0;
  for (int i = 0; i < 10000; ++i) dropped += lossy.transmit(frame) ? 0 : 1;
  CHECK(dropped > 2800);
  CHECK(dropped < 3200);

  CHECK(kind_of([] { Channel bad({1.5, 0.0, 4, 1}); }) == ErrorKind::config);
  CHECK(kind_of([] { Channel bad({0.0, -0.1, 4, 1}); }) == ErrorKind::config);
}

TEST_CASE("identical seeds give identical fault schedules", "[transport][channel]") {
  std::mt19937_64 rng(11);
  const auto frame = random_bytes(rng, 100);
  Channel a({0.05, 0.1, 4, 77}), b({0.05, 0.1, 4, 77}), c({0.05, 0.1, 4, 78});
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const auto x = a.transmit(frame), y = b.transmit(frame), z = c.transmit(frame);
    REQUIRE(x == y);
    differs = differs || x != z;
  }
  CHECK(differs);
}

// ---------------------------------------------------------------- reliability

TEST_CASE("every TEXT chunk is delivered intact and in order under bit errors", "[transport][link]") {
  for (double ber : {0.001, 0.01, 0.1})
    for (uint64_t seed : {1, 2, 3}) {
      const auto r = run_text(ber, seed, 12, 110);
      INFO("ber " << ber << " seed " << seed);
      CHECK_FALSE(r.any_failed);
      CHECK(r.intact == 12);
      CHECK(r.in_order == 12);
    }
}

TEST_CASE("retransmissions grow with the bit error rate", "[transport][link]") {
  uint64_t prev = 0;
  for (double ber : {0.0, 0.001, 0.01, 0.1}) {
    uint64_t total = 0;
    for (uint64_t seed : {1, 2, 3}) total += run_text(ber, seed, 12, 110).retransmissions;
    INFO("ber " << ber);
    if (ber == 0.0)
      CHECK(total == 0);
    else
      CHECK(total > prev);
    prev = total;
  }
}

TEST_CASE("a corrupted TEXT frame triggers a retransmission", "[transport][link]") {
  Link link({0.0, 0.0, 2, 1});
  int calls = 0;
  link.on_receive = [&](const Packet&, uint64_t) { return ++calls == 1 ? Verdict::reject : Verdict::accept; };
  std::vector<SenderOutcome> outcomes;
  link.on_outcome = [&](uint64_t, const Message&, SenderOutcome o, uint64_t) { outcomes.push_back(o); };
  link.submit({PacketType::text, 0, Bytes{1, 2, 3}}, 0);
  link.run();
  CHECK(calls == 2);  // round 1 rejected, first copy of round 2 accepted
  CHECK(outcomes == std::vector<SenderOutcome>{SenderOutcome::acked});
  CHECK(link.stats(PacketType::text).retransmissions >= 1);
}

TEST_CASE("an exhausted TEXT budget is a delivery failure event", "[transport][link]") {
  Link link({0.0, 1.0, 2, 1}, {3, 1, true, 64, 100000});
  std::vector<SenderOutcome> outcomes;
  int losses = 0;
  link.on_outcome = [&](uint64_t, const Message&, SenderOutcome o, uint64_t) { outcomes.push_back(o); };
  link.on_loss = [&](uint64_t, PacketType, uint16_t, uint64_t) { ++losses; };
  link.submit({PacketType::text, 0, Bytes{1, 2, 3}}, 0);
  link.run();
  CHECK(outcomes == std::vector<SenderOutcome>{SenderOutcome::failed});
  CHECK(losses == 1);
  CHECK(link.stats(PacketType::text).transmissions == 1 + 2 + 3);
}

TEST_CASE("a lost PROSODY_KEY is retried once, then logged as a gap", "[transport][link]") {
  Link link({0.0, 1.0, 2, 1});
  std::vector<PacketType> gaps;
  link.on_loss = [&](uint64_t, PacketType t, uint16_t, uint64_t) { gaps.push_back(t); };
  link.submit({PacketType::prosody_key, 0, Bytes{0x80}}, 0);
  link.run();
  CHECK(link.stats(PacketType::prosody_key).transmissions == 2);
  CHECK(gaps == std::vector<PacketType>{PacketType::prosody_key});
}

TEST_CASE("a lost PROSODY_DELTA is discarded without retry", "[transport][link]") {
  Link link({0.0, 1.0, 2, 1});
  std::vector<PacketType> gaps;
  link.on_loss = [&](uint64_t, PacketType t, uint16_t, uint64_t) { gaps.push_back(t); };
  link.submit({PacketType::prosody_delta, 0, Bytes{0x01}}, 0);
  link.run();
  CHECK(link.stats(PacketType::prosody_delta).transmissions == 1);
  CHECK(gaps == std::vector<PacketType>{PacketType::prosody_delta});
}

TEST_CASE("a receiver cache miss is reported back to the sender", "[transport][link]") {
  Link link({0.0, 0.0, 3, 1});
  link.on_receive = [](const Packet&, uint64_t) { return Verdict::miss; };
  std::vector<SenderOutcome> outcomes;
  link.on_outcome = [&](uint64_t, const Message&, SenderOutcome o, uint64_t) { outcomes.push_back(o); };
  link.submit({PacketType::timbre_profile, 0, Bytes(8, 1)}, 0);
  link.run();
  CHECK(outcomes == std::vector<SenderOutcome>{SenderOutcome::miss});
}

TEST_CASE("delta survival falls as the bit error rate rises", "[transport][link]") {
  double prev = 1.1;
  for (double ber : {0.001, 0.01, 0.1}) {
    Link link({ber, 0.0, 4, 5});
    for (uint32_t i = 0; i < 2000; ++i) link.submit({PacketType::prosody_delta, i, Bytes{0x5A, 0x3C}}, i);
    link.run();
    const auto& st = link.stats(PacketType::prosody_delta);
    const double survived = static_cast<double>(st.delivered) / static_cast<double>(st.messages);
    INFO("ber " << ber << " survived " << survived);
    CHECK(survived < prev);
    prev = survived;
  }
}

TEST_CASE("identical seeds give identical traces", "[transport][link]") {
  auto trace = [](uint64_t seed) {
    Link link({0.01, 0.02, 3, seed});
    std::mt19937_64 rng(99);
    for (uint32_t i = 0; i < 300; ++i)
      link.submit({kAllPacketTypes[rng() % 5], i, random_bytes(rng, 1 + rng() % 30)}, rng() % 500);
    link.run();
    return link.trace_text();
  };
  CHECK(trace(4) == trace(4));
  CHECK(trace(4) != trace(5));
}

// ---------------------------------------------------------------- capture

TEST_CASE("capture files round-trip and report truncation", "[transport][capture]") {
  Capture c{"balanced", 1234, {}};
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5; ++i)
    c.frames.push_back(frame_packet({{kProtocolVersion, PacketType::text, Priority::high, false,
                                      static_cast<uint16_t>(i), static_cast<uint32_t>(i)},
                                     random_bytes(rng, 20)}));
  const auto bytes = serialize_capture(c);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "STCT");
  CHECK(parse_capture(bytes) == c);

  auto cut = bytes;
  cut.resize(cut.size() - 3);
  try {
    (void)parse_capture(cut);
    FAIL("truncated capture accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::input);
    CHECK(std::string(e.what()).find("frame 3") != std::string::npos);
  }
  auto wrong = bytes;
  wrong[0] = 'X';
  CHECK(kind_of([&] { (void)parse_capture(wrong); }) == ErrorKind::input);
}

// ----------------------------------------------------------------- report

TEST_CASE("bitrate accounting", "[transport][report]") {
  CHECK(amortized_bps(384, 45.0) == Catch::Approx(68.2667).margin(1e-3));
  CHECK(std::abs(amortized_bps(384, 45.0) - 68.3) <= 0.1);
  CHECK(std::abs(amortized_bps(384, 24.4) - 125.9) <= 0.1);
  CHECK(amortized_bps(384, 45.0) == 8.0 * 384 / 45.0);

  const auto empty = account_bitrate({}, 10.0);
  CHECK(empty.text_bps == 0.0);
  CHECK(empty.prosody_bps == 0.0);
  CHECK(empty.timbre_bps == 0.0);
  CHECK(empty.wire_bps == 0.0);
  CHECK(empty.header_overhead_fraction == 0.0);

  BitCounts b{800, 80, 3072, 480, 4000};
  const auto r = account_bitrate(b, 10.0);
  CHECK(r.text_bps == 80.0);
  CHECK(r.prosody_bps == 8.0);
  CHECK(r.timbre_bps == 307.2);
  CHECK(r.total_excl_timbre_bps == 88.0);
  CHECK(r.wire_bps == 448.0);
  CHECK(r.header_overhead_fraction == 480.0 / 4480.0);
  CHECK(r.to_json()["bits"]["text"] == 800);
  CHECK(BitrateReport::csv_header().find("wire_bps") != std::string::npos);

  CHECK(kind_of([] { account_bitrate({}, 0.0); }) == ErrorKind::precondition);
}
