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


// Tick-based link simulator: sender ARQ state machine, strict-priority
// dispatch, seeded forward channel, receiver with Chase combining, and an
// acknowledgement path with a fixed round trip.
//
// Reliability tiers:
//   TEXT, TIMBRE, TIMBRE_PROFILE  retransmitted until acknowledged, up to
//                                 max_reliable_attempts rounds; round r
//                                 carries r copies (incremental repetition)
//   PROSODY_KEY                   retransmitted at most once
//   PROSODY_DELTA                 best effort, never retransmitted
//
// The transmit schedule (which message and round occupies each slot) is
// known to both ends, as in a slotted link; the receiver uses it only to
// group copies of one message for combining and to notice empty slots, never
// to interpret payload content.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semcodec/error.hpp"
#include "semcodec/transport/channel.hpp"
#include "semcodec/transport/packet.hpp"
#include "semcodec/transport/report.hpp"
#include "semcodec/transport/scheduler.hpp"

namespace semcodec::transport {

struct LinkPolicy {
  uint32_t max_reliable_attempts = 8;
  uint32_t key_retransmissions = 1;
  bool incremental_redundancy = true;
  size_t queue_capacity = 1024;
  uint64_t max_ticks = 50'000'000;  // runaway guard

  uint32_t budget(PacketType t) const {
    switch (t) {
      case PacketType::prosody_delta: return 1;
      case PacketType::prosody_key: return 1 + key_retransmissions;
      default: return max_reliable_attempts;
    }
  }
  bool reliable(PacketType t) const { return priority_of(t) == Priority::high; }
  uint32_t copies(PacketType t, uint32_t attempt) const {
    return reliable(t) && incremental_redundancy ? attempt : 1;
  }
};

/// Receiver verdict on a packet whose checksum verified.
enum class Verdict { accept, reject, miss };

enum class SenderOutcome { acked, miss, failed };

/// A message handed to the link.
struct Message {
  PacketType ptype = PacketType::text;
  uint32_t timestamp_cs = 0;
  Bytes payload;
  bool flags = false;
  /// Bytes of `payload` that are framing rather than content (piggyback
  /// extension); counted as overhead.
  size_t framing_bytes = 0;
  /// Component payload bits this message carries for accounting; zero means
  /// 8 * payload size. Piggybacked keyframe bits are reported separately.
  uint64_t content_bits = 0;
  uint64_t piggyback_bits = 0;
};

/// One line of the exported trace.
struct TraceRecord {
  uint64_t tick = 0;
  std::string event;  // submit, dispatch, overflow, channel, receive, response, fail
  PacketType ptype = PacketType::text;
  uint16_t seq = 0;
  std::string outcome;
  uint64_t message_id = 0;
  uint32_t attempt = 0;
  size_t wire_bytes = 0;      // dispatch only
  size_t overhead_bytes = 0;  // dispatch only: header + checksum + framing
  std::array<size_t, 3> queued{};  // dispatch only: queue depth per class before dispatch
  Priority priority = Priority::low;
  uint64_t content_bits = 0;    // submit only
  uint64_t piggyback_bits = 0;  // submit only

  std::string str() const {
    return std::to_string(tick) + "\t" + event + "\t" + to_string(ptype) + "\t" + std::to_string(seq) + "\t" +
           outcome;
  }
};

struct TypeStats {
  uint64_t messages = 0;
  uint64_t transmissions = 0;    // frames dispatched
  uint64_t retransmissions = 0;  // frames beyond the first
  uint64_t delivered = 0;        // accepted (or miss-reported) messages
  uint64_t lost = 0;             // given up
  uint64_t dropped_frames = 0;
  uint64_t corrupted_frames = 0;
  uint64_t combined_recoveries = 0;  // accepted only thanks to combining
  uint64_t overflow_drops = 0;
};

class Link {
 public:
  using ReceiveFn = std::function<Verdict(const Packet&, uint64_t tick)>;
  using OutcomeFn = std::function<void(uint64_t message_id, const Message&, SenderOutcome, uint64_t tick)>;
  using LossFn = std::function<void(uint64_t message_id, PacketType, uint16_t seq, uint64_t tick)>;

  Link(ChannelModel channel, LinkPolicy policy = {})
      : channel_(channel), policy_(policy), scheduler_(policy.queue_capacity) {}

  /// Receiver-side content handler (called after the checksum verified).
  ReceiveFn on_receive;
  /// Sender-side notification when a message's fate is known.
  OutcomeFn on_outcome;
  /// Receiver-side notification when a message is definitively lost.
  LossFn on_loss;

  /// Queues `m` for release at `release_tick` (no earlier than now).
  uint64_t submit(Message m, uint64_t release_tick) {
    const uint64_t id = next_id_++;
    Outgoing o;
    o.message = std::move(m);
    o.seq = next_seq_[static_cast<size_t>(o.message.ptype)]++;
    o.release = std::max(release_tick, now_);
    Packet p{{kProtocolVersion, o.message.ptype, priority_of(o.message.ptype), o.message.flags, o.seq,
              o.message.timestamp_cs, 0},
             o.message.payload};
    o.frame = frame_packet(p);
    o.overhead = p.overhead_bytes() + o.message.framing_bytes;
    ++stats_[type_index(o.message.ptype)].messages;
    trace(now_, "submit", o.message.ptype, o.seq, "queued", id, 0);
    trace_.back().content_bits =
        o.message.content_bits ? o.message.content_bits
                               : 8 * (o.message.payload.size() - o.message.framing_bytes);
    trace_.back().piggyback_bits = o.message.piggyback_bits;
    pending_release_.emplace(std::make_pair(o.release, id), 0);
    out_.emplace(id, std::move(o));
    return id;
  }

  /// Advances the simulation by one tick.
  void step() {
    deliver_responses();
    release_due();
    dispatch_one();
    ++now_;
    if (now_ > policy_.max_ticks) fail(ErrorKind::delivery, "link: simulation exceeded its tick budget");
  }

  /// No queued, in-flight or unreleased traffic remains.
  bool idle() const { return scheduler_.empty() && responses_.empty() && pending_release_.empty() && awaiting_ == 0; }

  /// Steps until idle.
  void run() {
    while (!idle()) step();
  }

  uint64_t now() const { return now_; }
  const std::vector<TraceRecord>& trace_records() const { return trace_; }
  const TypeStats& stats(PacketType t) const { return stats_[type_index(t)]; }
  const ChannelStats& channel_stats() const { return channel_.stats(); }
  const LinkPolicy& policy() const { return policy_; }
  const PriorityScheduler& scheduler() const { return scheduler_; }

  /// Clean frame of a message as first built (for capture files).
  const Bytes& frame_of(uint64_t message_id) const { return out_.at(message_id).frame; }
  const Message& message_of(uint64_t message_id) const { return out_.at(message_id).message; }
  uint16_t seq_of(uint64_t message_id) const { return out_.at(message_id).seq; }

  /// Trace as line-delimited text: tick, event, ptype, seq, outcome.
  std::string trace_text() const {
    std::string s;
    for (const auto& r : trace_) s += r.str() + "\n";
    return s;
  }

 private:
  struct Outgoing {
    Message message;
    uint16_t seq = 0;
    uint64_t release = 0;
    Bytes frame;
    size_t overhead = 0;
    uint32_t attempts = 0;
    bool done = false;
    bool awaiting = false;  // a round is out and its outcome is not yet known
  };
  struct Incoming {
    std::vector<Bytes> copies;
    bool done = false;
  };
  enum class Response { ack, nack, miss };

  static size_t type_index(PacketType t) { return static_cast<size_t>(t); }

  void trace(uint64_t tick, std::string event, PacketType t, uint16_t seq, std::string outcome, uint64_t id,
             uint32_t attempt) {
    TraceRecord r;
    r.tick = tick;
    r.event = std::move(event);
    r.ptype = t;
    r.seq = seq;
    r.outcome = std::move(outcome);
    r.message_id = id;
    r.attempt = attempt;
    r.priority = priority_of(t);
    trace_.push_back(std::move(r));
  }

  void start_round(uint64_t id) {
    Outgoing& o = out_.at(id);
    ++o.attempts;
    const uint32_t n = policy_.copies(o.message.ptype, o.attempts);
    set_awaiting(o, true);
    for (uint32_t c = 0; c < n; ++c) {
      QueuedFrame f{id, priority_of(o.message.ptype), o.message.ptype, o.seq, o.attempts, c, n};
      if (auto victim = scheduler_.enqueue(f)) on_overflow(*victim);
    }
  }

  void on_overflow(const QueuedFrame& v) {
    Outgoing& o = out_.at(v.message_id);
    ++stats_[type_index(v.ptype)].overflow_drops;
    trace(now_, "overflow", v.ptype, v.seq, "dropped", v.message_id, v.attempt);
    // Losing any copy of a round loses the round's completion signal; treat
    // the whole round as lost at the sender.
    scheduler_.cancel(v.message_id);
    set_awaiting(o, false);
    if (!o.done) give_up(v.message_id, "overflow");
  }

  void give_up(uint64_t id, const std::string& why) {
    Outgoing& o = out_.at(id);
    o.done = true;
    ++stats_[type_index(o.message.ptype)].lost;
    trace(now_, "fail", o.message.ptype, o.seq, why, id, o.attempts);
    if (on_loss) on_loss(id, o.message.ptype, o.seq, now_);
    if (on_outcome) on_outcome(id, o.message, SenderOutcome::failed, now_);
  }

  void release_due() {
    while (!pending_release_.empty() && pending_release_.begin()->first.first <= now_) {
      const uint64_t id = pending_release_.begin()->first.second;
      pending_release_.erase(pending_release_.begin());
      start_round(id);
    }
  }

  void deliver_responses() {
    while (!responses_.empty() && responses_.begin()->first.first <= now_) {
      const auto [id, resp] = responses_.begin()->second;
      responses_.erase(responses_.begin());
      Outgoing& o = out_.at(id);
      if (o.done || !o.awaiting) continue;
      set_awaiting(o, false);
      switch (resp) {
        case Response::ack:
        case Response::miss:
          o.done = true;
          scheduler_.cancel(id);
          trace(now_, "response", o.message.ptype, o.seq, resp == Response::ack ? "ack" : "miss", id, o.attempts);
          if (on_outcome) on_outcome(id, o.message, resp == Response::ack ? SenderOutcome::acked : SenderOutcome::miss, now_);
          break;
        case Response::nack:
          trace(now_, "response", o.message.ptype, o.seq, "nack", id, o.attempts);
          if (o.attempts < policy_.budget(o.message.ptype)) {
            start_round(id);
          } else {
            give_up(id, "budget exhausted");
          }
          break;
      }
    }
  }

  void respond(uint64_t id, Response r) {
    // Keyed by (arrival tick, sequence of issue) for deterministic order.
    responses_.emplace(std::make_pair(now_ + channel_.model().rtt_ticks, response_counter_++), std::make_pair(id, r));
  }

  void set_awaiting(Outgoing& o, bool on) {
    if (o.awaiting == on) return;
    o.awaiting = on;
    if (on)
      ++awaiting_;
    else
      --awaiting_;
  }

  void dispatch_one() {
    TraceRecord snapshot;
    snapshot.queued = {scheduler_.size(Priority::high), scheduler_.size(Priority::medium),
                       scheduler_.size(Priority::low)};
    const auto f = scheduler_.dispatch();
    if (!f) return;
    Outgoing& o = out_.at(f->message_id);
    TypeStats& st = stats_[type_index(f->ptype)];
    ++st.transmissions;
    if (f->attempt > 1 || f->copy > 0) ++st.retransmissions;
    trace(now_, "dispatch", f->ptype, f->seq, "attempt " + std::to_string(f->attempt), f->message_id, f->attempt);
    trace_.back().wire_bytes = o.frame.size();
    trace_.back().overhead_bytes = o.overhead;
    trace_.back().queued = snapshot.queued;

    const bool last_copy = f->copy + 1 == f->copies;
    // Best-effort traffic is finished once it leaves the sender.
    if (f->ptype == PacketType::prosody_delta) {
      set_awaiting(o, false);
      o.done = true;
    }

    auto rx = channel_.transmit(o.frame);
    if (!rx) {
      ++st.dropped_frames;
      trace(now_, "channel", f->ptype, f->seq, "dropped", f->message_id, f->attempt);
    } else if (*rx != o.frame) {
      ++st.corrupted_frames;
      trace(now_, "channel", f->ptype, f->seq, "corrupted", f->message_id, f->attempt);
    }
    receive(*f, rx, last_copy);
  }

  /// Majority vote per bit over equally sized copies; ties resolve to the
  /// most recent copy's bit.
  static Bytes combine(const std::vector<Bytes>& copies) {
    Bytes out = copies.back();
    for (size_t byte = 0; byte < out.size(); ++byte) {
      uint8_t v = 0;
      for (int bit = 0; bit < 8; ++bit) {
        const uint8_t mask = static_cast<uint8_t>(1u << bit);
        size_t ones = 0;
        for (const auto& c : copies) ones += (c[byte] & mask) ? 1 : 0;
        const size_t zeros = copies.size() - ones;
        const bool one = ones > zeros || (ones == zeros && (copies.back()[byte] & mask));
        if (one) v |= mask;
      }
      out[byte] = v;
    }
    return out;
  }

  void receive(const QueuedFrame& f, const std::optional<Bytes>& rx, bool last_copy) {
    Incoming& in = in_[f.message_id];
    TypeStats& st = stats_[type_index(f.ptype)];
    if (in.done) return;  // duplicate of an already settled message

    std::optional<Verdict> verdict;
    if (rx) {
      in.copies.push_back(*rx);
      std::vector<Bytes> candidates{*rx};
      if (in.copies.size() >= 3) candidates.push_back(combine(in.copies));
      for (size_t i = 0; i < candidates.size() && !verdict; ++i) {
        Packet p;
        try {
          p = parse_frame(candidates[i]);
        } catch (const Error&) {
          continue;
        }
        if (p.header.ptype != f.ptype || p.header.seq != f.seq) continue;
        const Verdict v = on_receive ? on_receive(p, now_) : Verdict::accept;
        if (v == Verdict::reject) continue;
        verdict = v;
        if (i > 0) ++st.combined_recoveries;
      }
    }

    if (verdict) {
      in.done = true;
      in.copies.clear();
      ++st.delivered;
      trace(now_, "receive", f.ptype, f.seq, *verdict == Verdict::miss ? "miss" : "accept", f.message_id, f.attempt);
      if (f.ptype != PacketType::prosody_delta) respond(f.message_id, *verdict == Verdict::miss ? Response::miss : Response::ack);
      return;
    }
    if (!last_copy) return;
    trace(now_, "receive", f.ptype, f.seq, "failed", f.message_id, f.attempt);
    if (f.ptype == PacketType::prosody_delta) {
      in.done = true;
      ++st.lost;
      if (on_loss) on_loss(f.message_id, f.ptype, f.seq, now_);
      return;
    }
    respond(f.message_id, Response::nack);
  }

  Channel channel_;
  LinkPolicy policy_;
  PriorityScheduler scheduler_;
  uint64_t now_ = 0;
  uint64_t next_id_ = 0;
  std::array<uint16_t, 5> next_seq_{};
  std::map<uint64_t, Outgoing> out_;
  std::map<uint64_t, Incoming> in_;
  std::map<std::pair<uint64_t, uint64_t>, int> pending_release_;
  std::map<std::pair<uint64_t, uint64_t>, std::pair<uint64_t, Response>> responses_;
  uint64_t response_counter_ = 0;
  size_t awaiting_ = 0;  // rounds whose outcome the sender has not yet learned
  std::array<TypeStats, 5> stats_{};
  std::vector<TraceRecord> trace_;
};

/// Exact bit totals of a trace: component bits from submissions, wire bits
/// from every dispatched frame.
inline BitCounts count_bits(const std::vector<TraceRecord>& trace) {
  BitCounts b;
  for (const auto& r : trace) {
    if (r.event == "submit") {
      switch (r.ptype) {
        case PacketType::text: b.text += r.content_bits; break;
        case PacketType::prosody_key:
        case PacketType::prosody_delta: b.prosody += r.content_bits; break;
        case PacketType::timbre:
        case PacketType::timbre_profile: b.timbre += r.content_bits; break;
      }
      b.prosody += r.piggyback_bits;
    } else if (r.event == "dispatch") {
      b.wire_overhead += 8 * r.overhead_bytes;
      b.wire_payload += 8 * (r.wire_bytes - r.overhead_bytes);
    }
  }
  return b;
}

}  // namespace semcodec::transport
