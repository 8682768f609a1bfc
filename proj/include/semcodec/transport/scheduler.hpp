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


// Strict-priority transmit scheduler with bounded queues: HIGH before MEDIUM
// before LOW at every dispatch, FIFO within a class.

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "semcodec/error.hpp"
#include "semcodec/transport/header.hpp"

namespace semcodec::transport {

/// One frame waiting for a transmit slot.
struct QueuedFrame {
  uint64_t message_id = 0;
  Priority priority = Priority::low;
  PacketType ptype = PacketType::prosody_delta;
  uint16_t seq = 0;
  uint32_t attempt = 1;  // 1-based transmission round
  uint32_t copy = 0;     // index within the round
  uint32_t copies = 1;   // copies sent in this round
};

class PriorityScheduler {
 public:
  explicit PriorityScheduler(size_t capacity = 1024) : capacity_(capacity) {
    if (capacity_ == 0) fail(ErrorKind::precondition, "scheduler: capacity must be positive");
  }

  /// Enqueues `f`. When full, the newest frame of the lowest class present
  /// (possibly `f` itself) is dropped and returned.
  std::optional<QueuedFrame> enqueue(const QueuedFrame& f) {
    queues_[index(f.priority)].push_back(f);
    if (size() <= capacity_) return std::nullopt;
    for (int c = 2; c >= 0; --c) {
      auto& q = queues_[static_cast<size_t>(c)];
      if (q.empty()) continue;
      QueuedFrame victim = q.back();
      q.pop_back();
      ++overflow_drops_;
      return victim;
    }
    return std::nullopt;
  }

  /// Next frame to transmit, or nullopt when idle.
  std::optional<QueuedFrame> dispatch() {
    for (auto& q : queues_) {
      if (q.empty()) continue;
      QueuedFrame f = q.front();
      q.pop_front();
      return f;
    }
    return std::nullopt;
  }

  /// Removes all queued frames of a message; returns how many were removed.
  size_t cancel(uint64_t message_id) {
    size_t n = 0;
    for (auto& q : queues_)
      for (auto it = q.begin(); it != q.end();)
        if (it->message_id == message_id) {
          it = q.erase(it);
          ++n;
        } else {
          ++it;
        }
    return n;
  }

  size_t size() const { return queues_[0].size() + queues_[1].size() + queues_[2].size(); }
  size_t size(Priority p) const { return queues_[index(p)].size(); }
  bool empty() const { return size() == 0; }
  size_t capacity() const { return capacity_; }
  uint64_t overflow_drops() const { return overflow_drops_; }

  /// Highest class currently queued.
  std::optional<Priority> best_queued() const {
    for (size_t c = 0; c < 3; ++c)
      if (!queues_[c].empty()) return static_cast<Priority>(c);
    return std::nullopt;
  }

 private:
  static size_t index(Priority p) { return static_cast<size_t>(p); }

  size_t capacity_;
  std::array<std::deque<QueuedFrame>, 3> queues_;
  uint64_t overflow_drops_ = 0;
};

}  // namespace semcodec::transport
