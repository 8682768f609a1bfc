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


// Adapters backed by a child process speaking line-delimited JSON on its
// stdin/stdout: one request line, one response line.
//
//   STT request:  {"type":"transcribe","sample_rate":16000,"pcm":<base64 s16le>,
//                  "segments":[{"start_ms":..,"end_ms":..}],"push_to_talk":bool}
//   STT response: {"chunks":[{"text":..,"start_cs":..,"end_cs":..}]}
//   TTS request:  {"type":"synthesize","manifest":{...}}
//   TTS response: {"status":"ok", ...}
//
// Any response may instead be {"error":"..."}, reported as an adapter error.

#pragma once

#include <fcntl.h>
#include <openssl/evp.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <vector>

#include "json.hpp"
#include "semcodec/error.hpp"
#include "semcodec/pipeline/adapters.hpp"

namespace semcodec::pipeline {

inline std::string base64_encode(std::span<const uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

inline std::vector<uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) fail(ErrorKind::protocol, "base64: length is not a multiple of 4");
  std::vector<uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) fail(ErrorKind::protocol, "base64: invalid characters");
  size_t pad = 0;
  for (size_t i = text.size(); i > 0 && text[i - 1] == '=' && pad < 2; --i) ++pad;
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

/// A child process started through /bin/sh with piped stdin and stdout.
class ChildProcess {
 public:
  ChildProcess(std::string command, std::chrono::milliseconds timeout)
      : command_(std::move(command)), timeout_(timeout) {
    // Writes to a child that has exited must surface as EPIPE, not a signal.
    ::signal(SIGPIPE, SIG_IGN);
    int in[2], out[2];
    if (::pipe(in) != 0) fail(ErrorKind::adapter, "adapter: pipe failed");
    if (::pipe(out) != 0) {
      ::close(in[0]);
      ::close(in[1]);
      fail(ErrorKind::adapter, "adapter: pipe failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) fail(ErrorKind::adapter, "adapter: fork failed");
    if (pid_ == 0) {
      ::dup2(in[0], STDIN_FILENO);
      ::dup2(out[1], STDOUT_FILENO);
      ::close(in[0]);
      ::close(in[1]);
      ::close(out[0]);
      ::close(out[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    to_child_ = in[1];
    from_child_ = out[0];
    ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
    ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
      int status = 0;
      // Give the child a moment to exit on EOF, then make sure it is gone.
      for (int i = 0; i < 20; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
        ::usleep(5000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

  /// Sends one line and returns the next response line (without newline).
  /// The whole exchange shares one timeout.
  std::string request(const std::string& line) {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    write_all(line + "\n", deadline);
    return read_line(deadline);
  }

  size_t lines_read() const { return lines_read_; }
  const std::string& command() const { return command_; }

 private:
  using Deadline = std::chrono::steady_clock::time_point;

  /// Waits for `events` on `fd` until the deadline; false on timeout.
  bool wait(int fd, short events, Deadline deadline) {
    for (;;) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return false;
      pollfd pfd{fd, events, 0};
      const int r = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) fail(ErrorKind::adapter, "adapter: poll failed");
      if (r > 0) return true;
    }
  }

  [[noreturn]] void timed_out() {
    fail(ErrorKind::adapter, "adapter '" + command_ + "': timed out after " + std::to_string(timeout_.count()) + " ms");
  }

  void write_all(const std::string& s, Deadline deadline) {
    size_t off = 0;
    while (off < s.size()) {
      if (!wait(to_child_, POLLOUT, deadline)) timed_out();
      const ssize_t n = ::write(to_child_, s.data() + off, s.size() - off);
      if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
      if (n <= 0) fail(ErrorKind::adapter, "adapter '" + command_ + "': child is not accepting input (exited?)");
      off += static_cast<size_t>(n);
    }
  }

  std::string read_line(Deadline deadline) {
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        ++lines_read_;
        return line;
      }
      if (!wait(from_child_, POLLIN, deadline)) timed_out();
      char tmp[4096];
      const ssize_t n = ::read(from_child_, tmp, sizeof tmp);
      if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
      if (n <= 0) fail(ErrorKind::adapter, "adapter '" + command_ + "': child exited before responding");
      buffer_.append(tmp, static_cast<size_t>(n));
    }
  }

  std::string command_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  size_t lines_read_ = 0;
};

namespace detail {

/// Parses a response line; malformed JSON or an error object fail with the
/// line number and text.
inline nlohmann::json parse_response(const ChildProcess& child, const std::string& line) {
  const std::string where = "adapter response line " + std::to_string(child.lines_read());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::protocol, where + " is not valid JSON: '" + line + "'");
  }
  if (!j.is_object()) fail(ErrorKind::protocol, where + " is not a JSON object: '" + line + "'");
  if (j.contains("error")) fail(ErrorKind::adapter, where + ": child reported error: " + j["error"].dump());
  return j;
}

}  // namespace detail

class SubprocessStt final : public SttAdapter {
 public:
  explicit SubprocessStt(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : child_(std::move(command), timeout) {}

  std::string name() const override { return "subprocess:" + child_.command(); }

  std::vector<TimedChunk> transcribe(const dsp::AudioBuffer& audio, const std::vector<dsp::VadSegment>& segments,
                                     const QualityModeConfig& cfg) override {
    std::vector<uint8_t> pcm;
    pcm.reserve(audio.size() * 2);
    for (int16_t s : audio.samples) {
      pcm.push_back(static_cast<uint8_t>(static_cast<uint16_t>(s) & 0xFF));
      pcm.push_back(static_cast<uint8_t>(static_cast<uint16_t>(s) >> 8));
    }
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : segments) segs.push_back({{"start_ms", s.start_ms}, {"end_ms", s.end_ms}});
    const nlohmann::json req = {{"type", "transcribe"},
                                {"sample_rate", audio.sample_rate_hz},
                                {"pcm", base64_encode(pcm)},
                                {"segments", segs},
                                {"push_to_talk", cfg.push_to_talk}};
    const std::string line = child_.request(req.dump());
    const auto j = detail::parse_response(child_, line);
    const std::string where = "adapter response line " + std::to_string(child_.lines_read());
    if (!j.contains("chunks") || !j["chunks"].is_array())
      fail(ErrorKind::protocol, where + " lacks a 'chunks' array: '" + line + "'");
    const auto duration_cs = static_cast<uint32_t>(audio.duration_s() * 100.0);
    std::vector<TimedChunk> out;
    try {
      for (const auto& c : j["chunks"]) {
        TimedChunk t{c.at("text").get<std::string>(), c.at("start_cs").get<uint32_t>(), c.at("end_cs").get<uint32_t>()};
        if (t.start_cs > t.end_cs || t.end_cs > duration_cs)
          fail(ErrorKind::protocol, where + ": chunk timestamps outside the audio: '" + line + "'");
        out.push_back(std::move(t));
      }
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::protocol, where + " has a malformed chunk: '" + line + "'");
    }
    return out;
  }

 private:
  ChildProcess child_;
};

class SubprocessTts final : public TtsAdapter {
 public:
  explicit SubprocessTts(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : child_(std::move(command), timeout) {}

  std::string name() const override { return "subprocess:" + child_.command(); }

  nlohmann::json synthesize(const ReconstructionManifest& manifest) override {
    const nlohmann::json req = {{"type", "synthesize"}, {"manifest", manifest.to_json()}};
    const std::string line = child_.request(req.dump());
    auto j = detail::parse_response(child_, line);
    if (!j.contains("status") || !j["status"].is_string())
      fail(ErrorKind::protocol,
           "adapter response line " + std::to_string(child_.lines_read()) + " lacks a 'status' string: '" + line + "'");
    return j;
  }

 private:
  ChildProcess child_;
};

}  // namespace semcodec::pipeline
