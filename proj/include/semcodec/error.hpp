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

#pragma once

#include <stdexcept>
#include <string>

namespace semcodec {

/// Coarse failure category. The CLI maps each kind onto a distinct exit code.
enum class ErrorKind {
  config,        // invalid or unparsable quality-mode configuration
  input,         // unreadable or malformed input files / buffers
  precondition,  // caller violated an operation's contract
  decode,        // corrupt bitstream or payload
  desync,        // sender/receiver context mismatch
  adapter,       // external STT/TTS adapter failure
  protocol,      // adapter protocol violation
  delivery,      // transport gave up on a reliable packet
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::input: return "input";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::decode: return "decode";
    case ErrorKind::desync: return "desync";
    case ErrorKind::adapter: return "adapter";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::delivery: return "delivery";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace semcodec
