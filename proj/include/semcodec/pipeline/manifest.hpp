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


// Reconstruction manifest: what the receiver hands to a synthesizer.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "semcodec/dsp/prosody_track.hpp"
#include "semcodec/error.hpp"

namespace semcodec::pipeline {

struct ManifestUtterance {
  uint16_t seq = 0;
  uint32_t start_cs = 0;
  std::string text;
  friend bool operator==(const ManifestUtterance&, const ManifestUtterance&) = default;
};

/// A TEXT chunk that never arrived, located between its neighbours.
struct TextGap {
  uint16_t seq = 0;
  friend bool operator==(const TextGap&, const TextGap&) = default;
};

struct ManifestStats {
  size_t keyframes_received = 0;
  size_t deltas_discarded = 0;
  size_t text_chunks = 0;
  size_t timbre_packets = 0;
  friend bool operator==(const ManifestStats&, const ManifestStats&) = default;
};

struct ReconstructionManifest {
  std::string mode;
  uint32_t duration_cs = 0;
  std::vector<ManifestUtterance> utterances;  // delivery order = send order
  std::vector<TextGap> gaps;
  dsp::ProsodyTrack prosody;  // 100 Hz, covers the whole session
  std::string timbre_state = "none";  // none | resolved | requesting
  std::optional<uint64_t> timbre_profile;
  size_t timbre_dim = 0;
  ManifestStats stats;

  /// Concatenated utterance text, single-space separated.
  std::string text() const {
    std::string s;
    for (const auto& u : utterances) s += (s.empty() ? "" : " ") + u.text;
    return s;
  }

  nlohmann::json to_json() const {
    using nlohmann::json;
    json utts = json::array();
    for (const auto& u : utterances) utts.push_back({{"seq", u.seq}, {"start_cs", u.start_cs}, {"text", u.text}});
    json gaps_j = json::array();
    for (const auto& g : gaps) gaps_j.push_back({{"seq", g.seq}, {"marker", "[missing text]"}});
    std::vector<double> pitch, energy, rate;
    std::vector<int> voiced;
    for (size_t t = 0; t < prosody.size(); ++t) {
      pitch.push_back(prosody.frames[t].f0_norm);
      energy.push_back(prosody.frames[t].energy_norm);
      rate.push_back(prosody.frames[t].rate_norm);
      voiced.push_back(prosody.voiced[t] ? 1 : 0);
    }
    char id[17] = "";
    if (timbre_profile) std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(*timbre_profile));
    return {{"mode", mode},
            {"duration_s", duration_cs / 100.0},
            {"utterances", utts},
            {"gaps", gaps_j},
            {"prosody",
             {{"frame_rate_hz", prosody.frame_rate_hz},
              {"frames", prosody.size()},
              {"pitch", pitch},
              {"energy", energy},
              {"rate", rate},
              {"voiced", voiced}}},
            {"timbre",
             {{"state", timbre_state},
              {"profile_id", timbre_profile ? json(std::string(id)) : json(nullptr)},
              {"dim", timbre_dim}}},
            {"stats",
             {{"keyframes_received", stats.keyframes_received},
              {"deltas_discarded", stats.deltas_discarded},
              {"text_chunks", stats.text_chunks},
              {"timbre_packets", stats.timbre_packets}}}};
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::input, "cannot write manifest " + path.string());
    out << to_json().dump(1) << "\n";
  }
};

}  // namespace semcodec::pipeline
