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

#include <cmath>
#include <vector>

#include "semcodec/dsp/audio.hpp"

namespace semcodec::dsp {

inline constexpr size_t kHopSamples = 160;      // 10 ms
inline constexpr size_t kEnergyWindow = 640;    // 40 ms

/// Frame RMS energy: E[t] = sqrt(1/Nw * sum_{i<Nw} x[t*Ns + i]^2) over
/// windows starting at each hop. Samples past the end count as zero, so the
/// track has ceil(N / Ns) frames.
inline std::vector<double> extract_energy(const AudioBuffer& audio) {
  if (audio.empty()) fail(ErrorKind::precondition, "extract_energy: empty audio");
  const size_t n = audio.size();
  std::vector<double> energy(frame_count(n, kHopSamples));
  for (size_t t = 0; t < energy.size(); ++t) {
    const size_t start = t * kHopSamples;
    const size_t stop = std::min(n, start + kEnergyWindow);
    double sum = 0.0;
    for (size_t i = start; i < stop; ++i) {
      const double x = audio.at(i);
      sum += x * x;
    }
    energy[t] = std::sqrt(sum / static_cast<double>(kEnergyWindow));
  }
  return energy;
}

}  // namespace semcodec::dsp
