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

// Dead-zone uniform quantizer for prosody deltas.

#pragma once

#include <algorithm>
#include <cmath>

#include "semcodec/config.hpp"

namespace semcodec::prosody {

/// Largest representable |delta| per feature: z-score units for pitch and
/// rate, unit-range units for energy.
inline constexpr double kPitchClamp = 4.0;
inline constexpr double kEnergyClamp = 1.5;
inline constexpr double kRateClamp = 4.0;

inline double clamp_range(Feature f) {
  switch (f) {
    case Feature::pitch: return kPitchClamp;
    case Feature::energy: return kEnergyClamp;
    case Feature::rate: return kRateClamp;
  }
  return 1.0;
}

struct QuantizerSpec {
  int bits = 6;
  double dead_zone = 0.05;
  double clamp = kPitchClamp;

  /// Largest code magnitude, 2^(b-1) - 1.
  int max_code() const { return (1 << (bits - 1)) - 1; }
  /// Step size alpha = clamp / (2^(b-1) - 1).
  double step() const { return clamp / static_cast<double>(max_code()); }
  bool valid() const {
    return bits >= 2 && bits <= 8 && dead_zone >= 0.0 && dead_zone < clamp && step() > 0.0;
  }
};

inline QuantizerSpec quantizer_for(Feature f, const QualityModeConfig& cfg) {
  return QuantizerSpec{cfg.bits(f), cfg.dead_zone(f), clamp_range(f)};
}

/// 0 inside the dead zone, otherwise sign(d) * ceil(|d| / alpha), saturated
/// to the b-bit symmetric range.
inline int quantize(double delta, const QuantizerSpec& q) {
  const double mag = std::abs(delta);
  if (!(mag >= q.dead_zone)) return 0;  // also maps NaN to 0
  const double steps = std::ceil(mag / q.step());
  const int code = static_cast<int>(std::min(steps, static_cast<double>(q.max_code())));
  return delta < 0.0 ? -code : code;
}

/// Mid-rise reconstruction sign(q) * (|q| - 0.5) * alpha.
inline double dequantize(int code, const QuantizerSpec& q) {
  if (code == 0) return 0.0;
  const int c = std::clamp(code, -q.max_code(), q.max_code());
  const double mag = (std::abs(c) - 0.5) * q.step();
  return c < 0 ? -mag : mag;
}

/// Worst-case reconstruction error for one delta of the given magnitude.
inline double quantization_error_bound(double delta, const QuantizerSpec& q) {
  const double mag = std::abs(delta);
  if (mag < q.dead_zone) return mag;
  const double top = (q.max_code() - 0.5) * q.step();
  if (mag > q.max_code() * q.step()) return mag - top;
  return q.step() / 2.0;
}

}  // namespace semcodec::prosody
