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

// Quality-mode presets, validation and YAML round trips.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <string>

#include "semcodec/config.hpp"

using namespace semcodec;

namespace {

bool has_violation(const ValidationReport& r, const std::string& field) {
  return std::any_of(r.begin(), r.end(), [&](const Violation& v) { return v.field == field; });
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::config;
}

}  // namespace

TEST_CASE("minimal preset carries only pitch at 0.1 Hz", "[config][preset]") {
  const auto c = *preset("minimal");
  CHECK(c.keyframe_rate_hz == 0.1);
  CHECK(c.features == FeatureSet{true, false, false});
  CHECK(c.bits_pitch == 3);
  CHECK(c.bits_energy == 2);
  CHECK(validate_config(c).empty());
}

TEST_CASE("balanced preset is the 6/5/5-bit default", "[config][preset]") {
  const auto c = *preset("balanced");
  CHECK(c.keyframe_rate_hz == 0.5);
  CHECK(c.features == FeatureSet{});
  CHECK(c.bits_pitch == 6);
  CHECK(c.bits_energy == 5);
  CHECK(c.bits_rate == 5);
  CHECK(c.embedding_precision == Precision::half);
  CHECK(validate_config(c).empty());
}

TEST_CASE("high_quality preset uses 8/6/6 bits and single precision", "[config][preset]") {
  const auto c = *preset("high_quality");
  CHECK(c.keyframe_rate_hz == 1.0);
  CHECK(c.bits_pitch == 8);
  CHECK(c.bits_energy == 6);
  CHECK(c.bits_rate == 6);
  CHECK(c.embedding_precision == Precision::single);
  CHECK(c.speaker_change_threshold == 0.25);
  CHECK(preset("high-quality").has_value());
  CHECK(validate_config(c).empty());
}

TEST_CASE("presets are immutable values", "[config][preset]") {
  auto a = *preset("balanced");
  a.bits_pitch = 2;
  CHECK(preset("balanced")->bits_pitch == 6);
  CHECK(*preset("minimal") == *preset("minimal"));
  CHECK_FALSE(preset("ultra").has_value());
}

TEST_CASE("validation reports one entry per violation", "[config][validate]") {
  auto c = presets::balanced();
  c.bits_pitch = 12;
  auto r = validate_config(c);
  REQUIRE(r.size() == 1);
  CHECK(r[0].field == "bits_pitch");
  CHECK(r[0].message.find("bits_pitch out of range") != std::string::npos);

  c = presets::balanced();
  c.dead_zone_pitch = -0.1;
  CHECK(has_violation(validate_config(c), "dead_zone_pitch"));

  c = presets::balanced();
  c.keyframe_rate_hz = 0.0;
  c.speaker_change_threshold = 1.0;
  c.features = {false, false, false};
  r = validate_config(c);
  CHECK(r.size() == 3);
  CHECK(has_violation(r, "keyframe_rate_hz"));
  CHECK(has_violation(r, "speaker_change_threshold"));
  CHECK(has_violation(r, "features"));

  c = presets::balanced();
  c.keyframe_rate_hz = 100.0;
  CHECK(validate_config(c).empty());
  c.keyframe_rate_hz = 100.5;
  CHECK(has_violation(validate_config(c), "keyframe_rate_hz"));
}

TEST_CASE("disabled features' bit budgets are ignored", "[config][validate]") {
  auto c = presets::minimal();
  c.bits_rate = 40;
  CHECK(validate_config(c).empty());
  CHECK(c == presets::minimal());
}

TEST_CASE("YAML loading applies base presets and overrides", "[config][yaml]") {
  const auto c = load_mode_config("base: high_quality\nmode_name: custom\nbits_pitch: 7\n");
  CHECK(c.mode_name == "custom");
  CHECK(c.bits_pitch == 7);
  CHECK(c.bits_energy == 6);
  CHECK(c.keyframe_rate_hz == 1.0);

  const auto f = load_mode_config("features: [pitch, rate]\n");
  CHECK(f.features == FeatureSet{true, false, true});
}

TEST_CASE("YAML loading rejects bad documents with config errors", "[config][yaml]") {
  CHECK(kind_of([] { load_mode_config("keyframe_rate_hz: 0\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { load_mode_config("bits_pich: 4\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { load_mode_config("bits_pitch: [1\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { load_mode_config("bits_pitch: many\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { load_mode_config("base: nonexistent\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { load_mode_config("- a\n- b\n"); }) == ErrorKind::config);
  try {
    load_mode_config("keyframe_rate_hz: 0\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("keyframe_rate_hz") != std::string::npos);
  }
}

TEST_CASE("serialize then load reproduces every preset", "[config][yaml]") {
  for (const auto& name : preset_names()) {
    const auto c = *preset(name);
    const auto text = serialize_config(c);
    CHECK(load_mode_config(text) == c);
    CHECK(serialize_config(load_mode_config(text)) == text);
  }
  const auto minimal = serialize_config(presets::minimal());
  CHECK(minimal.find("bits_rate") == std::string::npos);
  CHECK(minimal.find("bits_energy") == std::string::npos);
}

TEST_CASE("shipped mode files match the built-in presets", "[config][yaml]") {
  const std::filesystem::path dir = std::filesystem::path(SEMCODEC_DATA_DIR) / "modes";
  for (const auto& name : preset_names()) {
    const auto file = dir / (name + ".yaml");
    REQUIRE(std::filesystem::exists(file));
    CHECK(load_mode_file(file) == *preset(name));
    CHECK(resolve_mode(file.string()) == *preset(name));
  }
  CHECK(kind_of([] { resolve_mode("no-such-mode"); }) == ErrorKind::config);
}

TEST_CASE("change threshold is a cosine distance", "[config]") {
  CHECK(presets::balanced().change_similarity_threshold() == Catch::Approx(0.7));
  CHECK(presets::high_quality().change_similarity_threshold() == Catch::Approx(0.75));
}
