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

// Transcript preprocessing, compression and the context dictionary.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "semcodec/text/compressor.hpp"
#include "semcodec/text/preprocess.hpp"
#include "semcodec/text/text_codec.hpp"

using namespace semcodec;
using namespace semcodec::text;

namespace {

const PreprocessTables& tables() {
  static const PreprocessTables t =
      PreprocessTables::load(std::filesystem::path(SEMCODEC_DATA_DIR) / "text", "en");
  return t;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<std::string> conversational() {
  return read_lines(std::filesystem::path(SEMCODEC_DATA_DIR) / "corpus" / "conversational.txt");
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

const std::string kSentence =
    "It was late in the autumn when the old miller finally agreed to sell the house by the river, "
    "and his daughter wrote that she would come home before the first snow.";

}  // namespace

// ----------------------------------------------------------- preprocessing

TEST_CASE("fillers are removed and the result is stable", "[text][preprocess]") {
  const auto once = preprocess_text("um, I mean, we should go", tables());
  CHECK(once == "I mean, we should go");
  CHECK(preprocess_text(once, tables()) == once);
  CHECK(preprocess_text("Can you, uh, send it", tables()) == "Can you send it");
  CHECK(preprocess_text("We left early, um.", tables()) == "We left early");
  CHECK(preprocess_text("Wait, hmm? Fine", tables()) == "Wait? Fine");
}

TEST_CASE("abbreviation table entries are applied on whole words", "[text][preprocess]") {
  CHECK(preprocess_text("doctor Smith", tables()) == "dr Smith");
  CHECK(preprocess_text("Doctor Smith arrived", tables()) == "Dr Smith arrived");
  CHECK(preprocess_text("the doctors agreed", tables()) == "the doctors agreed");
  CHECK(preprocess_text("fruit, et cetera", tables()) == "fruit, etc");
  CHECK(preprocess_text("It is for example blue", tables()) == "It is eg blue");
}

TEST_CASE("punctuation is minimized", "[text][preprocess]") {
  CHECK(minimize_punctuation("Really?!  Yes...   fine.") == "Really? Yes. fine");
  CHECK(minimize_punctuation("a , b ;c") == "a, b; c");
  CHECK(minimize_punctuation("He said \xE2\x80\x9Chi\xE2\x80\x9D") == "He said hi");
  CHECK(minimize_punctuation("don\xE2\x80\x99t") == "don't");
  CHECK(minimize_punctuation("pi is 3.14, e.g. roughly") == "pi is 3.14, e.g. roughly");
  CHECK(minimize_punctuation("one -- two") == "one, two");
}

TEST_CASE("preprocessing is idempotent on the conversational fixture", "[text][preprocess]") {
  for (const auto& line : conversational()) {
    const auto once = preprocess_text(line, tables());
    CHECK(preprocess_text(once, tables()) == once);
  }
}

TEST_CASE("preprocessing shrinks conversational transcripts by 5-10%", "[text][preprocess]") {
  const auto lines = conversational();
  REQUIRE(lines.size() == 100);
  size_t before = 0, after = 0;
  for (const auto& line : lines) {
    before += line.size();
    after += preprocess_text(line, tables()).size();
  }
  const double reduction = 1.0 - static_cast<double>(after) / static_cast<double>(before);
  INFO("reduction " << reduction);
  CHECK(reduction >= 0.05);
  CHECK(reduction <= 0.10);
}

TEST_CASE("missing tables are a config error", "[text][preprocess]") {
  CHECK(kind_of([] { PreprocessTables::load(std::filesystem::path(SEMCODEC_DATA_DIR) / "text", "xx"); }) ==
        ErrorKind::config);
}

// ------------------------------------------------------------- compressors

TEST_CASE("compressors round-trip with and without dictionaries", "[text][compressor]") {
  const ByteView in(reinterpret_cast<const uint8_t*>(kSentence.data()), kSentence.size());
  const std::string dict_text = "the old miller by the river";
  const ByteView dict(reinterpret_cast<const uint8_t*>(dict_text.data()), dict_text.size());
  for (auto kind : {CompressorKind::brotli, CompressorKind::zlib}) {
    const auto& c = compressor_for(kind);
    CHECK(c.decompress(c.compress(in, {}, 5), {}) == Bytes(in.begin(), in.end()));
    CHECK(c.decompress(c.compress(in, dict, 5), dict) == Bytes(in.begin(), in.end()));
    CHECK(c.decompress(c.compress({}, {}, 5), {}).empty());
  }
}

TEST_CASE("corrupt or truncated streams raise decode errors", "[text][compressor]") {
  const ByteView in(reinterpret_cast<const uint8_t*>(kSentence.data()), kSentence.size());
  for (auto kind : {CompressorKind::brotli, CompressorKind::zlib}) {
    const auto& c = compressor_for(kind);
    auto z = c.compress(in, {}, 5);
    z.resize(z.size() / 2);
    CHECK(kind_of([&] { c.decompress(z, {}); }) == ErrorKind::decode);
  }
}

// ------------------------------------------------------------- dictionary

TEST_CASE("context dictionary updates", "[text][dictionary]") {
  ContextDictionary d;
  d.update("hello there");
  CHECK(d.window() == "hello there");
  CHECK(d.version() == 1);
  const std::string big(20000, 'x');
  d.update(big);
  CHECK(d.size() == kDefaultDictionaryCapacity);
  CHECK(d.window() == big.substr(big.size() - kDefaultDictionaryCapacity));
  CHECK(d.version() == 2);

  ContextDictionary a, b;
  for (const auto& line : conversational()) {
    a.update(line);
    b.update(line);
  }
  CHECK(a == b);
}

// ------------------------------------------------------------- text codec

TEST_CASE("TEXT payloads round-trip through sender and receiver", "[text][codec]") {
  for (const auto& name : preset_names()) {
    const auto cfg = *preset(name);
    TextEncoder enc(cfg, tables());
    TextDecoder dec(cfg);
    for (const auto& line : conversational()) {
      const auto prepared = enc.prepare(line);
      const auto payload = enc.encode(prepared);
      REQUIRE(dec.decode(payload) == prepared);
      enc.acknowledge(prepared);
    }
    CHECK(enc.dictionary() == dec.dictionary());
  }
}

TEST_CASE("format byte encodes codec, dictionary use and version", "[text][codec]") {
  for (uint8_t v = 0; v < 16; ++v)
    for (bool d : {false, true})
      for (auto k : {CompressorKind::brotli, CompressorKind::zlib}) {
        const TextFormat f{k, d, v};
        const auto g = TextFormat::unpack(f.pack());
        CHECK(g.codec == k);
        CHECK(g.dictionary == d);
        CHECK(g.version_mod16 == v);
      }
  CHECK(kind_of([] { TextFormat::unpack(0x07); }) == ErrorKind::decode);
}

TEST_CASE("a repeated sentence is cheaper with the dictionary", "[text][codec]") {
  auto cfg = presets::balanced();
  TextEncoder enc(cfg, tables());
  const auto p = enc.prepare(kSentence);
  const auto first = enc.encode(p);
  enc.acknowledge(p);
  const auto second = enc.encode(p);
  CHECK(second.size() < first.size());

  cfg.text_dictionary = false;
  TextEncoder plain(cfg, tables());
  plain.acknowledge(p);
  CHECK(second.size() <= plain.encode(p).size());
}

TEST_CASE("re-sending any 64+ byte chunk never costs more with the dictionary", "[text][codec]") {
  ContextDictionary empty;
  for (const auto& line : conversational()) {
    if (line.size() < 64) continue;
    ContextDictionary d;
    d.update(line);
    const auto with = compress_text(line, d, CompressorKind::brotli, 5, true);
    const auto without = compress_text(line, empty, CompressorKind::brotli, 5, false);
    CHECK(with.size() <= without.size());
  }
}

TEST_CASE("utterance-length transcripts compress to roughly 60-110 bytes", "[text][codec]") {
  // Consecutive fixture lines grouped into ~170-character utterances and sent
  // as one conversation through the balanced-mode sender.
  TextEncoder enc(presets::balanced(), tables());
  std::vector<size_t> sizes;
  size_t chars = 0;
  std::string utterance;
  for (const auto& line : conversational()) {
    utterance += (utterance.empty() ? "" : " ") + line;
    if (utterance.size() < 150) continue;
    const auto prepared = enc.prepare(utterance);
    sizes.push_back(enc.encode(prepared).size());
    chars += prepared.size();
    enc.acknowledge(prepared);
    utterance.clear();
  }
  REQUIRE(sizes.size() >= 20);
  double mean = 0.0;
  for (size_t n : sizes) mean += static_cast<double>(n) / static_cast<double>(sizes.size());
  INFO("mean chars " << chars / sizes.size() << " mean payload " << mean);
  CHECK(chars / sizes.size() >= 150);
  CHECK(chars / sizes.size() <= 190);
  CHECK(mean >= 60.0);
  CHECK(mean <= 110.0);
}

TEST_CASE("both ends start from the same seeded dictionary", "[text][dictionary]") {
  const auto cfg = presets::balanced();
  TextEncoder enc(cfg, tables());
  TextDecoder dec(cfg);
  CHECK(enc.dictionary() == dec.dictionary());
  CHECK(enc.dictionary().size() > 0);
  CHECK(enc.dictionary().version() == 0);
  auto plain = cfg;
  plain.text_dictionary = false;
  CHECK(initial_dictionary(plain).size() == 0);
}

TEST_CASE("chunks shorter than 3 characters are rejected", "[text][codec]") {
  TextEncoder enc(presets::balanced(), tables());
  CHECK(kind_of([&] { (void)enc.prepare("um."); }) == ErrorKind::precondition);
  CHECK(kind_of([&] { (void)enc.encode("ab"); }) == ErrorKind::precondition);
}

TEST_CASE("a single-bit flip never yields different text", "[text][codec]") {
  // Some bits (stream padding, unused header fields) do not affect the
  // decoded text; every other flip must raise.
  ContextDictionary d;
  d.update("the house by the river");
  for (auto kind : {CompressorKind::brotli, CompressorKind::zlib}) {
    const auto payload = compress_text(kSentence, d, kind, 5, true);
    for (size_t bit = 0; bit < payload.size() * 8; ++bit) {
      auto bad = payload;
      bad[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
      std::string decoded;
      try {
        decoded = decompress_text(bad, d);
      } catch (const Error& e) {
        CHECK((e.kind() == ErrorKind::decode || e.kind() == ErrorKind::desync));
        continue;
      }
      CHECK(decoded == kSentence);
    }
  }
}

TEST_CASE("a dictionary version mismatch is a desync error", "[text][codec]") {
  ContextDictionary sender, receiver;
  sender.update("shared context line");
  receiver.update("shared context line");
  receiver.update("an extra line the sender never acknowledged");
  const auto payload = compress_text(kSentence, sender, CompressorKind::brotli, 5, true);
  CHECK(kind_of([&] { (void)decompress_text(payload, receiver); }) == ErrorKind::desync);
}
