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

// Acceptance runner: one PASS/FAIL line per release criterion, evaluated on
// the generated fixture corpus. Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semcodec/dsp/energy.hpp"
#include "semcodec/pipeline/adapters.hpp"
#include "semcodec/pipeline/benchmark.hpp"
#include "semcodec/pipeline/corpus.hpp"
#include "semcodec/pipeline/session.hpp"
#include "semcodec/prosody/huffman.hpp"
#include "semcodec/prosody/prosody_codec.hpp"
#include "semcodec/prosody/quantizer.hpp"
#include "semcodec/prosody/spline.hpp"
#include "semcodec/timbre/timbre_codec.hpp"
#include "semcodec/transport/capture.hpp"
#include "semcodec/transport/header.hpp"
#include "semcodec/transport/link.hpp"
#include "semcodec/transport/report.hpp"

using namespace semcodec;
using namespace semcodec::pipeline;
using Clock = std::chrono::steady_clock;

namespace {

/// Collects failed conditions for one criterion.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  bool passed() const { return failed_ == 0; }
  std::string detail() const {
    if (passed()) return notes_;
    std::string out = std::to_string(failed_) + " failed: ";
    for (size_t i = 0; i < failures_.size(); ++i) out += (i ? " | " : "") + failures_[i];
    return out + (notes_.empty() ? "" : " [" + notes_ + "]");
  }

 private:
  std::vector<std::string> failures_;
  size_t failed_ = 0;
  std::string notes_;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(precision);
  o << v;
  return o.str();
}

struct Fixture {
  Corpus corpus;
  std::vector<LoadedUtterance> utts;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.corpus = load_corpus(ensure_fixture_corpus(SEMCODEC_FIXTURE_DIR));
    x.utts = load_utterances(x.corpus);
    return x;
  }();
  return f;
}

/// Clean-channel benchmark shared by the bitrate criteria.
const BenchTable& clean_bench() {
  static const BenchTable t = run_benchmark(fixture().corpus, BenchOptions{});
  return t;
}

// ------------------------------------------------------------- criteria

void prosody_bitrate(Verdict& v) {
  const auto& table = clean_bench();
  const std::map<std::string, std::pair<double, double>> bands{
      {"minimal", {0.3, 1.5}}, {"balanced", {3.5, 9.0}}, {"high_quality", {9.0, 18.0}}};
  v.require(fixture().utts.size() >= 20, "fixture corpus has fewer than 20 utterances");
  for (const auto& [mode, band] : bands) {
    const auto* row = table.find(mode, 0.0);
    v.require(row != nullptr, "no clean row for " + mode);
    if (!row) continue;
    const double m = row->prosody_bps.mean;
    v.require(m >= band.first && m <= band.second,
              mode + " mean " + fmt(m) + " outside [" + fmt(band.first, 1) + ", " + fmt(band.second, 1) + "]");
    v.note(mode + " " + fmt(m, 2) + "±" + fmt(row->prosody_bps.std, 2));
  }
  std::map<std::string, std::map<std::string, double>> per_utt;  // id -> mode -> bps
  for (const auto& r : table.utterances) per_utt[r.id][r.mode] = r.report.prosody_bps;
  for (const auto& [id, m] : per_utt)
    v.require(m.at("minimal") < m.at("balanced") && m.at("balanced") < m.at("high_quality"),
              id + " not strictly ordered");
}

void text_bitrate(Verdict& v) {
  for (const auto& mode : preset_names()) {
    const auto* row = clean_bench().find(mode, 0.0);
    v.require(row != nullptr, "no clean row for " + mode);
    if (!row) continue;
    const double m = row->text_bps.mean;
    v.require(m >= 50.0 && m <= 90.0, mode + " text mean " + fmt(m) + " outside [50, 90]");
    v.note(mode + " " + fmt(m, 1) + "±" + fmt(row->text_bps.std, 1));
  }
}

void timbre_arithmetic(Verdict& v) {
  const double reference = transport::amortized_bps(384, 45.0);
  v.require(std::abs(reference - 68.3) <= 0.1, "384 B over 45 s gives " + fmt(reference));
  v.require(reference == 8.0 * 384.0 / 45.0, "amortized rate is not 8*bytes/duration");
  v.note("384 B / 45 s = " + fmt(reference, 2) + " bps");

  for (const auto& u : fixture().utts) {
    const auto half = timbre::quantize_embedding(u.embedding, Precision::half, 192);
    v.require(half.size() == 384, u.id + " half payload is " + std::to_string(half.size()) + " bytes");
  }
  for (const auto& mode : preset_names()) {
    const auto cfg = *preset(mode);
    for (const auto& r : clean_bench().utterances) {
      if (r.mode != mode) continue;
      const auto& u = *std::find_if(fixture().utts.begin(), fixture().utts.end(),
                                    [&](const LoadedUtterance& x) { return x.id == r.id; });
      const auto q = timbre::quantize_embedding(u.embedding, cfg.embedding_precision,
                                                static_cast<size_t>(cfg.embedding_dim));
      const auto bytes = timbre::compress_embedding(q, cfg.embedding_precision, cfg.timbre_compressor).size();
      v.require(r.report.bits.timbre == 8 * bytes,
                mode + " " + r.id + " timbre bits " + std::to_string(r.report.bits.timbre) + " != 8*" +
                    std::to_string(bytes));
      v.require(r.report.timbre_bps == transport::amortized_bps(bytes, r.report.duration_s),
                mode + " " + r.id + " timbre bps is not 8*bytes/duration");
    }
  }
}

void sweep_trend(Verdict& v) {
  const auto t = run_prosody_sweep(fixture().corpus, {0.05, 0.1, 0.5, 1.0, 5.0, 20.0});
  v.require(t.rows.size() == 6, "sweep produced " + std::to_string(t.rows.size()) + " rows");
  for (size_t i = 1; i < t.rows.size(); ++i)
    v.require(t.rows[i].total_bps.mean > t.rows[i - 1].total_bps.mean,
              "total not increasing at " + fmt(t.rows[i].rate_hz, 2) + " Hz");
  v.require(t.prosody_fit.r_squared >= 0.95, "R^2 " + fmt(t.prosody_fit.r_squared, 4) + " < 0.95");
  if (!t.rows.empty())
    v.note("total " + fmt(t.rows.front().total_bps.mean, 1) + " -> " + fmt(t.rows.back().total_bps.mean, 1) +
           " bps");
  v.note("R^2 " + fmt(t.prosody_fit.r_squared, 4) + ", slope " + fmt(t.prosody_fit.slope, 1) + " bits/keyframe");
}

void noise_resilience(Verdict& v) {
  const auto& utts = fixture().utts;
  std::string survival_note;
  for (const auto& mode : preset_names()) {
    const auto cfg = *preset(mode);
    std::vector<Analysis> analyses;
    for (const auto& u : utts) analyses.push_back(analyze_replay(u, cfg));
    std::vector<double> survival;
    for (double ber : {0.0, 0.001, 0.01, 0.1}) {
      double surv = 0.0;
      for (size_t i = 0; i < utts.size(); ++i) {
        SessionOptions opt;
        opt.channel.ber = ber;
        opt.channel.seed = cell_seed(2026, i, static_cast<size_t>(ber * 1e4));
        const auto r = encode_session(utts[i].audio, analyses[i], utts[i].embedding, cfg, opt);
        const std::string where = mode + " ber " + fmt(ber) + " " + utts[i].id;
        v.require(text_intact(r), where + ": text not intact");
        v.require(r.delivery.text_gaps == 0, where + ": text gaps");
        // The decoder finishes from the capture alone and emits every field.
        try {
          const auto m = decode_session(r.capture, cfg);
          v.require(m.prosody.size() == r.capture.duration_cs, where + ": prosody track is short");
          v.require(m.timbre_state == "resolved", where + ": timbre " + m.timbre_state);
          v.require(m.text() == r.manifest.text(), where + ": replayed text differs");
          bool finite = true;
          for (const auto& fr : m.prosody.frames)
            finite = finite && std::isfinite(fr.f0_norm) && std::isfinite(fr.energy_norm) &&
                     std::isfinite(fr.rate_norm);
          v.require(finite, where + ": non-finite prosody");
        } catch (const Error& e) {
          v.require(false, where + ": decode threw " + e.what());
        }
        surv += r.delivery.delta_survival();
      }
      survival.push_back(surv / static_cast<double>(utts.size()));
    }
    for (size_t k = 2; k < survival.size(); ++k)
      v.require(survival[k] < survival[k - 1], mode + ": delta survival does not fall at step " + std::to_string(k));
    survival_note += mode + " " + fmt(survival[1], 2) + "/" + fmt(survival[2], 2) + "/" + fmt(survival[3], 2) + " ";
  }
  v.note("delta survival at 0.1%/1%/10%: " + survival_note);
}

int oracle_quantize(double d, double tau, double clamp, int bits) {
  const int top = (1 << (bits - 1)) - 1;
  if (std::fabs(d) < tau) return 0;
  const int q = std::min(top, static_cast<int>(std::ceil(std::fabs(d) / (clamp / top))));
  return d < 0 ? -q : q;
}

void codec_properties(Verdict& v) {
  using namespace semcodec::prosody;
  // (a) quantizer against the brute-force oracle.
  size_t grid = 0;
  for (Feature f : kAllFeatures)
    for (int bits = 2; bits <= 8; ++bits) {
      const double clamp = clamp_range(f);
      const QuantizerSpec q{bits, f == Feature::energy ? 0.02 : 0.05, clamp};
      const long steps = std::lround(clamp / 1e-3);
      for (long i = -steps; i <= steps; ++i, ++grid) {
        const double d = static_cast<double>(i) * 1e-3;
        const int code = quantize(d, q);
        v.require(code == oracle_quantize(d, q.dead_zone, clamp, bits), "quantizer differs at " + fmt(d));
        if (std::fabs(d) < q.dead_zone)
          v.require(code == 0 && dequantize(code, q) == 0.0, "dead zone not exact at " + fmt(d));
        else
          v.require(std::fabs(d - dequantize(code, q)) <= q.step() / 2.0 + 1e-12, "error > alpha/2 at " + fmt(d));
      }
    }
  v.note(std::to_string(grid) + " quantizer grid points");

  // (b) Huffman identity and code length.
  std::mt19937_64 rng(42);
  for (const auto& name : preset_names()) {
    const auto cfg = *preset(name);
    ProsodyEntropyCoder coder(cfg);
    for (int i = 0; i < 10000; ++i) {
      KeyframeCodes k;
      k.voiced = rng() & 1u;
      k.is_absolute = rng() & 1u;
      for (Feature f : kAllFeatures) {
        if (!coder.carries(f, k.voiced)) continue;
        const int mc = (1 << (cfg.bits(f) - 1)) - 1;
        k.codes[static_cast<int>(f)] = std::uniform_int_distribution<int>(-mc, mc)(rng);
      }
      v.require(coder.decode(coder.encode(k)) == k, name + ": Huffman round trip differs");
    }
  }
  for (Feature f : kAllFeatures)
    for (int bits = 2; bits <= 8; ++bits) {
      const auto p = training_distribution(QuantizerSpec{bits, 0.0, clamp_range(f)}, training_model(f, bits));
      const double h = entropy_bits(p);
      v.require(prosody_codebook(f, bits).mean_length(p) <= h + 1.0, "mean length exceeds entropy + 1");
    }

  // (c) natural spline: exact on linear keyframes, 1e-6 relative on cubics.
  std::vector<ReceivedKeyframe> keys;
  for (uint64_t t = 0; t <= 1000; t += 137)
    keys.push_back({t, {{0.5 + 0.002 * t, 0.1 + 0.0007 * t, -1.0 + 0.001 * t}, true}});
  const auto lin = reconstruct_contour(keys, 960);
  double lin_err = 0.0;
  for (size_t t = 0; t < lin.size(); ++t) {
    lin_err = std::max(lin_err, std::abs(lin.frames[t].f0_norm - (0.5 + 0.002 * t)));
    lin_err = std::max(lin_err, std::abs(lin.frames[t].energy_norm - (0.1 + 0.0007 * t)));
    lin_err = std::max(lin_err, std::abs(lin.frames[t].rate_norm - (-1.0 + 0.001 * t)));
  }
  v.require(lin_err <= 1e-9, "linear spline error " + std::to_string(lin_err));
  auto poly = [](double x) { return 1e-7 * x * x * x - 5e-5 * x * x + 0.01 * x + 0.3; };
  std::vector<double> xs, ys;
  for (int x = 0; x <= 500; x += 5) {
    xs.push_back(x);
    ys.push_back(poly(x));
  }
  const NaturalCubicSpline cubic(xs, ys);
  double cubic_rel = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) cubic_rel = std::max(cubic_rel, std::abs(cubic(xs[i]) - ys[i]) / std::abs(ys[i]));
  for (double x = 100.5; x < 400.0; x += 1.0) cubic_rel = std::max(cubic_rel, std::abs(cubic(x) - poly(x)) / std::abs(poly(x)));
  v.require(cubic_rel <= 1e-6, "cubic spline relative error " + std::to_string(cubic_rel));
  v.note("spline max error linear " + fmt(lin_err * 1e12, 2) + "e-12, cubic rel " + fmt(cubic_rel * 1e9, 2) + "e-9");

  // (d) energy against direct summation.
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 r(seed);
    dsp::AudioBuffer a;
    a.samples.resize(640 + r() % 20000);
    for (auto& s : a.samples) s = static_cast<int16_t>(static_cast<int>(r() % 65536) - 32768);
    std::vector<double> naive;
    for (size_t start = 0; start < a.size(); start += 160) {
      double sum = 0.0;
      for (size_t i = 0; i < 640; ++i) {
        const double x = start + i < a.size() ? a.samples[start + i] / 32768.0 : 0.0;
        sum += x * x;
      }
      naive.push_back(std::sqrt(sum / 640.0));
    }
    v.require(dsp::extract_energy(a) == naive, "energy differs from direct summation (seed " + std::to_string(seed) + ")");
  }
}

transport::Bytes random_payload(std::mt19937_64& rng, size_t n) {
  transport::Bytes b(n);
  for (auto& x : b) x = static_cast<uint8_t>(rng());
  return b;
}

void protocol_properties(Verdict& v) {
  using namespace semcodec::transport;
  // Header round trip over field boundaries.
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
              const PacketHeader h{kProtocolVersion, t, pr, flags, seq, ts, has_length_field(t) ? len : uint16_t{0}};
              const auto bytes = build_header(h);
              v.require(bytes.size() == h.size() && parse_header(bytes) == h, "header round trip failed");
              ++cases;
            }
  v.note(std::to_string(cases) + " header cases");

  // Priority safety over randomized schedules.
  size_t dispatches = 0;
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 rng(seed);
    Link link({0.02 * static_cast<double>(rng() % 4), 0.05 * static_cast<double>(rng() % 3),
               static_cast<uint32_t>(1 + rng() % 6), seed},
              {8, 1, true, 16 + rng() % 48, 5'000'000});
    const size_t n = 20 + rng() % 60;
    for (size_t i = 0; i < n; ++i) {
      const auto t = kAllPacketTypes[rng() % 5];
      link.submit({t, static_cast<uint32_t>(i * 10), random_payload(rng, 1 + rng() % 40)}, rng() % 200);
    }
    link.run();
    for (const auto& r : link.trace_records()) {
      if (r.event != "dispatch") continue;
      ++dispatches;
      if (r.priority == Priority::low)
        v.require(r.queued[0] + r.queued[1] == 0, "LOW dispatched over queued HIGH/MEDIUM (seed " + std::to_string(seed) + ")");
      if (r.priority == Priority::medium)
        v.require(r.queued[0] == 0, "MEDIUM dispatched over queued HIGH (seed " + std::to_string(seed) + ")");
    }
  }
  v.note(std::to_string(dispatches) + " dispatches over 1000 schedules");

  // Deterministic replay of whole sessions.
  const auto& u = fixture().utts[7];
  const auto cfg = presets::balanced();
  auto session = [&](uint64_t seed) {
    SessionOptions opt;
    opt.channel.ber = 0.01;
    opt.channel.seed = seed;
    TranscriptReplayStt stt(u.transcript);
    return encode_session(u.audio, stt, u.embedding, cfg, opt);
  };
  const auto a = session(77), b = session(77);
  v.require(serialize_capture(a.capture) == serialize_capture(b.capture), "captures differ for equal seeds");
  v.require(a.report.to_json().dump() == b.report.to_json().dump(), "reports differ for equal seeds");
  v.require(a.report.csv_row() == b.report.csv_row(), "CSV reports differ for equal seeds");
  v.require(a.trace_text == b.trace_text, "traces differ for equal seeds");
}

void round_trip(Verdict& v) {
  size_t sessions = 0, keyframes = 0;
  for (const auto& mode : preset_names()) {
    const auto cfg = *preset(mode);
    prosody::ProsodyEntropyCoder coder(cfg);
    for (const auto& u : fixture().utts) {
      const std::string where = mode + " " + u.id;
      TranscriptReplayStt stt(u.transcript);
      const auto r = encode_session(u.audio, stt, u.embedding, cfg);
      const auto m = decode_session(r.capture, cfg);
      ++sessions;
      v.require(m.gaps.empty() && m.utterances.size() == r.sent_texts.size(), where + ": chunk count differs");
      for (size_t i = 0; i < std::min(m.utterances.size(), r.sent_texts.size()); ++i)
        v.require(m.utterances[i].text == r.sent_texts[i], where + ": text differs in chunk " + std::to_string(i));
      v.require(r.sender_dictionary.window() == r.receiver_dictionary.window() &&
                    r.sender_dictionary.version() == r.receiver_dictionary.version(),
                where + ": dictionary states differ");
      v.require(r.received_keyframes.size() == r.sent_keyframes.size(), where + ": keyframe count differs");
      for (size_t k = 0; k < std::min(r.sent_keyframes.size(), r.received_keyframes.size()); ++k) {
        const auto& s = r.sent_keyframes[k];
        const auto& g = r.received_keyframes[k];
        ++keyframes;
        v.require(g.timestamp_cs == s.timestamp_cs, where + ": keyframe timestamp differs");
        for (Feature f : kAllFeatures) {
          if (!coder.carries(f, s.codes.voiced)) continue;
          const int fi = static_cast<int>(f);
          v.require(std::abs(g.values.values[fi] - s.values.values[fi]) <= s.error_bound[fi] + 1e-9,
                    where + ": keyframe " + std::to_string(k) + " " + to_string(f) + " exceeds its bound");
        }
      }
      v.require(m.to_json() == r.manifest.to_json(), where + ": capture replay differs from the live receiver");
    }
  }
  v.note(std::to_string(sessions) + " sessions, " + std::to_string(keyframes) + " keyframes");
}

void performance(Verdict& v) {
  std::string text;
  for (const auto& u : fixture().utts) {
    text += (text.empty() ? "" : " ") + u.transcript;
    if (text.size() > 900) break;
  }
  const auto audio = synthesize_utterance(text, default_speakers()[0], 99);
  v.require(audio.duration_s() >= 60.0, "fixture audio is only " + fmt(audio.duration_s(), 1) + " s");
  const auto emb = timbre::synthetic_embedding(4);
  const auto t0 = Clock::now();
  TranscriptReplayStt stt(text);
  const auto r = encode_session(audio, stt, emb, presets::balanced());
  ManifestTts tts;
  tts.synthesize(decode_session(r.capture, presets::balanced()));
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  v.require(secs < 6.0, "took " + fmt(secs, 2) + " s");
  v.require(text_intact(r), "text not intact");
  v.note(fmt(audio.duration_s(), 1) + " s audio in " + fmt(secs, 2) + " s");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;  // 0: no runtime limit
    std::function<void(Verdict&)> run;
  };
  const std::vector<Criterion> criteria{
      {"prosody bitrate per mode", 60.0, prosody_bitrate},
      {"text bitrate", 60.0, text_bitrate},
      {"timbre arithmetic", 0.0, timbre_arithmetic},
      {"keyframe-rate sweep trend", 120.0, sweep_trend},
      {"noise resilience", 180.0, noise_resilience},
      {"codec correctness", 0.0, codec_properties},
      {"protocol properties", 0.0, protocol_properties},
      {"end-to-end round trip", 0.0, round_trip},
      {"performance budget", 0.0, performance},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    Verdict v;
    const auto t0 = Clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.budget_s > 0.0) v.require(secs < c.budget_s, "runtime " + fmt(secs, 1) + " s over budget");
    if (!v.passed()) ++failed;
    std::printf("%s %zu %s (%.1f s): %s\n", v.passed() ? "PASS" : "FAIL", i + 1, c.name, secs, v.detail().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
