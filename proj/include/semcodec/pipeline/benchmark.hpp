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


// Corpus-level experiments: the per-mode bitrate table across channel
// conditions, and the keyframe-rate sweep.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "semcodec/config.hpp"
#include "semcodec/pipeline/corpus.hpp"
#include "semcodec/pipeline/session.hpp"

namespace semcodec::pipeline {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

inline MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) return {};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

/// One session's outcome inside an experiment.
struct UtteranceRecord {
  std::string id;
  std::string mode;
  double ber = 0.0;
  transport::BitrateReport report;
  bool text_intact = false;  // every sent chunk delivered, identical, in order
  uint64_t retransmissions = 0;
  double delta_survival = 1.0;
  size_t prosody_frames = 0;
};

/// Loaded corpus entry, so that audio is read once per experiment.
struct LoadedUtterance {
  std::string id;
  dsp::AudioBuffer audio;
  std::string transcript;
  timbre::TimbreEmbedding embedding;
};

inline std::vector<LoadedUtterance> load_utterances(const Corpus& corpus) {
  std::vector<LoadedUtterance> out;
  out.reserve(corpus.entries.size());
  for (const auto& e : corpus.entries)
    out.push_back({e.id, dsp::read_audio(e.wav_path), read_text_file(e.transcript_path),
                   timbre::load_embedding(e.embedding_path)});
  return out;
}

inline bool text_intact(const SessionResult& r) {
  if (!r.manifest.gaps.empty() || r.manifest.utterances.size() != r.sent_texts.size()) return false;
  for (size_t i = 0; i < r.sent_texts.size(); ++i)
    if (r.manifest.utterances[i].text != r.sent_texts[i]) return false;
  return true;
}

/// Seed for one (experiment seed, utterance, channel) cell.
inline uint64_t cell_seed(uint64_t seed, size_t utterance, size_t channel) {
  uint64_t x = seed ^ (0x9E3779B97F4A7C15ull * (utterance + 1)) ^ (0xC2B2AE3D27D4EB4Full * (channel + 1));
  x ^= x >> 31;
  x *= 0xBF58476D1CE4E5B9ull;
  return x ^ (x >> 29);
}

inline Analysis analyze_replay(const LoadedUtterance& u, const QualityModeConfig& cfg) {
  TranscriptReplayStt stt(u.transcript);
  return analyze(u.audio, stt, cfg);
}

inline UtteranceRecord run_utterance(const LoadedUtterance& u, const Analysis& analysis, const QualityModeConfig& cfg,
                                     const transport::ChannelModel& channel) {
  SessionOptions opt;
  opt.channel = channel;
  const SessionResult r = encode_session(u.audio, analysis, u.embedding, cfg, opt);
  return {u.id,
          cfg.mode_name,
          channel.ber,
          r.report,
          text_intact(r),
          r.delivery.retransmissions(),
          r.delivery.delta_survival(),
          r.manifest.prosody.size()};
}

struct BenchRow {
  std::string mode;
  double ber = 0.0;
  size_t utterances = 0;
  MeanStd text_bps, prosody_bps, timbre_bps, total_excl_timbre_bps, total_bps, wire_bps, overhead_fraction;
  double text_delivery = 0.0;  // fraction of sessions with intact text
  MeanStd retransmissions;
  MeanStd delta_survival;
};

struct BenchTable {
  std::vector<BenchRow> rows;
  std::vector<UtteranceRecord> utterances;  // ordered by (mode, ber, id)
  std::vector<std::string> missing;

  bool empty() const { return rows.empty(); }

  const BenchRow* find(const std::string& mode, double ber) const {
    for (const auto& r : rows)
      if (r.mode == mode && r.ber == ber) return &r;
    return nullptr;
  }

  nlohmann::json to_json() const {
    using nlohmann::json;
    auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
    json rows_j = json::array();
    for (const auto& r : rows)
      rows_j.push_back({{"mode", r.mode},
                        {"ber", r.ber},
                        {"utterances", r.utterances},
                        {"text_bps", ms(r.text_bps)},
                        {"prosody_bps", ms(r.prosody_bps)},
                        {"timbre_bps", ms(r.timbre_bps)},
                        {"total_excl_timbre_bps", ms(r.total_excl_timbre_bps)},
                        {"total_bps", ms(r.total_bps)},
                        {"wire_bps", ms(r.wire_bps)},
                        {"header_overhead_fraction", ms(r.overhead_fraction)},
                        {"text_delivery", r.text_delivery},
                        {"retransmissions", ms(r.retransmissions)},
                        {"delta_survival", ms(r.delta_survival)}});
    return {{"rows", rows_j}, {"missing", missing}};
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "mode,ber,utterances,text_bps,text_std,prosody_bps,prosody_std,timbre_bps,timbre_std,"
           "total_excl_timbre_bps,total_excl_timbre_std,total_bps,total_std,wire_bps,wire_std,"
           "header_overhead_fraction,text_delivery,retransmissions,delta_survival\n";
    for (const auto& r : rows)
      out << r.mode << ',' << r.ber << ',' << r.utterances << ',' << r.text_bps.mean << ',' << r.text_bps.std << ','
          << r.prosody_bps.mean << ',' << r.prosody_bps.std << ',' << r.timbre_bps.mean << ',' << r.timbre_bps.std
          << ',' << r.total_excl_timbre_bps.mean << ',' << r.total_excl_timbre_bps.std << ',' << r.total_bps.mean
          << ',' << r.total_bps.std << ',' << r.wire_bps.mean << ',' << r.wire_bps.std << ','
          << r.overhead_fraction.mean << ',' << r.text_delivery << ',' << r.retransmissions.mean << ','
          << r.delta_survival.mean << '\n';
    return out.str();
  }

  /// Per-utterance rows for external plotting.
  std::string utterances_csv() const {
    std::ostringstream out;
    out << "id,mode,ber," << transport::BitrateReport::csv_header() << ",text_intact,retransmissions,delta_survival\n";
    for (const auto& u : utterances)
      out << u.id << ',' << u.mode << ',' << u.ber << ',' << u.report.csv_row() << ',' << (u.text_intact ? 1 : 0)
          << ',' << u.retransmissions << ',' << u.delta_survival << '\n';
    return out.str();
  }
};

inline BenchRow summarize(const std::string& mode, double ber, const std::vector<UtteranceRecord>& recs) {
  BenchRow row;
  row.mode = mode;
  row.ber = ber;
  row.utterances = recs.size();
  auto col = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : recs) v.push_back(get(r));
    return mean_std(v);
  };
  row.text_bps = col([](const auto& r) { return r.report.text_bps; });
  row.prosody_bps = col([](const auto& r) { return r.report.prosody_bps; });
  row.timbre_bps = col([](const auto& r) { return r.report.timbre_bps; });
  row.total_excl_timbre_bps = col([](const auto& r) { return r.report.total_excl_timbre_bps; });
  row.total_bps = col([](const auto& r) { return r.report.total_bps; });
  row.wire_bps = col([](const auto& r) { return r.report.wire_bps; });
  row.overhead_fraction = col([](const auto& r) { return r.report.header_overhead_fraction; });
  row.retransmissions = col([](const auto& r) { return static_cast<double>(r.retransmissions); });
  row.delta_survival = col([](const auto& r) { return r.delta_survival; });
  row.text_delivery = col([](const auto& r) { return r.text_intact ? 1.0 : 0.0; }).mean;
  return row;
}

struct BenchOptions {
  std::vector<std::string> modes = preset_names();
  std::vector<double> bers = {0.0};
  uint64_t seed = 1;
  uint32_t rtt_ticks = 4;
};

/// Runs every (mode, BER) cell over the corpus. Entries with missing files
/// are listed and skipped; an empty corpus yields an empty table.
inline BenchTable run_benchmark(const Corpus& corpus, const BenchOptions& opt) {
  std::vector<QualityModeConfig> modes;
  for (const auto& m : opt.modes) modes.push_back(resolve_mode(m));
  for (double b : opt.bers)
    if (!(b >= 0.0 && b <= 1.0)) fail(ErrorKind::config, "benchmark: BER must lie in [0, 1]");

  BenchTable table;
  table.missing = corpus.missing;
  const auto utts = load_utterances(corpus);
  if (utts.empty()) return table;
  for (const auto& cfg : modes) {
    std::vector<Analysis> analyses;
    for (const auto& u : utts) analyses.push_back(analyze_replay(u, cfg));
    for (size_t c = 0; c < opt.bers.size(); ++c) {
      std::vector<UtteranceRecord> recs;
      for (size_t i = 0; i < utts.size(); ++i) {
        transport::ChannelModel ch;
        ch.ber = opt.bers[c];
        ch.rtt_ticks = opt.rtt_ticks;
        ch.seed = cell_seed(opt.seed, i, c);
        recs.push_back(run_utterance(utts[i], analyses[i], cfg, ch));
      }
      std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
      table.rows.push_back(summarize(cfg.mode_name, opt.bers[c], recs));
      table.utterances.insert(table.utterances.end(), recs.begin(), recs.end());
    }
  }
  return table;
}

/// Least-squares line y = a + b x and its coefficient of determination.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::precondition, "linear fit needs two or more points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) fail(ErrorKind::precondition, "linear fit needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return f;
}

struct SweepRow {
  double rate_hz = 0.0;
  MeanStd prosody_bps;
  MeanStd total_bps;  // including amortized timbre
  double mean_bits_per_keyframe = 0.0;
  /// f_k times the mean payload bits per keyframe, averaged over the
  /// utterances long enough to hold five keyframe intervals.
  double predicted_bps = 0.0;
  double measured_long_bps = 0.0;
  size_t long_utterances = 0;
  double relative_error() const {
    return predicted_bps > 0.0 ? std::abs(measured_long_bps - predicted_bps) / predicted_bps : 0.0;
  }
  bool analytic_applicable() const { return long_utterances > 0; }
};

struct SweepTable {
  std::string mode;
  std::vector<SweepRow> rows;
  LinearFit prosody_fit;
  bool total_strictly_increasing = false;
  std::vector<std::string> missing;

  nlohmann::json to_json() const {
    using nlohmann::json;
    json rows_j = json::array();
    for (const auto& r : rows)
      rows_j.push_back({{"rate_hz", r.rate_hz},
                        {"prosody_bps", {{"mean", r.prosody_bps.mean}, {"std", r.prosody_bps.std}}},
                        {"total_bps", {{"mean", r.total_bps.mean}, {"std", r.total_bps.std}}},
                        {"mean_bits_per_keyframe", r.mean_bits_per_keyframe},
                        {"predicted_bps", r.predicted_bps},
                        {"measured_long_bps", r.measured_long_bps},
                        {"long_utterances", r.long_utterances},
                        {"relative_error", r.relative_error()}});
    return {{"mode", mode},
            {"rows", rows_j},
            {"summary",
             {{"total_strictly_increasing", total_strictly_increasing},
              {"prosody_r_squared", prosody_fit.r_squared},
              {"prosody_slope_bits_per_keyframe", prosody_fit.slope},
              {"prosody_intercept_bps", prosody_fit.intercept}}},
            {"missing", missing}};
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "rate_hz,prosody_bps,prosody_std,total_bps,total_std,mean_bits_per_keyframe,predicted_bps,"
           "measured_long_bps,relative_error\n";
    for (const auto& r : rows)
      out << r.rate_hz << ',' << r.prosody_bps.mean << ',' << r.prosody_bps.std << ',' << r.total_bps.mean << ','
          << r.total_bps.std << ',' << r.mean_bits_per_keyframe << ',' << r.predicted_bps << ','
          << r.measured_long_bps << ',' << r.relative_error() << '\n';
    return out.str();
  }
};

inline void validate_sweep_rate(double f) {
  if (!(f > 0.0 && f <= kProsodyFrameRateHz))
    fail(ErrorKind::config, "sweep: keyframe rate must lie in (0, 100] Hz, got " + std::to_string(f));
}

/// Re-encodes the corpus at each keyframe rate over a clean channel.
inline SweepTable run_prosody_sweep(const Corpus& corpus, const std::vector<double>& rates,
                                    const QualityModeConfig& base = presets::balanced()) {
  if (rates.empty()) fail(ErrorKind::config, "sweep: no keyframe rates given");
  for (double f : rates) validate_sweep_rate(f);
  SweepTable table;
  table.mode = base.mode_name;
  table.missing = corpus.missing;
  const auto utts = load_utterances(corpus);
  if (utts.empty()) return table;

  std::vector<Analysis> analyses;
  for (const auto& u : utts) analyses.push_back(analyze_replay(u, base));
  for (double f : rates) {
    QualityModeConfig cfg = base;
    cfg.keyframe_rate_hz = f;
    SweepRow row;
    row.rate_hz = f;
    std::vector<double> prosody, total;
    double bits = 0.0, keyframes = 0.0, long_measured = 0.0, long_bits = 0.0, long_keyframes = 0.0;
    for (size_t i = 0; i < utts.size(); ++i) {
      const auto& u = utts[i];
      const SessionResult r = encode_session(u.audio, analyses[i], u.embedding, cfg);
      prosody.push_back(r.report.prosody_bps);
      total.push_back(r.report.total_bps);
      double b = 0.0;
      for (const auto& k : r.sent_keyframes) b += static_cast<double>(k.bits.bit_count);
      bits += b;
      keyframes += static_cast<double>(r.sent_keyframes.size());
      if (u.audio.duration_s() >= 5.0 / f) {
        ++row.long_utterances;
        long_measured += r.report.prosody_bps;
        long_bits += b;
        long_keyframes += static_cast<double>(r.sent_keyframes.size());
      }
    }
    row.prosody_bps = mean_std(prosody);
    row.total_bps = mean_std(total);
    row.mean_bits_per_keyframe = keyframes > 0 ? bits / keyframes : 0.0;
    if (row.long_utterances) {
      row.measured_long_bps = long_measured / static_cast<double>(row.long_utterances);
      row.predicted_bps = f * long_bits / long_keyframes;
    }
    table.rows.push_back(row);
  }

  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    x.push_back(r.rate_hz);
    y.push_back(r.prosody_bps.mean);
  }
  table.total_strictly_increasing = true;
  auto sorted = table.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.rate_hz < b.rate_hz; });
  for (size_t i = 1; i < sorted.size(); ++i)
    if (!(sorted[i].total_bps.mean > sorted[i - 1].total_bps.mean)) table.total_strictly_increasing = false;
  if (x.size() >= 2) table.prosody_fit = linear_fit(x, y);
  return table;
}

}  // namespace semcodec::pipeline
