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


// Command-line front end: encode, decode, bench, sweep, gen-corpus,
// extract-prosody, export-codebook.
//
// Exit codes: 0 success, 1 other failure, 2 configuration, 3 unreadable or
// malformed input, 4 adapter failure, 5 adapter protocol violation, 6 empty
// corpus, 64 command-line usage.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semcodec/config.hpp"
#include "semcodec/dsp/audio.hpp"
#include "semcodec/dsp/prosody_track.hpp"
#include "semcodec/error.hpp"
#include "semcodec/pipeline/adapters.hpp"
#include "semcodec/pipeline/benchmark.hpp"
#include "semcodec/pipeline/corpus.hpp"
#include "semcodec/pipeline/session.hpp"
#include "semcodec/pipeline/subprocess.hpp"
#include "semcodec/pipeline/training.hpp"
#include "semcodec/timbre/embedding.hpp"
#include "semcodec/transport/capture.hpp"

namespace {

using namespace semcodec;
namespace fs = std::filesystem;

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitAdapter = 4;
constexpr int kExitProtocol = 5;
constexpr int kExitEmptyCorpus = 6;
constexpr int kExitUsage = 64;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return kExitConfig;
    case ErrorKind::input:
    case ErrorKind::decode: return kExitInput;
    case ErrorKind::adapter: return kExitAdapter;
    case ErrorKind::protocol: return kExitProtocol;
    default: return kExitOther;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::input, "cannot write " + path.string());
  out << text;
}

struct EncodeArgs {
  std::string in, transcript, embedding, mode = "balanced", out, stt_cmd, report, report_csv, trace, manifest;
  double ber = 0.0, drop = 0.0;
  uint64_t seed = 1;
  uint32_t rtt = 4;
  bool streaming = false, piggyback = false;
  int timeout_ms = 10000;
};

int run_encode(const EncodeArgs& a) {
  auto cfg = resolve_mode(a.mode);
  if (a.streaming) cfg.push_to_talk = false;
  if (a.piggyback) cfg.piggyback_keyframes = true;
  const auto audio = dsp::read_audio(a.in);
  const auto embedding = timbre::load_embedding(a.embedding);
  std::unique_ptr<pipeline::SttAdapter> stt;
  if (!a.stt_cmd.empty())
    stt = std::make_unique<pipeline::SubprocessStt>(a.stt_cmd, std::chrono::milliseconds(a.timeout_ms));
  else if (!a.transcript.empty())
    stt = std::make_unique<pipeline::TranscriptReplayStt>(pipeline::read_text_file(a.transcript));
  else
    fail(ErrorKind::config, "encode: give --transcript or --stt-cmd");

  pipeline::SessionOptions opt;
  opt.channel = {a.ber, a.drop, a.rtt, a.seed};
  opt.channel.validate();
  const auto r = pipeline::encode_session(audio, *stt, embedding, cfg, opt);
  transport::write_capture(a.out, r.capture);
  nlohmann::json summary = {{"mode", cfg.mode_name},
                            {"capture", a.out},
                            {"frames", r.capture.frames.size()},
                            {"report", r.report.to_json()},
                            {"delivery", r.delivery.to_json()}};
  if (!a.report.empty()) write_text(a.report, summary.dump(2) + "\n");
  if (!a.report_csv.empty())
    write_text(a.report_csv, transport::BitrateReport::csv_header() + "\n" + r.report.csv_row() + "\n");
  if (!a.trace.empty()) write_text(a.trace, r.trace_text);
  if (!a.manifest.empty()) r.manifest.write(a.manifest);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct DecodeArgs {
  std::string in, out, mode, tts_cmd;
  int timeout_ms = 10000;
};

int run_decode(const DecodeArgs& a) {
  const auto capture = transport::read_capture(a.in);
  const auto cfg = a.mode.empty() ? pipeline::capture_mode(capture) : resolve_mode(a.mode);
  const auto manifest = pipeline::decode_session(capture, cfg);
  std::unique_ptr<pipeline::TtsAdapter> tts;
  if (!a.tts_cmd.empty())
    tts = std::make_unique<pipeline::SubprocessTts>(a.tts_cmd, std::chrono::milliseconds(a.timeout_ms));
  else
    tts = std::make_unique<pipeline::ManifestTts>(a.out);
  const auto status = tts->synthesize(manifest);
  std::cout << nlohmann::json{{"mode", manifest.mode},
                              {"utterances", manifest.utterances.size()},
                              {"gaps", manifest.gaps.size()},
                              {"prosody_frames", manifest.prosody.size()},
                              {"timbre", manifest.timbre_state},
                              {"synthesis", status}}
                   .dump(2)
            << "\n";
  return 0;
}

struct BenchArgs {
  std::string corpus, out, csv, plot_csv;
  std::vector<std::string> modes = preset_names();
  std::vector<double> bers = {0.0};
  uint64_t seed = 1;
};

void report_missing(const std::vector<std::string>& missing) {
  for (const auto& id : missing) std::cerr << "missing corpus entry: " << id << "\n";
}

int run_bench(const BenchArgs& a) {
  const auto corpus = pipeline::load_corpus(a.corpus);
  pipeline::BenchOptions opt;
  opt.modes = a.modes;
  opt.bers = a.bers;
  opt.seed = a.seed;
  const auto table = pipeline::run_benchmark(corpus, opt);
  report_missing(table.missing);
  if (!a.out.empty()) write_text(a.out, table.to_json().dump(2) + "\n");
  if (!a.csv.empty()) write_text(a.csv, table.to_csv());
  if (!a.plot_csv.empty()) write_text(a.plot_csv, table.utterances_csv());
  std::cout << table.to_csv();
  if (table.empty()) {
    std::cerr << "bench: corpus has no usable entries\n";
    return kExitEmptyCorpus;
  }
  return 0;
}

struct SweepArgs {
  std::string corpus, out, csv, mode = "balanced";
  std::vector<double> rates = {0.05, 0.1, 0.5, 1, 5, 20};
};

int run_sweep(const SweepArgs& a) {
  const auto corpus = pipeline::load_corpus(a.corpus);
  const auto table = pipeline::run_prosody_sweep(corpus, a.rates, resolve_mode(a.mode));
  report_missing(table.missing);
  if (!a.out.empty()) write_text(a.out, table.to_json().dump(2) + "\n");
  if (!a.csv.empty()) write_text(a.csv, table.to_csv());
  std::cout << table.to_csv();
  std::cout << "total strictly increasing: " << (table.total_strictly_increasing ? "yes" : "no")
            << ", prosody R^2 = " << table.prosody_fit.r_squared << "\n";
  if (table.rows.empty() || corpus.entries.empty()) {
    std::cerr << "sweep: corpus has no usable entries\n";
    return kExitEmptyCorpus;
  }
  return 0;
}

struct GenArgs {
  std::string out, source;
  size_t utterances = 20;
  uint64_t seed = 2026;
};

int run_gen(const GenArgs& a) {
  pipeline::CorpusOptions opt;
  opt.utterances = a.utterances;
  opt.seed = a.seed;
  const fs::path source = a.source.empty() ? pipeline::default_transcript_source() : fs::path(a.source);
  const auto manifest = pipeline::generate_corpus(a.out, pipeline::read_lines(source), opt);
  std::cout << manifest.string() << "\n";
  return 0;
}

struct ExtractArgs {
  std::string in, out;
};

int run_extract(const ExtractArgs& a) {
  const auto raw = dsp::extract_raw_prosody(dsp::read_audio(a.in));
  dsp::SpeakerStats stats;
  try {
    stats = dsp::estimate_speaker_stats(raw);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::precondition) throw;
    std::cerr << "extract-prosody: " << e.what() << "; using fallback statistics\n";
    stats = dsp::fallback_stats(raw);
  }
  const auto track = dsp::normalize_track(raw, stats);
  if (a.out.empty()) {
    dsp::write_track_csv(std::cout, track);
  } else {
    std::ofstream out(a.out);
    if (!out) fail(ErrorKind::input, "cannot write " + a.out);
    dsp::write_track_csv(out, track);
  }
  return 0;
}

struct ExportArgs {
  std::string out;
  size_t utterances = 40;
  uint64_t seed = 7;
};

int run_export(const ExportArgs& a) {
  const auto fits = pipeline::fit_codebook_models({a.utterances, a.seed});
  std::printf("%-13s %-7s %4s %8s %8s %8s\n", "mode", "feature", "bits", "samples", "p_zero", "scale");
  for (const auto& m : fits)
    std::printf("%-13s %-7s %4d %8zu %8.3f %8.3f\n", m.mode.c_str(), to_string(m.feature), m.bits, m.samples,
                m.model.p_zero, m.model.scale);
  if (!a.out.empty()) {
    pipeline::write_codebooks(a.out, fits);
    std::cout << "codebooks written to " << a.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semcodec: semantic voice codec toolkit"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* e = app.add_subcommand("encode", "Encode audio into a bitstream capture over a simulated channel");
  e->add_option("--in", enc.in, "Input WAV or raw 16 kHz PCM")->required();
  e->add_option("--transcript", enc.transcript, "Reference transcript for the replay recognizer");
  e->add_option("--embedding", enc.embedding, "Speaker embedding (raw float32 or JSON array)")->required();
  e->add_option("--mode", enc.mode, "Preset name or YAML config path")->capture_default_str();
  e->add_option("--out", enc.out, "Capture file to write")->required();
  e->add_option("--ber", enc.ber, "Channel bit error rate")->capture_default_str();
  e->add_option("--drop", enc.drop, "Channel packet drop rate")->capture_default_str();
  e->add_option("--seed", enc.seed, "Channel seed")->capture_default_str();
  e->add_option("--rtt", enc.rtt, "Acknowledgement round trip in 10 ms ticks")->capture_default_str();
  e->add_flag("--streaming", enc.streaming, "Chunk text per VAD segment instead of push-to-talk");
  e->add_flag("--piggyback", enc.piggyback, "Carry absolute prosody keyframes inside TEXT packets");
  e->add_option("--stt-cmd", enc.stt_cmd, "Recognizer subprocess command (line-delimited JSON)");
  e->add_option("--timeout-ms", enc.timeout_ms, "Adapter response timeout")->capture_default_str();
  e->add_option("--report", enc.report, "Write the bitrate report as JSON");
  e->add_option("--report-csv", enc.report_csv, "Write the bitrate report as CSV");
  e->add_option("--trace", enc.trace, "Write the transport trace");
  e->add_option("--manifest", enc.manifest, "Write the live receiver's manifest");

  DecodeArgs dec;
  auto* d = app.add_subcommand("decode", "Replay a capture and emit a reconstruction manifest");
  d->add_option("--in", dec.in, "Capture file")->required();
  d->add_option("--out", dec.out, "Manifest JSON to write");
  d->add_option("--mode", dec.mode, "Override the mode named in the capture");
  d->add_option("--tts-cmd", dec.tts_cmd, "Synthesizer subprocess command (line-delimited JSON)");
  d->add_option("--timeout-ms", dec.timeout_ms, "Adapter response timeout")->capture_default_str();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Per-mode bitrate table over a corpus and channel conditions");
  b->add_option("--corpus", bench.corpus, "Corpus manifest CSV or its directory")->required();
  b->add_option("--modes", bench.modes, "Modes to run")->delimiter(',')->capture_default_str();
  b->add_option("--ber", bench.bers, "Bit error rates")->delimiter(',')->capture_default_str();
  b->add_option("--seed", bench.seed, "Experiment seed")->capture_default_str();
  b->add_option("--out", bench.out, "Write the table as JSON");
  b->add_option("--csv", bench.csv, "Write the table as CSV");
  b->add_option("--plot-csv", bench.plot_csv, "Write per-utterance rows as CSV");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "Bitrate against prosody keyframe rate");
  s->add_option("--corpus", sweep.corpus, "Corpus manifest CSV or its directory")->required();
  s->add_option("--rates", sweep.rates, "Keyframe rates in Hz")->delimiter(',')->capture_default_str();
  s->add_option("--mode", sweep.mode, "Base mode")->capture_default_str();
  s->add_option("--out", sweep.out, "Write the sweep as JSON");
  s->add_option("--csv", sweep.csv, "Write the sweep as CSV");

  GenArgs gen;
  auto* g = app.add_subcommand("gen-corpus", "Generate a synthetic fixture corpus");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--utterances", gen.utterances, "Number of utterances")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generation seed")->capture_default_str();
  g->add_option("--source", gen.source, "Transcript source lines (defaults to the shipped text)");

  ExtractArgs ext;
  auto* x = app.add_subcommand("extract-prosody", "Export the normalized 100 Hz prosody track as CSV");
  x->add_option("--in", ext.in, "Input WAV or raw 16 kHz PCM")->required();
  x->add_option("--out", ext.out, "CSV to write (stdout if omitted)");

  ExportArgs exp;
  auto* c = app.add_subcommand("export-codebook", "Refit the prosody codebook models and optionally write them");
  c->add_option("--out", exp.out, "Directory for <feature>_<bits>.txt codebooks");
  c->add_option("--utterances", exp.utterances, "Training utterances")->capture_default_str();
  c->add_option("--seed", exp.seed, "Training corpus seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h);
  } catch (const CLI::CallForAllHelp& h) {
    return app.exit(h);
  } catch (const CLI::ParseError& p) {
    app.exit(p);
    return kExitUsage;
  }

  try {
    if (*e) return run_encode(enc);
    if (*d) return run_decode(dec);
    if (*b) return run_bench(bench);
    if (*s) return run_sweep(sweep);
    if (*g) return run_gen(gen);
    if (*x) return run_extract(ext);
    if (*c) return run_export(exp);
  } catch (const Error& err) {
    std::cerr << "semcodec: " << to_string(err.kind()) << " error: " << err.what() << "\n";
    return exit_code(err.kind());
  } catch (const std::exception& err) {
    std::cerr << "semcodec: " << err.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
