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

// Static canonical Huffman codebooks for quantized prosody deltas.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "semcodec/config.hpp"
#include "semcodec/prosody/bit_io.hpp"
#include "semcodec/prosody/quantizer.hpp"

namespace semcodec::prosody {

/// Bumped whenever the training distribution or construction changes; both
/// ends must agree on it.
inline constexpr int kCodebookVersion = 1;
inline constexpr int kMaxCodeLength = 32;

/// Canonical prefix code over the symmetric alphabet [-max_code, max_code].
class HuffmanCodebook {
 public:
  HuffmanCodebook() = default;

  /// Builds a canonical code from per-symbol code lengths; lengths[i] is the
  /// length for symbol (i - max_code). Throws ErrorKind::config when the
  /// lengths do not form a complete prefix code.
  HuffmanCodebook(int max_code, std::vector<int> lengths)
      : max_code_(max_code), lengths_(std::move(lengths)) {
    if (max_code_ < 1 || lengths_.size() != alphabet_size())
      fail(ErrorKind::config, "codebook: alphabet size mismatch");
    // Kraft sum must be exactly 1 for a complete code.
    long double kraft = 0.0L;
    for (int len : lengths_) {
      if (len < 1 || len > kMaxCodeLength) fail(ErrorKind::config, "codebook: code length out of range");
      kraft += std::ldexp(1.0L, -len);
    }
    if (std::abs(static_cast<double>(kraft - 1.0L)) > 1e-12)
      fail(ErrorKind::config, "codebook: lengths do not form a complete prefix code");

    // Canonical assignment: order by (length, symbol).
    order_.resize(lengths_.size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return lengths_[a] < lengths_[b]; });
    codes_.assign(lengths_.size(), 0);
    uint64_t code = 0;
    int prev_len = lengths_[order_[0]];
    first_code_.assign(kMaxCodeLength + 2, 0);
    first_index_.assign(kMaxCodeLength + 2, 0);
    count_.assign(kMaxCodeLength + 2, 0);
    for (size_t r = 0; r < order_.size(); ++r) {
      const int len = lengths_[order_[r]];
      if (r > 0) code = (code + 1) << (len - prev_len);
      if (count_[len] == 0) {
        first_code_[len] = code;
        first_index_[len] = r;
      }
      ++count_[len];
      codes_[order_[r]] = static_cast<uint32_t>(code);
      prev_len = len;
    }
  }

  int max_code() const { return max_code_; }
  size_t alphabet_size() const { return static_cast<size_t>(2 * max_code_ + 1); }
  int length(int symbol) const { return lengths_.at(index_of(symbol)); }
  uint32_t codeword(int symbol) const { return codes_.at(index_of(symbol)); }
  const std::vector<int>& lengths() const { return lengths_; }

  void encode(int symbol, BitWriter& w) const {
    if (symbol < -max_code_ || symbol > max_code_)
      fail(ErrorKind::precondition, "codebook: symbol outside alphabet");
    const size_t i = index_of(symbol);
    w.write_bits(codes_[i], lengths_[i]);
  }

  /// Canonical decode; throws ErrorKind::decode on truncation.
  int decode(BitReader& r) const {
    uint64_t code = 0;
    for (int len = 1; len <= kMaxCodeLength; ++len) {
      code = (code << 1) | (r.read_bit() ? 1u : 0u);
      if (count_[len] && code >= first_code_[len] && code - first_code_[len] < count_[len])
        return order_[first_index_[len] + (code - first_code_[len])] - max_code_;
    }
    fail(ErrorKind::decode, "codebook: invalid codeword");
  }

  /// Expected code length in bits under `probabilities` (same indexing).
  double mean_length(const std::vector<double>& probabilities) const {
    double sum = 0.0;
    for (size_t i = 0; i < lengths_.size(); ++i) sum += probabilities[i] * lengths_[i];
    return sum;
  }

  /// Text table: header line then one "symbol length" pair per line in
  /// canonical order.
  void write(std::ostream& out, Feature f, int bits) const {
    out << "# semcodec prosody codebook\n";
    out << "version " << kCodebookVersion << " feature " << to_string(f) << " bits " << bits
        << " max_code " << max_code_ << '\n';
    for (int idx : order_) out << (idx - max_code_) << ' ' << lengths_[idx] << '\n';
  }

  static HuffmanCodebook read(std::istream& in) {
    std::string line;
    int max_code = -1;
    std::vector<std::pair<int, int>> pairs;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      if (line.rfind("version", 0) == 0) {
        std::string key, feature;
        int version = 0, bits = 0;
        ls >> key >> version >> key >> feature >> key >> bits >> key >> max_code;
        if (!ls || version != kCodebookVersion)
          fail(ErrorKind::config, "codebook: unsupported version header");
        continue;
      }
      int sym = 0, len = 0;
      if (!(ls >> sym >> len)) fail(ErrorKind::config, "codebook: malformed line: " + line);
      pairs.emplace_back(sym, len);
    }
    if (max_code < 1) fail(ErrorKind::config, "codebook: missing header");
    std::vector<int> lengths(static_cast<size_t>(2 * max_code + 1), 0);
    for (auto [sym, len] : pairs) {
      if (sym < -max_code || sym > max_code) fail(ErrorKind::config, "codebook: symbol out of range");
      lengths[static_cast<size_t>(sym + max_code)] = len;
    }
    return HuffmanCodebook(max_code, std::move(lengths));
  }

  friend bool operator==(const HuffmanCodebook& a, const HuffmanCodebook& b) {
    return a.max_code_ == b.max_code_ && a.lengths_ == b.lengths_;
  }

 private:
  size_t index_of(int symbol) const { return static_cast<size_t>(symbol + max_code_); }

  int max_code_ = 0;
  std::vector<int> lengths_;
  std::vector<uint32_t> codes_;
  std::vector<int> order_;
  std::vector<uint64_t> first_code_;
  std::vector<size_t> first_index_;
  std::vector<uint64_t> count_;
};

/// Huffman code lengths for `weights` (all > 0). Ties are broken by the
/// smallest contained symbol index so construction is deterministic.
inline std::vector<int> huffman_lengths(const std::vector<double>& weights) {
  const size_t n = weights.size();
  if (n == 0) return {};
  if (n == 1) return {1};
  struct Node {
    double w;
    size_t min_leaf;
    int left, right;
  };
  std::vector<Node> nodes;
  nodes.reserve(2 * n);
  using Item = std::tuple<double, size_t, int>;  // weight, tie key, node id
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (size_t i = 0; i < n; ++i) {
    nodes.push_back({weights[i], i, -1, -1});
    heap.emplace(weights[i], i, static_cast<int>(i));
  }
  while (heap.size() > 1) {
    auto [wa, ka, a] = heap.top();
    heap.pop();
    auto [wb, kb, b] = heap.top();
    heap.pop();
    const size_t key = std::min(ka, kb);
    nodes.push_back({wa + wb, key, a, b});
    heap.emplace(wa + wb, key, static_cast<int>(nodes.size() - 1));
  }
  std::vector<int> lengths(n, 0);
  std::vector<std::pair<int, int>> stack{{std::get<2>(heap.top()), 0}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    const Node& nd = nodes[static_cast<size_t>(id)];
    if (nd.left < 0) {
      lengths[static_cast<size_t>(id)] = depth;
      continue;
    }
    stack.emplace_back(nd.left, depth + 1);
    stack.emplace_back(nd.right, depth + 1);
  }
  return lengths;
}

/// Parameters of the synthetic training distribution: probability `p_zero`
/// on code 0 and a Laplacian with scale `scale` (in feature value units)
/// over the nonzero codes. A probability floor bounds the deepest codeword.
struct TrainingModel {
  double p_zero = 0.5;
  double scale = 0.5;
  double floor = 1e-6;
};

/// Shipped training models per (feature, bit depth). Each was fitted with
/// fit_training_model() on inter-keyframe deltas of a synthetic training
/// corpus (40 utterances, seed 7, disjoint from the evaluation fixtures) at
/// the keyframe rate of the mode that uses that bit depth; bit depths no
/// preset uses share the balanced-mode fit. Regenerate with
/// `semcodec export-codebook`.
inline TrainingModel training_model(Feature f, int bits) {
  switch (f) {
    case Feature::pitch:
      if (bits == 3) return {0.020, 0.905, 1e-6};  // minimal, 0.1 Hz
      if (bits == 8) return {0.022, 1.254, 1e-6};  // high_quality, 1 Hz
      return {0.022, 1.339, 1e-6};                 // balanced, 0.5 Hz
    case Feature::energy:
      if (bits == 6) return {0.196, 0.442, 1e-6};
      return {0.228, 0.470, 1e-6};
    case Feature::rate:
      if (bits == 6) return {0.244, 1.994, 1e-6};
      return {0.221, 2.246, 1e-6};
  }
  return {};
}

/// Maximum-likelihood fit of the training model to raw deltas: `p_zero` is
/// the dead-zone fraction (floored at `min_p_zero` so code 0 stays cheap
/// enough for absolute restarts), `scale` the mean clamped magnitude of the
/// rest.
inline TrainingModel fit_training_model(const std::vector<double>& deltas, double dead_zone, double clamp,
                                        double min_p_zero = 0.02) {
  if (deltas.empty()) fail(ErrorKind::precondition, "fit_training_model: no deltas");
  size_t zeros = 0;
  double sum = 0.0;
  for (double d : deltas) {
    const double m = std::abs(d);
    if (m < dead_zone)
      ++zeros;
    else
      sum += std::min(m, clamp);
  }
  const size_t nonzero = deltas.size() - zeros;
  TrainingModel m;
  m.p_zero = std::max(min_p_zero, static_cast<double>(zeros) / static_cast<double>(deltas.size()));
  m.scale = nonzero ? std::max(sum / static_cast<double>(nonzero), 1e-3) : 1.0;
  return m;
}

/// Normalized training probabilities indexed by symbol + max_code.
inline std::vector<double> training_distribution(const QuantizerSpec& q, const TrainingModel& m) {
  const int mc = q.max_code();
  std::vector<double> p(static_cast<size_t>(2 * mc + 1), 0.0);
  double nonzero = 0.0;
  for (int c = 1; c <= mc; ++c) nonzero += 2.0 * std::exp(-(c - 0.5) * q.step() / m.scale);
  for (int c = -mc; c <= mc; ++c) {
    const double v = c == 0 ? m.p_zero
                            : (1.0 - m.p_zero) * std::exp(-(std::abs(c) - 0.5) * q.step() / m.scale) / nonzero;
    p[static_cast<size_t>(c + mc)] = std::max(v, m.floor);
  }
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

inline double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

inline HuffmanCodebook train_codebook(Feature f, int bits) {
  QuantizerSpec q{bits, 0.0, clamp_range(f)};
  return HuffmanCodebook(q.max_code(), huffman_lengths(training_distribution(q, training_model(f, bits))));
}

/// Process-wide shared codebook for (feature, bits); built once, immutable.
inline const HuffmanCodebook& prosody_codebook(Feature f, int bits) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, HuffmanCodebook> cache;
  std::lock_guard lock(mu);
  const auto key = std::make_pair(static_cast<int>(f), bits);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, train_codebook(f, bits)).first;
  return it->second;
}

}  // namespace semcodec::prosody
