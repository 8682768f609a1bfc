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

// Lossy transcript normalization applied before compression: punctuation
// minimization, filler removal and abbreviation substitution, driven by
// per-language table files.

#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semcodec/data_dir.hpp"
#include "semcodec/error.hpp"

namespace semcodec::text {

namespace detail {

inline bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '\'' || c == '%' || c == '&';
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower_ascii(char c) { return c >= 'a' && c <= 'z'; }

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
}

inline bool is_mark(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

/// Strongest mark in a run: ? > ! > . > ; > : > ,
inline char dominant_mark(std::string_view run) {
  for (char m : {'?', '!', '.', ';', ':'})
    if (run.find(m) != std::string_view::npos) return m;
  return ',';
}

/// A whitespace-delimited token split into leading punctuation, word core
/// and trailing punctuation.
struct Token {
  std::string lead, core, trail;

  std::string str() const { return lead + core + trail; }
};

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) {
    Token t;
    size_t a = 0, b = w.size();
    while (a < b && !is_word_byte(w[a])) ++a;
    while (b > a && !is_word_byte(w[b - 1])) --b;
    t.lead = w.substr(0, a);
    t.core = w.substr(a, b - a);
    t.trail = w.substr(b);
    out.push_back(std::move(t));
  }
  return out;
}

inline std::string join(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    const std::string s = t.str();
    if (s.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += s;
  }
  return out;
}

inline bool ends_sentence(std::string_view trail) {
  return trail.find_first_of(".!?") != std::string_view::npos;
}

}  // namespace detail

struct PreprocessTables {
  std::set<std::string> fillers;                                // lowercase tokens
  std::vector<std::pair<std::string, std::string>> abbreviations;  // phrase -> short form

  /// Reads `<lang>_fillers.txt` and `<lang>_abbreviations.tsv` from `dir`.
  static PreprocessTables load(const std::filesystem::path& dir, const std::string& language) {
    PreprocessTables t;
    const auto fillers = dir / (language + "_fillers.txt");
    const auto abbrevs = dir / (language + "_abbreviations.tsv");
    std::ifstream f(fillers), a(abbrevs);
    if (!f || !a) fail(ErrorKind::config, "missing text tables for language '" + language + "' in " + dir.string());
    std::string line;
    while (std::getline(f, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      t.fillers.insert(detail::lower(line));
    }
    while (std::getline(a, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) fail(ErrorKind::config, "abbreviation table: missing tab in '" + line + "'");
      t.abbreviations.emplace_back(detail::lower(line.substr(0, tab)), line.substr(tab + 1));
    }
    // Longest phrases first so multi-word entries win over their prefixes.
    std::stable_sort(t.abbreviations.begin(), t.abbreviations.end(), [](const auto& x, const auto& y) {
      return std::count(x.first.begin(), x.first.end(), ' ') > std::count(y.first.begin(), y.first.end(), ' ');
    });
    return t;
  }

  static PreprocessTables load_default(const std::string& language = "en") {
    return load(default_data_dir() / "text", language);
  }
};

/// Collapses whitespace and redundant punctuation; drops quotation marks and
/// chunk-final period or separator.
inline std::string minimize_punctuation(std::string_view input) {
  std::string s(input);
  for (std::string_view q : {"\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x9E", "\""}) detail::replace_all(s, q, "");
  detail::replace_all(s, "\xE2\x80\x98", "'");
  detail::replace_all(s, "\xE2\x80\x99", "'");
  detail::replace_all(s, "\xE2\x80\xA6", ".");
  for (std::string_view dash : {"\xE2\x80\x94", "\xE2\x80\x93", "--", " - "}) detail::replace_all(s, dash, ", ");
  for (char& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';

  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size();) {
    if (detail::is_mark(s[i])) {
      // A run of marks, possibly with spaces in between, becomes one mark.
      size_t j = i;
      std::string run;
      while (j < s.size() && (detail::is_mark(s[j]) || s[j] == ' ')) {
        if (s[j] != ' ') run.push_back(s[j]);
        ++j;
      }
      // Keep interior dots of numbers and abbreviations ("3.5", "e.g").
      const bool interior = run.size() == 1 && j == i + 1 && j < s.size() && i > 0 &&
                            detail::is_word_byte(s[i - 1]) && detail::is_word_byte(s[j]);
      while (!out.empty() && out.back() == ' ') out.pop_back();
      if (!out.empty()) out.push_back(run.size() == 1 ? run[0] : detail::dominant_mark(run));
      if (!interior && j < s.size()) out.push_back(' ');
      i = j;
      continue;
    }
    if (s[i] == ' ') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      ++i;
      continue;
    }
    out.push_back(s[i++]);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  // The chunk boundary already ends the sentence; a final period or a
  // dangling separator adds nothing.
  while (!out.empty() && (out.back() == '.' || out.back() == ',' || out.back() == ';' || out.back() == ':'))
    out.pop_back();
  return out;
}

/// Removes standalone filler tokens together with attached punctuation.
inline std::string remove_fillers(std::string_view input, const PreprocessTables& tables) {
  auto tokens = detail::tokenize(input);
  std::vector<detail::Token> out;
  bool capitalize_next = false;
  for (size_t i = 0; i < tokens.size(); ++i) {
    auto& t = tokens[i];
    const bool sentence_start = out.empty() || detail::ends_sentence(out.back().trail);
    if (!t.core.empty() && tables.fillers.count(detail::lower(t.core))) {
      if (detail::ends_sentence(t.trail) && !out.empty() && !detail::ends_sentence(out.back().trail))
        out.back().trail = std::string(1, detail::dominant_mark(t.trail));
      // "x, uh, y" -> "x y": the commas only bracketed the filler.
      else if (t.trail == "," && !out.empty() && out.back().trail == ",")
        out.back().trail.clear();
      if (sentence_start || detail::is_upper_ascii(t.core[0])) capitalize_next = true;
      continue;
    }
    if (capitalize_next && !t.core.empty() && detail::is_lower_ascii(t.core[0]) && sentence_start)
      t.core[0] = static_cast<char>(t.core[0] - 'a' + 'A');
    capitalize_next = false;
    out.push_back(std::move(t));
  }
  return detail::join(out);
}

/// Replaces whole-word phrases from the abbreviation table.
inline std::string apply_abbreviations(std::string_view input, const PreprocessTables& tables) {
  auto tokens = detail::tokenize(input);
  std::vector<detail::Token> out;
  for (size_t i = 0; i < tokens.size();) {
    bool replaced = false;
    for (const auto& [phrase, abbr] : tables.abbreviations) {
      const auto words = detail::tokenize(phrase);
      if (i + words.size() > tokens.size()) continue;
      bool match = true;
      for (size_t k = 0; k < words.size() && match; ++k) {
        const auto& t = tokens[i + k];
        match = detail::lower(t.core) == words[k].core && (k == 0 || t.lead.empty()) &&
                (k + 1 == words.size() || t.trail.empty());
      }
      if (!match) continue;
      detail::Token t;
      t.lead = tokens[i].lead;
      t.trail = tokens[i + words.size() - 1].trail;
      t.core = abbr;
      if (detail::is_upper_ascii(tokens[i].core[0]) && !t.core.empty() && detail::is_lower_ascii(t.core[0]))
        t.core[0] = static_cast<char>(t.core[0] - 'a' + 'A');
      out.push_back(std::move(t));
      i += words.size();
      replaced = true;
      break;
    }
    if (!replaced) out.push_back(std::move(tokens[i++]));
  }
  return detail::join(out);
}

/// Full pipeline, iterated to a fixpoint so that it is idempotent.
inline std::string preprocess_text(std::string_view input, const PreprocessTables& tables) {
  std::string cur(input);
  for (int pass = 0; pass < 8; ++pass) {
    std::string next = apply_abbreviations(remove_fillers(minimize_punctuation(cur), tables), tables);
    next = minimize_punctuation(next);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace semcodec::text
