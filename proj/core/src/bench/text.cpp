// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/bench/text.hpp"

#include <algorithm>
#include <cctype>

namespace medvlm::bench {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

bool guarded(std::string_view word) {
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'')) word.remove_prefix(1);
  if (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]))) return true;
  const auto w = lower(word);
  const auto& guard = abbreviation_guard();
  return std::find(guard.begin(), guard.end(), w) != guard.end();
}

bool is_roman(std::string_view s) {
  if (s.empty() || s.size() > 6) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return l == 'i' || l == 'v' || l == 'x';
  });
}

bool is_digits(std::string_view s) {
  return !s.empty() && s.size() <= 3 &&
         std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// One bullet or enumeration marker, followed by whitespace, or nothing.
std::size_t prefix_length(std::string_view s) {
  if (s.empty()) return 0;
  const std::string_view bullets[] = {"-", "*", "+", "•", "·", "–", "▪"};
  for (auto b : bullets) {
    if (s.starts_with(b)) return b.size();
  }
  // (1) (iv)
  if (s.front() == '(') {
    const auto close = s.find(')');
    if (close != std::string_view::npos) {
      const auto inner = s.substr(1, close - 1);
      if (is_digits(inner) || is_roman(inner)) return close + 1;
    }
    return 0;
  }
  // 1. 1) iv. iv)
  const auto stop = s.find_first_of(".)");
  if (stop == std::string_view::npos || stop == 0) return 0;
  const auto head = s.substr(0, stop);
  if (!is_digits(head) && !is_roman(head)) return 0;
  // "1.5 mg" is a value, not numbering.
  if (stop + 1 < s.size() && !is_space(s[stop + 1])) return 0;
  return stop + 1;
}

bool is_header(std::string_view line) {
  if (line.ends_with(':')) return true;
  static const std::vector<std::string> headers{"inclusion criteria", "exclusion criteria", "key inclusion criteria",
                                                "key exclusion criteria", "inclusion", "exclusion", "criteria"};
  const auto l = lower(line);
  return std::find(headers.begin(), headers.end(), l) != headers.end();
}

}  // namespace

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

const std::vector<std::string>& abbreviation_guard() {
  static const std::vector<std::string> guard{
      "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "approx", "no",
      "fig", "pt", "pts", "hx", "dx", "tx", "rx", "yr", "yrs", "wk", "wks", "mo", "mos", "min", "max", "inc"};
  return guard;
}

std::vector<Sentence> segment_sentences(std::string_view note) {
  const auto text = collapse_whitespace(note);
  std::vector<Sentence> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    const auto s = trim(std::string_view(text).substr(start, end - start));
    if (!s.empty()) out.push_back({"S" + std::to_string(out.size() + 1), std::string(s)});
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < text.size() && text[i + 1] != ' ') continue;
    if (i + 1 == text.size()) break;
    if (c == '.') {
      const auto word_start = text.rfind(' ', i);
      const auto ws = word_start == std::string::npos ? 0 : word_start + 1;
      if (ws < i && guarded(std::string_view(text).substr(ws, i - ws))) continue;
    }
    emit(i + 1);
    start = i + 2;
  }
  emit(text.size());
  return out;
}

std::vector<std::string> clean_criteria(std::string_view raw, std::size_t min_words) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    auto line = trim(raw.substr(pos, nl - pos));
    pos = nl + 1;
    for (;;) {
      const auto n = prefix_length(line);
      if (n == 0) break;
      const auto rest = line.substr(n);
      if (!rest.empty() && !is_space(rest.front())) break;
      line = trim(rest);
    }
    if (line.empty() || is_header(line)) continue;
    auto clean = collapse_whitespace(line);
    if (word_count(clean) < min_words) continue;
    out.push_back(std::move(clean));
  }
  return out;
}

std::string normalize_for_overlap(std::string_view text) {
  std::string stripped;
  stripped.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    stripped.push_back(static_cast<char>(std::tolower(u)));
  }
  return collapse_whitespace(stripped);
}

}  // namespace medvlm::bench
