// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/eval/extract.hpp"

#include <algorithm>
#include <cctype>

namespace medvlm::eval {
namespace {

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return lower(x) == lower(y);
         });
}

bool is_key(const std::vector<bench::Option>& options, char c) {
  return std::any_of(options.begin(), options.end(),
                     [&](const bench::Option& o) { return o.key.size() == 1 && o.key[0] == c; });
}

// Letter of a marker starting at `pos` (which points at "answer"), or 0.
char marker_letter(std::string_view s, std::size_t pos, const std::vector<bench::Option>& options) {
  std::size_t i = pos + 6;
  auto skip_spaces = [&] {
    while (i < s.size() && space(s[i])) ++i;
  };
  skip_spaces();
  if (i + 2 <= s.size() && iequals(s.substr(i, 2), "is") && (i + 2 == s.size() || !alnum(s[i + 2]))) {
    i += 2;
    skip_spaces();
  }
  if (i < s.size() && (s[i] == ':' || s[i] == '=' || s[i] == '-')) {
    ++i;
    skip_spaces();
  }
  const bool paren = i < s.size() && s[i] == '(';
  if (paren) ++i;
  if (i >= s.size() || !is_key(options, s[i])) return 0;
  const char letter = s[i++];
  if (paren) {
    if (i >= s.size() || s[i] != ')') return 0;
    ++i;
  }
  if (i < s.size() && alnum(s[i])) return 0;
  return letter;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<std::string> extract_option(std::string_view raw, const std::vector<bench::Option>& options) {
  // Rule 1: last answer marker.
  char last = 0;
  for (std::size_t pos = 0; pos + 6 <= raw.size(); ++pos) {
    if (!iequals(raw.substr(pos, 6), "answer")) continue;
    if (pos > 0 && alnum(raw[pos - 1])) continue;
    if (const char c = marker_letter(raw, pos, options)) last = c;
  }
  if (last != 0) return std::string(1, last);

  // Rule 2: a bare key.
  std::string_view bare = raw;
  auto strip = [](char c) { return space(c) || std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (!bare.empty() && strip(bare.front())) bare.remove_prefix(1);
  while (!bare.empty() && strip(bare.back())) bare.remove_suffix(1);
  if (bare.size() == 1) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(bare[0])));
    if (is_key(options, up)) return std::string(1, up);
  }

  // Rule 3: the full text of exactly one option.
  const auto t = trim(raw);
  const bench::Option* hit = nullptr;
  for (const auto& o : options) {
    if (!iequals(t, trim(o.text))) continue;
    if (hit != nullptr) return std::nullopt;
    hit = &o;
  }
  if (hit != nullptr) return hit->key;
  return std::nullopt;
}

}  // namespace medvlm::eval
