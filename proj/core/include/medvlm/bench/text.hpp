// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace medvlm::bench {

/// Trims and collapses every whitespace run to one space.
std::string collapse_whitespace(std::string_view text);

struct Sentence {
  std::string id;  // S1, S2, ...
  std::string text;

  bool operator==(const Sentence&) const = default;
};

/// Tokens (lower-cased, without the final period) that never end a sentence.
/// Single letters are also guarded so initials stay attached.
const std::vector<std::string>& abbreviation_guard();

/// Splits the whitespace-collapsed note after '.', '!' or '?' when whitespace
/// follows, unless the word before the period is guarded. Joining the
/// sentence texts with single spaces gives back the collapsed note.
std::vector<Sentence> segment_sentences(std::string_view note);

/// Criterion lines with headers, bullet and numbering prefixes, and
/// fragments shorter than `min_words` words removed; order preserved.
std::vector<std::string> clean_criteria(std::string_view raw, std::size_t min_words = 3);

/// Lower-case, punctuation removed, whitespace collapsed. Overlap hashing key.
std::string normalize_for_overlap(std::string_view text);

}  // namespace medvlm::bench
