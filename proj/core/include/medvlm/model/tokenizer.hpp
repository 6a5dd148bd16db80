// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medvlm::model {

/// Byte-level tokenizer: ids 0..255 are raw bytes, followed by four specials.
struct ByteTokenizer {
  static constexpr std::int64_t kBos = 256;
  static constexpr std::int64_t kEos = 257;
  static constexpr std::int64_t kImage = 258;
  static constexpr std::int64_t kPad = 259;
  static constexpr std::int64_t kVocabSize = 260;

  static std::vector<std::int64_t> encode(std::string_view text);
  /// Specials are dropped.
  static std::string decode(std::span<const std::int64_t> ids);
};

}  // namespace medvlm::model
