// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/model/tokenizer.hpp"

namespace medvlm::model {

std::vector<std::int64_t> ByteTokenizer::encode(std::string_view text) {
  std::vector<std::int64_t> ids;
  ids.reserve(text.size());
  for (char c : text) ids.push_back(static_cast<std::uint8_t>(c));
  return ids;
}

std::string ByteTokenizer::decode(std::span<const std::int64_t> ids) {
  std::string out;
  for (auto id : ids) {
    if (id >= 0 && id < 256) out.push_back(static_cast<char>(id));
  }
  return out;
}

}  // namespace medvlm::model
