// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace medvlm::util {

using Json = nlohmann::ordered_json;

/// Parses one JSON object per non-blank line. Errors name the line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
std::vector<Json> parse_jsonl(const std::string& text, const std::string& source = "<memory>");

/// Compact serialization, one object per line, trailing newline.
std::string to_jsonl(const std::vector<Json>& rows);

}  // namespace medvlm::util
