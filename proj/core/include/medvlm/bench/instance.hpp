// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medvlm/util/jsonl.hpp"

namespace medvlm::bench {

struct Option {
  std::string key;  // A..J
  std::string text;

  bool operator==(const Option&) const = default;
};

/// One standardized item. Multiple-choice items carry options and an answer
/// key; generation items have neither and keep their reference under
/// meta["reference"].
struct BenchmarkInstance {
  std::string id;
  std::string dataset;
  std::optional<std::string> subject;
  std::string question;
  std::vector<Option> options;
  std::string answer_key;
  std::vector<std::string> images;
  std::vector<BenchmarkInstance> shots;
  std::map<std::string, std::string> meta;

  bool is_multiple_choice() const { return !options.empty(); }
  const Option* option(const std::string& key) const;
  /// Option keys contiguous from A, answer among them, no shot sharing this id.
  void validate() const;

  util::Json to_json() const;
  static BenchmarkInstance from_json(const util::Json& j);

  bool operator==(const BenchmarkInstance&) const = default;
};

/// Letters A.. for `count` options; count must be within 1..10.
std::vector<std::string> option_keys(std::size_t count);

std::string serialize_benchmark(const std::vector<BenchmarkInstance>& instances);
std::vector<BenchmarkInstance> parse_benchmark(const std::string& text, const std::string& source = "<memory>");
std::vector<BenchmarkInstance> read_benchmark(const std::filesystem::path& path);
/// Atomic write of the line-delimited benchmark file.
void write_benchmark(const std::filesystem::path& path, const std::vector<BenchmarkInstance>& instances);

}  // namespace medvlm::bench
