// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "medvlm/bench/instance.hpp"
#include "medvlm/util/jsonl.hpp"

namespace medvlm::bench {

struct TrainItem {
  std::string text;
  std::vector<std::filesystem::path> images;
};

struct OverlapHit {
  std::string id;    // eval instance id
  std::string kind;  // "question" | "image"
  std::string hash;  // SHA-256 hex of the matched content

  bool operator==(const OverlapHit&) const = default;
};

struct OverlapReport {
  std::vector<OverlapHit> hits;
  std::size_t train_items = 0;
  std::size_t eval_items = 0;

  bool clean() const { return hits.empty(); }
  /// Distinct eval ids with at least one hit, in benchmark order.
  std::vector<std::string> ids() const;
  util::Json to_json() const;
};

/// Exact-hash overlap after normalize_for_overlap for text and on raw bytes
/// for images. Eval image paths resolve against `image_root`; unreadable
/// files throw IoError.
OverlapReport check_overlap(const std::vector<TrainItem>& train, const std::vector<BenchmarkInstance>& eval,
                            const std::filesystem::path& image_root = {});

/// Training records from JSONL: each string field among text, prompt,
/// question and target becomes an item; an "images" list attaches to the
/// first. Image paths resolve against the file's directory.
std::vector<TrainItem> read_train_corpus(const std::filesystem::path& path);

}  // namespace medvlm::bench
