// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/bench/overlap.hpp"

#include <set>
#include <unordered_set>

#include "medvlm/bench/text.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::bench {

std::vector<std::string> OverlapReport::ids() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& h : hits) {
    if (seen.insert(h.id).second) out.push_back(h.id);
  }
  return out;
}

util::Json OverlapReport::to_json() const {
  auto arr = util::Json::array();
  for (const auto& h : hits) arr.push_back({{"id", h.id}, {"kind", h.kind}, {"hash", h.hash}});
  return {{"train_items", train_items},
          {"eval_items", eval_items},
          {"overlapping_ids", ids()},
          {"hits", arr}};
}

OverlapReport check_overlap(const std::vector<TrainItem>& train, const std::vector<BenchmarkInstance>& eval,
                            const std::filesystem::path& image_root) {
  std::unordered_set<std::string> text_hashes;
  std::unordered_set<std::string> image_hashes;
  for (const auto& item : train) {
    const auto norm = normalize_for_overlap(item.text);
    if (!norm.empty()) text_hashes.insert(util::sha256_hex(norm));
    for (const auto& img : item.images) image_hashes.insert(util::sha256_file(img));
  }
  OverlapReport report;
  report.train_items = train.size();
  report.eval_items = eval.size();
  for (const auto& inst : eval) {
    const auto norm = normalize_for_overlap(inst.question);
    if (!norm.empty()) {
      auto h = util::sha256_hex(norm);
      if (text_hashes.contains(h)) report.hits.push_back({inst.id, "question", std::move(h)});
    }
    for (const auto& img : inst.images) {
      auto h = util::sha256_file(image_root / img);
      if (image_hashes.contains(h)) report.hits.push_back({inst.id, "image", std::move(h)});
    }
  }
  return report;
}

std::vector<TrainItem> read_train_corpus(const std::filesystem::path& path) {
  std::vector<TrainItem> out;
  const auto base = path.parent_path();
  for (const auto& row : util::read_jsonl(path)) {
    const auto first = out.size();
    for (const char* key : {"text", "prompt", "question", "target"}) {
      if (row.contains(key) && row[key].is_string()) out.push_back({row[key].get<std::string>(), {}});
    }
    if (row.contains("images")) {
      if (out.size() == first) out.push_back({});
      for (const auto& img : row["images"]) {
        std::filesystem::path p = img.get<std::string>();
        out[first].images.push_back(p.is_absolute() ? p : base / p);
      }
    }
  }
  return out;
}

}  // namespace medvlm::bench
