// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// YAML run configuration for `medvlm train`:
//
//   seed: 7
//   output_dir: runs/toy
//   profile: default                # or pt-vision-trainable
//   model: {vision: {...}, lm: {...}, projector_hidden: 0}
//   datasets:
//     captions: {kind: synthetic-captions, count: 96}
//     custom:   {kind: jsonl, path: data/pairs.jsonl}
//   backbone_warmup: {data: text, steps: 150, lr: 0.003, batch_size: 8}
//   stages:
//     - {name: pretrain, data: captions, lr: {projector: 0.003}, max_steps: 150}
//
// Stage entries override the profile's defaults for the stage of that name.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medvlm/curriculum/stage.hpp"
#include "medvlm/curriculum/trainer.hpp"
#include "medvlm/model/config.hpp"

namespace medvlm::curriculum {

struct DatasetSpec {
  std::string kind;  // synthetic-captions | synthetic-reports | synthetic-vqa | synthetic-text | jsonl
  std::int64_t count = 64;
  std::int64_t image_size = 32;
  std::filesystem::path path;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/default";
  std::string profile = "default";
  model::ModelConfig model;
  std::map<std::string, DatasetSpec> datasets;
  std::optional<StageConfig> backbone_warmup;
  std::vector<StageConfig> stages;
  /// Canonical JSON of the effective configuration, used for hashing. The
  /// output directory is left out: it does not affect any result.
  util::Json snapshot() const;
};

/// Throws ConfigError naming the file, line and key on any problem,
/// including unknown keys.
RunConfig parse_run_config(const std::string& yaml_text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Materializes a dataset. Synthetic kinds are seeded from `seed` and the dataset id.
Dataset load_dataset(const std::string& id, const DatasetSpec& spec, std::uint64_t seed);

/// Reads {"prompt", "target", "images": [paths]} records; "<image>" in the
/// prompt marks where each image goes. Relative image paths resolve against
/// the file's directory.
Dataset read_pairs_jsonl(const std::filesystem::path& path);

}  // namespace medvlm::curriculum
