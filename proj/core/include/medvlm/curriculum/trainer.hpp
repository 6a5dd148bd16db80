// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medvlm/curriculum/stage.hpp"
#include "medvlm/model/checkpoint.hpp"
#include "medvlm/nn/optim.hpp"
#include "medvlm/model/vlm.hpp"
#include "medvlm/util/jsonl.hpp"

namespace medvlm::curriculum {

struct Model {
  model::ModelConfig config;
  model::ParamStore params;
};

struct StepRecord {
  std::string stage;
  std::int64_t step = 0;
  std::map<std::string, double> lr;  // per trainable module
  double loss = 0.0;

  util::Json to_json() const;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::map<std::string, double> wall_seconds;  // per stage
  std::map<std::string, std::int64_t> skipped_examples;

  /// One JSON object per line, step records only (wall time is not reproducible).
  std::string to_jsonl() const;
  void append(const TrainLog& other);
  /// Mean loss over the first / last `window` steps of a stage.
  double smoothed_start(const std::string& stage, std::int64_t window) const;
  double smoothed_end(const std::string& stage, std::int64_t window) const;
};

using Dataset = std::vector<model::Example>;

/// Left-truncates the text so the assembled sequence fits, never cutting an
/// image block. Returns nullopt when the images alone do not fit or no
/// supervised target survives.
std::optional<model::Example> fit_to_length(const model::Example& ex, const model::ModelConfig& cfg,
                                            std::int64_t max_len);
/// Positions an example occupies after image splicing.
std::int64_t assembled_length(const model::Example& ex, const model::ModelConfig& cfg);

/// One curriculum stage. Only parameters of trainable modules change; each
/// step uses the cosine schedule per module base rate. Throws NumericError on
/// a non-finite loss; the message is the offending step record as JSON.
TrainLog run_stage(Model& model, const StageConfig& stage, const Dataset& data, std::uint64_t seed,
                   nn::AdamWHyper hyper = {});

struct CurriculumOptions {
  std::optional<std::filesystem::path> checkpoint_dir;
  nn::AdamWHyper hyper;
  /// Called after each stage with its checkpoint path (empty without a dir).
  std::function<void(const StageConfig&, const std::filesystem::path&)> on_stage_end;
};

struct CurriculumResult {
  Model model;
  TrainLog log;
  std::vector<std::filesystem::path> checkpoints;
};

/// Runs stages in order with a fresh optimizer state per stage. Every
/// stage's data source must exist in `datasets`; this is checked up front.
CurriculumResult train_curriculum(Model model, const std::vector<StageConfig>& stages,
                                  const std::map<std::string, Dataset>& datasets, std::uint64_t seed,
                                  const CurriculumOptions& options = {});

/// Per-stage stream seed; depends on the stage name, not its position, so a
/// resumed run sees the same data order.
std::uint64_t stage_seed(std::uint64_t seed, const std::string& stage_name);

}  // namespace medvlm::curriculum
