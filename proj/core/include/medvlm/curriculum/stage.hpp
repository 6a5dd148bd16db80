// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "medvlm/model/params.hpp"

namespace medvlm::curriculum {

inline constexpr std::string_view kPretrain = "pretrain";
inline constexpr std::string_view kMidtrain = "midtrain";
inline constexpr std::string_view kInstruct = "instruct";
/// Text-only LM warm-up standing in for an open-weight backbone at desk scale.
inline constexpr std::string_view kBackboneWarmup = "backbone-warmup";

/// Top-level parameter modules a stage can train.
inline const std::set<std::string, std::less<>> kModules{"vision", "projector", "lm"};

struct StageConfig {
  std::string name;
  std::set<std::string> trainable;
  std::map<std::string, double> lr_map;
  std::int64_t epochs = 1;
  std::int64_t max_seq_len = 32768;
  std::string data_source;
  double warmup_ratio = 0.03;
  double min_lr = 0.0;
  std::int64_t batch_size = 16;
  std::int64_t grad_accum = 1;
  /// Overrides epochs when positive.
  std::int64_t max_steps = 0;

  /// Throws ConfigError: unknown name or module, empty trainable set, or
  /// lr_map keys that differ from the trainable set.
  void validate() const;
};

/// Curriculum profiles: "default" (vision frozen until instruction tuning) and
/// "pt-vision-trainable" (vision encoder also trained during pretraining).
std::vector<StageConfig> default_stages(std::string_view profile = "default");

/// true exactly for parameters whose module is trainable in `stage`.
std::map<std::string, bool> freeze_mask(const model::ParamStore& params, const StageConfig& stage);

}  // namespace medvlm::curriculum
