// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/curriculum/stage.hpp"

#include "medvlm/util/error.hpp"

namespace medvlm::curriculum {

void StageConfig::validate() const {
  if (name != kPretrain && name != kMidtrain && name != kInstruct && name != kBackboneWarmup) {
    throw ConfigError("stage name '" + name + "' is not one of pretrain, midtrain, instruct");
  }
  if (trainable.empty()) throw ConfigError("stage '" + name + "': trainable module set is empty");
  for (const auto& m : trainable) {
    if (!kModules.contains(m)) throw ConfigError("stage '" + name + "': unknown module '" + m + "'");
  }
  for (const auto& [m, lr] : lr_map) {
    if (!trainable.contains(m)) {
      throw ConfigError("stage '" + name + "': learning rate given for non-trainable module '" + m + "'");
    }
    if (!(lr > 0.0)) throw ConfigError("stage '" + name + "': learning rate for '" + m + "' must be positive");
  }
  for (const auto& m : trainable) {
    if (!lr_map.contains(m)) throw ConfigError("stage '" + name + "': no learning rate for module '" + m + "'");
  }
  if (epochs < 1) throw ConfigError("stage '" + name + "': epochs must be >= 1");
  if (max_seq_len < 1) throw ConfigError("stage '" + name + "': max_seq_len must be >= 1");
  if (data_source.empty()) throw ConfigError("stage '" + name + "': data source is empty");
  if (warmup_ratio < 0.0 || warmup_ratio >= 1.0) throw ConfigError("stage '" + name + "': warmup_ratio outside [0, 1)");
  if (min_lr < 0.0) throw ConfigError("stage '" + name + "': min_lr must be non-negative");
  if (batch_size < 1 || grad_accum < 1) throw ConfigError("stage '" + name + "': batch_size and grad_accum must be >= 1");
  if (max_steps < 0) throw ConfigError("stage '" + name + "': max_steps must be >= 0");
}

std::vector<StageConfig> default_stages(std::string_view profile) {
  if (profile != "default" && profile != "pt-vision-trainable") {
    throw ConfigError("unknown curriculum profile '" + std::string(profile) + "'");
  }
  StageConfig pre;
  pre.name = kPretrain;
  pre.trainable = {"projector"};
  pre.lr_map = {{"projector", 1e-3}};
  pre.data_source = "pretrain-pairs";
  if (profile == "pt-vision-trainable") {
    pre.trainable.insert("vision");
    pre.lr_map["vision"] = 1e-3;
  }

  StageConfig mid;
  mid.name = kMidtrain;
  mid.trainable = {"projector", "lm"};
  mid.lr_map = {{"projector", 2e-5}, {"lm", 2e-5}};
  mid.data_source = "midtrain-pairs";

  StageConfig inst;
  inst.name = kInstruct;
  inst.trainable = {"vision", "projector", "lm"};
  inst.lr_map = {{"vision", 8e-5}, {"projector", 8e-5}, {"lm", 8e-5}};
  inst.data_source = "instruct-mix";

  return {pre, mid, inst};
}

std::map<std::string, bool> freeze_mask(const model::ParamStore& params, const StageConfig& stage) {
  stage.validate();
  std::map<std::string, bool> mask;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string mod = model::module_of(params.path(i));
    if (!kModules.contains(mod)) throw ConfigError("parameter '" + params.path(i) + "' has unknown module");
    mask[params.path(i)] = stage.trainable.contains(mod);
  }
  return mask;
}

}  // namespace medvlm::curriculum
