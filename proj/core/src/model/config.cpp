// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/model/config.hpp"

#include <cmath>

#include "medvlm/util/error.hpp"

namespace medvlm::nn {

void to_json(nlohmann::ordered_json& j, const RopeConfig& c) {
  j = {{"head_dim", c.head_dim},       {"theta_base", c.theta_base}, {"original_context", c.original_context},
       {"scale_factor", c.scale_factor}, {"beta_fast", c.beta_fast},   {"beta_slow", c.beta_slow}};
}

void from_json(const nlohmann::ordered_json& j, RopeConfig& c) {
  RopeConfig d;
  c.head_dim = j.value("head_dim", d.head_dim);
  c.theta_base = j.value("theta_base", d.theta_base);
  c.original_context = j.value("original_context", d.original_context);
  c.scale_factor = j.value("scale_factor", d.scale_factor);
  c.beta_fast = j.value("beta_fast", d.beta_fast);
  c.beta_slow = j.value("beta_slow", d.beta_slow);
}

}  // namespace medvlm::nn

namespace medvlm::model {

std::int64_t VisionConfig::merge_factor() const {
  if (!(downsample_ratio > 0.0 && downsample_ratio <= 1.0)) {
    throw ConfigError("vision downsample_ratio must lie in (0, 1]");
  }
  const double inv = 1.0 / downsample_ratio;
  const auto k = static_cast<std::int64_t>(std::llround(inv));
  if (std::abs(inv - static_cast<double>(k)) > 1e-9) {
    throw ConfigError("vision downsample_ratio must be the reciprocal of an integer");
  }
  return k;
}

std::int64_t VisionConfig::tokens_per_tile() const {
  const std::int64_t g = grid() / merge_factor();
  return g * g;
}

void VisionConfig::validate() const {
  if (tile_size <= 0 || patch_size <= 0) throw ConfigError("vision tile_size and patch_size must be positive");
  if (tile_size % patch_size != 0) throw ConfigError("vision tile_size must be divisible by patch_size");
  if (grid() % merge_factor() != 0) {
    throw ConfigError("vision patches per side must be divisible by 1/downsample_ratio");
  }
  if (max_tiles < 1) throw ConfigError("vision max_tiles must be >= 1");
  if (width <= 0 || heads <= 0 || width % heads != 0) throw ConfigError("vision width must be a positive multiple of heads");
  if (layers < 0 || mlp_ratio <= 0) throw ConfigError("vision layers/mlp_ratio invalid");
}

VisionConfig VisionConfig::full_scale() {
  VisionConfig c;
  c.tile_size = 336;
  c.patch_size = 14;
  c.max_tiles = 12;
  c.include_thumbnail = true;
  c.downsample_ratio = 0.5;
  return c;
}

void LmConfig::validate() const {
  if (vocab_size <= 0) throw ConfigError("lm vocab_size must be positive");
  if (d_model <= 0 || heads <= 0 || d_model % heads != 0) throw ConfigError("lm d_model must be a positive multiple of heads");
  if (layers < 0 || mlp_ratio <= 0) throw ConfigError("lm layers/mlp_ratio invalid");
  if (max_seq_len <= 0) throw ConfigError("lm max_seq_len must be positive");
  rope.validate();
  if (rope.head_dim != head_dim()) {
    throw ConfigError("lm rope.head_dim " + std::to_string(rope.head_dim) + " must equal d_model/heads = " +
                      std::to_string(head_dim()));
  }
}

void ModelConfig::validate() const {
  vision.validate();
  lm.validate();
  if (projector_hidden < 0) throw ConfigError("projector_hidden must be non-negative");
}

void to_json(nlohmann::ordered_json& j, const VisionConfig& c) {
  j = {{"tile_size", c.tile_size},
       {"patch_size", c.patch_size},
       {"max_tiles", c.max_tiles},
       {"include_thumbnail", c.include_thumbnail},
       {"thumbnail_first", c.thumbnail_first},
       {"downsample_ratio", c.downsample_ratio},
       {"width", c.width},
       {"layers", c.layers},
       {"heads", c.heads},
       {"mlp_ratio", c.mlp_ratio}};
}

void from_json(const nlohmann::ordered_json& j, VisionConfig& c) {
  VisionConfig d;
  c.tile_size = j.value("tile_size", d.tile_size);
  c.patch_size = j.value("patch_size", d.patch_size);
  c.max_tiles = j.value("max_tiles", d.max_tiles);
  c.include_thumbnail = j.value("include_thumbnail", d.include_thumbnail);
  c.thumbnail_first = j.value("thumbnail_first", d.thumbnail_first);
  c.downsample_ratio = j.value("downsample_ratio", d.downsample_ratio);
  c.width = j.value("width", d.width);
  c.layers = j.value("layers", d.layers);
  c.heads = j.value("heads", d.heads);
  c.mlp_ratio = j.value("mlp_ratio", d.mlp_ratio);
}

void to_json(nlohmann::ordered_json& j, const LmConfig& c) {
  j = {{"vocab_size", c.vocab_size}, {"d_model", c.d_model},         {"layers", c.layers}, {"heads", c.heads},
       {"mlp_ratio", c.mlp_ratio},   {"max_seq_len", c.max_seq_len}, {"rope", c.rope}};
}

void from_json(const nlohmann::ordered_json& j, LmConfig& c) {
  LmConfig d;
  c.vocab_size = j.value("vocab_size", d.vocab_size);
  c.d_model = j.value("d_model", d.d_model);
  c.layers = j.value("layers", d.layers);
  c.heads = j.value("heads", d.heads);
  c.mlp_ratio = j.value("mlp_ratio", d.mlp_ratio);
  c.max_seq_len = j.value("max_seq_len", d.max_seq_len);
  c.rope = j.contains("rope") ? j.at("rope").get<nn::RopeConfig>() : nn::RopeConfig{.head_dim = c.d_model / c.heads};
}

void to_json(nlohmann::ordered_json& j, const ModelConfig& c) {
  j = {{"vision", c.vision}, {"lm", c.lm}, {"projector_hidden", c.projector_hidden}};
}

void from_json(const nlohmann::ordered_json& j, ModelConfig& c) {
  c.vision = j.contains("vision") ? j.at("vision").get<VisionConfig>() : VisionConfig{};
  c.lm = j.contains("lm") ? j.at("lm").get<LmConfig>() : LmConfig{};
  c.projector_hidden = j.value("projector_hidden", std::int64_t{0});
}

}  // namespace medvlm::model
