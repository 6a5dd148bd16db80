// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <json.hpp>

#include "medvlm/nn/ops.hpp"

namespace medvlm::nn {
void to_json(nlohmann::ordered_json& j, const RopeConfig& c);
void from_json(const nlohmann::ordered_json& j, RopeConfig& c);
}  // namespace medvlm::nn

namespace medvlm::model {

struct VisionConfig {
  std::int64_t tile_size = 32;
  std::int64_t patch_size = 8;
  std::int64_t max_tiles = 12;
  bool include_thumbnail = true;
  /// Crop order: tiles then thumbnail unless set.
  bool thumbnail_first = false;
  double downsample_ratio = 0.5;
  std::int64_t width = 16;  // d_v
  std::int64_t layers = 1;
  std::int64_t heads = 2;
  std::int64_t mlp_ratio = 4;

  void validate() const;
  /// Patches per side of one tile.
  std::int64_t grid() const { return tile_size / patch_size; }
  /// Neighbourhood side merged into one token (1 / downsample_ratio).
  std::int64_t merge_factor() const;
  std::int64_t patch_tokens_per_tile() const { return grid() * grid(); }
  std::int64_t tokens_per_tile() const;
  std::int64_t merged_width() const { return merge_factor() * merge_factor() * width; }
  std::int64_t patch_dim() const { return patch_size * patch_size * 3; }

  /// 336 px tiles, 14 px patches, 12 tiles, thumbnails, ratio 0.5.
  static VisionConfig full_scale();
};

struct LmConfig {
  std::int64_t vocab_size = 260;
  std::int64_t d_model = 32;
  std::int64_t layers = 2;
  std::int64_t heads = 2;
  std::int64_t mlp_ratio = 4;
  std::int64_t max_seq_len = 256;
  nn::RopeConfig rope{.head_dim = 16};

  std::int64_t head_dim() const { return d_model / heads; }
  void validate() const;
};

struct ModelConfig {
  VisionConfig vision;
  LmConfig lm;
  /// Projector hidden width; 0 means d_model.
  std::int64_t projector_hidden = 0;

  std::int64_t projector_hidden_width() const { return projector_hidden > 0 ? projector_hidden : lm.d_model; }
  void validate() const;
};

void to_json(nlohmann::ordered_json& j, const VisionConfig& c);
void from_json(const nlohmann::ordered_json& j, VisionConfig& c);
void to_json(nlohmann::ordered_json& j, const LmConfig& c);
void from_json(const nlohmann::ordered_json& j, LmConfig& c);
void to_json(nlohmann::ordered_json& j, const ModelConfig& c);
void from_json(const nlohmann::ordered_json& j, ModelConfig& c);

}  // namespace medvlm::model
