// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "medvlm/model/config.hpp"
#include "medvlm/model/image.hpp"

namespace medvlm::model {

struct TilingPlan {
  std::int64_t grid_rows = 1;
  std::int64_t grid_cols = 1;
  bool has_thumbnail = false;
  std::int64_t resized_width = 0;
  std::int64_t resized_height = 0;

  std::int64_t tile_count() const { return grid_rows * grid_cols; }
  std::int64_t crop_count() const { return tile_count() + (has_thumbnail ? 1 : 0); }
  friend bool operator==(const TilingPlan&, const TilingPlan&) = default;
};

/// Chooses the grid whose aspect ratio is closest (in log space) to the
/// image's. Ties go to the tile count nearest ceil(w*h / tile^2), then the
/// smaller count, then fewer rows. Ratios are compared exactly in integers.
TilingPlan plan_tiling(std::int64_t width, std::int64_t height, const VisionConfig& cfg);

/// Resizes to the plan's grid and cuts tile_size crops in row-major order;
/// the thumbnail (whole image at tile size) goes last unless
/// cfg.thumbnail_first.
std::vector<Image> tile_image(const Image& image, const TilingPlan& plan, const VisionConfig& cfg);

/// Vision tokens an image contributes after merging.
std::int64_t vision_token_count(const TilingPlan& plan, const VisionConfig& cfg);

}  // namespace medvlm::model
