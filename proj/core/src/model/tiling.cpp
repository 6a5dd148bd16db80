// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/model/tiling.hpp"

#include <algorithm>
#include <cstdlib>

#include "medvlm/util/error.hpp"

namespace medvlm::model {
namespace {

__extension__ using u128 = unsigned __int128;

// |log((c/r) / (w/h))| is monotone in max(ch, rw) / min(ch, rw).
struct AspectGap {
  u128 num;
  u128 den;
};

AspectGap aspect_gap(std::int64_t rows, std::int64_t cols, std::int64_t width, std::int64_t height) {
  const auto a = static_cast<u128>(cols) * static_cast<u128>(height);
  const auto b = static_cast<u128>(rows) * static_cast<u128>(width);
  return a >= b ? AspectGap{a, b} : AspectGap{b, a};
}

// -1, 0, +1 as x compares to y.
int compare(const AspectGap& x, const AspectGap& y) {
  const u128 l = x.num * y.den;
  const u128 r = y.num * x.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

}  // namespace

TilingPlan plan_tiling(std::int64_t width, std::int64_t height, const VisionConfig& cfg) {
  if (width < 1 || height < 1) throw ValidationError("plan_tiling: image dimensions must be positive");
  cfg.validate();
  const auto area = static_cast<u128>(width) * static_cast<u128>(height);
  const auto tile_area = static_cast<u128>(cfg.tile_size) * static_cast<u128>(cfg.tile_size);
  const auto target = static_cast<std::int64_t>((area + tile_area - 1) / tile_area);

  std::int64_t best_r = 1, best_c = 1;
  AspectGap best_gap = aspect_gap(1, 1, width, height);
  for (std::int64_t r = 1; r <= cfg.max_tiles; ++r) {
    for (std::int64_t c = 1; r * c <= cfg.max_tiles; ++c) {
      if (r == 1 && c == 1) continue;
      const AspectGap gap = aspect_gap(r, c, width, height);
      const int cmp = compare(gap, best_gap);
      bool better = cmp < 0;
      if (cmp == 0) {
        const std::int64_t n = r * c, bn = best_r * best_c;
        const std::int64_t dist = std::llabs(n - target), best_dist = std::llabs(bn - target);
        if (dist != best_dist) {
          better = dist < best_dist;
        } else if (n != bn) {
          better = n < bn;
        } else {
          better = r < best_r;
        }
      }
      if (better) {
        best_r = r;
        best_c = c;
        best_gap = gap;
      }
    }
  }
  TilingPlan plan;
  plan.grid_rows = best_r;
  plan.grid_cols = best_c;
  plan.has_thumbnail = cfg.include_thumbnail && plan.tile_count() > 1;
  plan.resized_width = best_c * cfg.tile_size;
  plan.resized_height = best_r * cfg.tile_size;
  return plan;
}

std::vector<Image> tile_image(const Image& image, const TilingPlan& plan, const VisionConfig& cfg) {
  cfg.validate();
  if (plan.grid_rows < 1 || plan.grid_cols < 1 || plan.tile_count() > cfg.max_tiles ||
      plan.resized_width != plan.grid_cols * cfg.tile_size || plan.resized_height != plan.grid_rows * cfg.tile_size ||
      plan.has_thumbnail != (cfg.include_thumbnail && plan.tile_count() > 1)) {
    throw ValidationError("tile_image: plan does not match the vision configuration");
  }
  const Image resized = resize_bilinear(image, plan.resized_width, plan.resized_height);
  std::vector<Image> crops;
  crops.reserve(static_cast<std::size_t>(plan.crop_count()));
  if (plan.has_thumbnail && cfg.thumbnail_first) crops.push_back(resize_bilinear(image, cfg.tile_size, cfg.tile_size));
  for (std::int64_t r = 0; r < plan.grid_rows; ++r) {
    for (std::int64_t c = 0; c < plan.grid_cols; ++c) {
      crops.push_back(crop(resized, c * cfg.tile_size, r * cfg.tile_size, cfg.tile_size, cfg.tile_size));
    }
  }
  if (plan.has_thumbnail && !cfg.thumbnail_first) crops.push_back(resize_bilinear(image, cfg.tile_size, cfg.tile_size));
  return crops;
}

std::int64_t vision_token_count(const TilingPlan& plan, const VisionConfig& cfg) {
  return plan.crop_count() * cfg.tokens_per_tile();
}

}  // namespace medvlm::model
