// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Seeded synthetic corpora: coloured shapes on a dark background with
// captions, short findings-style reports, and question/answer pairs.

#include <cstdint>
#include <string>
#include <vector>

#include "medvlm/model/image.hpp"
#include "medvlm/model/vlm.hpp"

namespace medvlm::curriculum {

struct ShapeSpec {
  std::string color;  // red | green | blue
  std::string shape;  // square | circle | triangle
  bool upper = true;  // vertical placement
};

model::Image render_shape(const ShapeSpec& spec, std::int64_t size, std::uint64_t noise_seed);
ShapeSpec random_shape(std::uint64_t seed, std::int64_t index);

/// Builds an example from a prompt containing "<image>" markers and a
/// supervised target; BOS is prepended and EOS appended.
model::Example make_example(const std::string& prompt, const std::string& target, std::vector<model::Image> images);

std::vector<model::Example> synthetic_captions(std::int64_t count, std::uint64_t seed, std::int64_t image_size = 32);
std::vector<model::Example> synthetic_reports(std::int64_t count, std::uint64_t seed, std::int64_t image_size = 32);
std::vector<model::Example> synthetic_vqa(std::int64_t count, std::uint64_t seed, std::int64_t image_size = 32);
/// Caption sentences without images, fully supervised.
std::vector<model::Example> synthetic_text(std::int64_t count, std::uint64_t seed);

std::string caption_for(const ShapeSpec& spec);
std::string report_for(const ShapeSpec& spec);

}  // namespace medvlm::curriculum
