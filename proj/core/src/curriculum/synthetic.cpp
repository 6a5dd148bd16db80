// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/curriculum/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

#include "medvlm/model/tokenizer.hpp"
#include "medvlm/util/hash.hpp"
#include "medvlm/util/random.hpp"

namespace medvlm::curriculum {
namespace {

constexpr std::array<const char*, 3> kColors{"red", "green", "blue"};
constexpr std::array<const char*, 3> kShapes{"square", "circle", "triangle"};

std::array<int, 3> rgb_of(const std::string& color) {
  if (color == "red") return {220, 40, 40};
  if (color == "green") return {40, 200, 60};
  return {50, 70, 230};
}

bool inside(const std::string& shape, double dx, double dy, double r) {
  if (shape == "square") return std::abs(dx) <= r && std::abs(dy) <= r;
  if (shape == "circle") return dx * dx + dy * dy <= r * r;
  // Apex up: the half-width grows linearly from the top edge.
  if (dy < -r || dy > r) return false;
  return std::abs(dx) <= (dy + r) / 2.0;
}

}  // namespace

model::Image render_shape(const ShapeSpec& spec, std::int64_t size, std::uint64_t noise_seed) {
  util::Rng rng(noise_seed);
  model::Image img(size, size);
  for (auto& px : img.rgb) px = static_cast<std::uint8_t>(16 + rng.below(16));
  const auto color = rgb_of(spec.color);
  const double r = static_cast<double>(size) * 0.22;
  const double cx = static_cast<double>(size) * (0.35 + 0.3 * rng.uniform());
  const double cy = static_cast<double>(size) * (spec.upper ? 0.3 : 0.7);
  for (std::int64_t y = 0; y < size; ++y) {
    for (std::int64_t x = 0; x < size; ++x) {
      if (!inside(spec.shape, static_cast<double>(x) + 0.5 - cx, static_cast<double>(y) + 0.5 - cy, r)) continue;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(color[static_cast<std::size_t>(c)]);
    }
  }
  return img;
}

ShapeSpec random_shape(std::uint64_t seed, std::int64_t index) {
  const std::uint64_t h = util::mix64(seed ^ util::mix64(static_cast<std::uint64_t>(index)));
  return {kColors[h % 3], kShapes[(h / 3) % 3], ((h / 9) % 2) == 0};
}

model::Example make_example(const std::string& prompt, const std::string& target, std::vector<model::Image> images) {
  using model::ByteTokenizer;
  auto ex = model::encode_prompt(prompt, std::move(images));
  for (auto id : ByteTokenizer::encode(target)) {
    ex.text.ids.push_back(id);
    ex.text.supervised.push_back(true);
  }
  ex.text.ids.push_back(ByteTokenizer::kEos);
  ex.text.supervised.push_back(true);
  return ex;
}

std::string caption_for(const ShapeSpec& spec) { return "a " + spec.color + " " + spec.shape + "."; }

std::string report_for(const ShapeSpec& spec) {
  return spec.color + " " + spec.shape + " in the " + (spec.upper ? "upper" : "lower") +
         " field. no other abnormality.";
}

std::vector<model::Example> synthetic_captions(std::int64_t count, std::uint64_t seed, std::int64_t image_size) {
  std::vector<model::Example> out;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto spec = random_shape(seed, i);
    out.push_back(make_example("<image>caption: ", caption_for(spec),
                               {render_shape(spec, image_size, util::mix64(seed + 7 * static_cast<std::uint64_t>(i)))}));
  }
  return out;
}

std::vector<model::Example> synthetic_reports(std::int64_t count, std::uint64_t seed, std::int64_t image_size) {
  std::vector<model::Example> out;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto spec = random_shape(seed, i);
    out.push_back(make_example("<image>findings: ", report_for(spec),
                               {render_shape(spec, image_size, util::mix64(seed + 11 * static_cast<std::uint64_t>(i)))}));
  }
  return out;
}

std::vector<model::Example> synthetic_vqa(std::int64_t count, std::uint64_t seed, std::int64_t image_size) {
  std::vector<model::Example> out;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto spec = random_shape(seed, i);
    std::string question, answer;
    switch (util::mix64(seed * 31 + static_cast<std::uint64_t>(i)) % 3) {
      case 0:
        question = "what color is the shape?";
        answer = spec.color;
        break;
      case 1:
        question = "which shape is shown?";
        answer = spec.shape;
        break;
      default:
        question = "upper or lower half?";
        answer = spec.upper ? "upper" : "lower";
        break;
    }
    out.push_back(make_example("<image>question: " + question + "\nanswer: ", answer,
                               {render_shape(spec, image_size, util::mix64(seed + 13 * static_cast<std::uint64_t>(i)))}));
  }
  return out;
}

std::vector<model::Example> synthetic_text(std::int64_t count, std::uint64_t seed) {
  std::vector<model::Example> out;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto spec = random_shape(seed, i);
    out.push_back(make_example(spec.color + " " + spec.shape + " caption: ", caption_for(spec), {}));
  }
  return out;
}

}  // namespace medvlm::curriculum
