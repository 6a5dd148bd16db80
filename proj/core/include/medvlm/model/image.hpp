// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace medvlm::model {

/// 8-bit interleaved RGB image.
struct Image {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  Image() = default;
  Image(std::int64_t w, std::int64_t h, std::uint8_t fill = 0);

  std::uint8_t at(std::int64_t x, std::int64_t y, int channel) const {
    return rgb[static_cast<std::size_t>((y * width + x) * 3 + channel)];
  }
  std::uint8_t& at(std::int64_t x, std::int64_t y, int channel) {
    return rgb[static_cast<std::size_t>((y * width + x) * 3 + channel)];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Reads binary (P6) or ASCII (P3) portable pixmaps with maxval <= 255.
Image read_ppm(const std::filesystem::path& path);
Image parse_ppm(const std::string& bytes);
/// Binary P6 encoding.
std::string encode_ppm(const Image& img);
void write_ppm(const std::filesystem::path& path, const Image& img);

/// Bilinear resampling with half-pixel centres and edge clamping.
Image resize_bilinear(const Image& img, std::int64_t width, std::int64_t height);

/// Copy of the w x h window whose top-left corner is (x0, y0).
Image crop(const Image& img, std::int64_t x0, std::int64_t y0, std::int64_t w, std::int64_t h);

}  // namespace medvlm::model
