// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/model/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"

namespace medvlm::model {

Image::Image(std::int64_t w, std::int64_t h, std::uint8_t fill)
    : width(w), height(h), rgb(static_cast<std::size_t>(w * h * 3), fill) {
  if (w <= 0 || h <= 0) throw ValidationError("image dimensions must be positive");
}

namespace {

class PnmReader {
 public:
  explicit PnmReader(const std::string& bytes) : s_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw ValidationError("ppm: truncated header");
    return s_.substr(start, pos_ - start);
  }

  std::int64_t number() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw ValidationError("ppm: expected a number, got '" + t + "'");
    }
    return std::stoll(t);
  }

  // Exactly one whitespace byte separates the header from binary data.
  void skip_single_space() {
    if (pos_ >= s_.size() || !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      throw ValidationError("ppm: missing separator before pixel data");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Image parse_ppm(const std::string& bytes) {
  PnmReader r(bytes);
  const std::string magic = r.token();
  if (magic != "P6" && magic != "P3") throw ValidationError("ppm: unsupported magic '" + magic + "'");
  const std::int64_t w = r.number(), h = r.number(), maxval = r.number();
  if (w <= 0 || h <= 0) throw ValidationError("ppm: non-positive dimensions");
  if (maxval <= 0 || maxval > 255) throw ValidationError("ppm: only 8-bit maxval is supported");
  Image img(w, h);
  const std::size_t n = img.rgb.size();
  auto rescale = [maxval](std::int64_t v) {
    if (v > maxval) throw ValidationError("ppm: sample exceeds maxval");
    return static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  };
  if (magic == "P3") {
    for (std::size_t i = 0; i < n; ++i) img.rgb[i] = rescale(r.number());
  } else {
    r.skip_single_space();
    if (bytes.size() - r.pos() < n) throw ValidationError("ppm: truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) img.rgb[i] = rescale(static_cast<std::uint8_t>(bytes[r.pos() + i]));
  }
  return img;
}

Image read_ppm(const std::filesystem::path& path) {
  try {
    return parse_ppm(util::read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  return out;
}

void write_ppm(const std::filesystem::path& path, const Image& img) { util::write_file_atomic(path, encode_ppm(img)); }

Image resize_bilinear(const Image& img, std::int64_t width, std::int64_t height) {
  if (width <= 0 || height <= 0) throw ValidationError("resize: target dimensions must be positive");
  if (width == img.width && height == img.height) return img;
  Image out(width, height);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  for (std::int64_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    const auto y0 = static_cast<std::int64_t>(std::floor(fy));
    const std::int64_t y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::int64_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      const auto x0 = static_cast<std::int64_t>(std::floor(fx));
      const std::int64_t x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - static_cast<double>(x0);
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(x0, y0, c) + (img.at(x1, y0, c) - img.at(x0, y0, c)) * wx;
        const double bot = img.at(x0, y1, c) + (img.at(x1, y1, c) - img.at(x0, y1, c)) * wx;
        const double v = top + (bot - top) * wy;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
      }
    }
  }
  return out;
}

Image crop(const Image& img, std::int64_t x0, std::int64_t y0, std::int64_t w, std::int64_t h) {
  if (x0 < 0 || y0 < 0 || x0 + w > img.width || y0 + h > img.height) {
    throw ValidationError("crop window outside image");
  }
  Image out(w, h);
  for (std::int64_t y = 0; y < h; ++y) {
    std::copy_n(img.rgb.data() + ((y0 + y) * img.width + x0) * 3, w * 3, out.rgb.data() + y * w * 3);
  }
  return out;
}

}  // namespace medvlm::model
