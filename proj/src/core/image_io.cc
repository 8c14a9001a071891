/*
 * Copyright 2026 The attnfilter Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/image_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "core/error.h"
#include "core/npy.h"

namespace attnfilter {
namespace {

// Anchors sampled from the viridis colormap at 0, 1/8, ..., 1.
constexpr std::array<std::array<double, 3>, 9> kAnchors = {{
    {68, 1, 84},
    {71, 44, 122},
    {59, 81, 139},
    {44, 113, 142},
    {33, 144, 141},
    {39, 173, 129},
    {92, 200, 99},
    {170, 220, 50},
    {253, 231, 37},
}};

void WriteRgbPng(const std::filesystem::path& path, std::size_t width, std::size_t height,
                 const std::vector<std::uint8_t>& rgb) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    Fail(ErrorCode::kIo, "writing " + path.string() + ": " + msg);
  }
}

std::vector<std::uint8_t> Colorize(const std::vector<double>& values) {
  std::vector<std::uint8_t> rgb(values.size() * 3);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto c = ColormapLookup(values[i]);
    std::copy(c.begin(), c.end(), rgb.begin() + 3 * i);
  }
  return rgb;
}

}  // namespace

Image ReadPngImage(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) Fail(ErrorCode::kIo, "cannot open " + path.string());
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    Fail(ErrorCode::kFormat, path.string() + ": " + msg);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image img;
  img.channels = color ? 3 : 1;
  img.height = image.height;
  img.width = image.width;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    Fail(ErrorCode::kFormat, path.string() + ": " + msg);
  }
  img.values.resize(img.channels * img.NumPixels());
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t p = 0; p < img.NumPixels(); ++p) {
      img.values[c * img.NumPixels() + p] = buf[p * img.channels + c] / 255.0f;
    }
  }
  return img;
}

Grid LoadGazeMap(const std::filesystem::path& path) {
  if (path.extension() == ".png") {
    const Image img = ReadPngImage(path);
    Grid g(img.height, img.width);
    for (std::size_t p = 0; p < img.NumPixels(); ++p) {
      double s = 0.0;
      for (std::size_t c = 0; c < img.channels; ++c) s += img.values[c * img.NumPixels() + p];
      g.values[p] = s / static_cast<double>(img.channels);
    }
    return g;
  }
  const FloatTensor t = ReadTensor(path);
  const auto& s = t.shape;
  if (!(s.size() == 2 || (s.size() == 3 && s[0] == 1))) {
    Fail(ErrorCode::kShape, "gaze map " + path.string() + " has shape " + ShapeToString(s));
  }
  Grid g(s[s.size() - 2], s[s.size() - 1]);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(t.values[i])) Fail(ErrorCode::kNumeric, "non-finite gaze value in " + path.string());
    g.values[i] = t.values[i];
  }
  return g;
}

Image LoadImage(const std::filesystem::path& path, std::span<const double> mean,
                std::span<const double> std) {
  if (path.extension() != ".png") return Image::FromTensor(ReadTensor(path));
  Image img = ReadPngImage(path);
  if (mean.empty() && std.empty()) return img;
  if (mean.size() != img.channels || std.size() != img.channels) {
    Fail(ErrorCode::kShape, "normalization has " + std::to_string(mean.size()) +
                                " channels, image " + path.string() + " has " +
                                std::to_string(img.channels));
  }
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t p = 0; p < img.NumPixels(); ++p) {
      float& v = img.values[c * img.NumPixels() + p];
      v = static_cast<float>((v - mean[c]) / std[c]);
    }
  }
  return img;
}

std::array<std::uint8_t, 3> ColormapLookup(double value) {
  const double v = std::isfinite(value) ? std::clamp(value, 0.0, 1.0) : 0.0;
  const double pos = v * (kAnchors.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos), kAnchors.size() - 2);
  const double t = pos - static_cast<double>(i);
  std::array<std::uint8_t, 3> out;
  for (int c = 0; c < 3; ++c) {
    const double x = kAnchors[i][c] * (1.0 - t) + kAnchors[i + 1][c] * t;
    out[c] = static_cast<std::uint8_t>(std::lround(x));
  }
  return out;
}

void WriteHeatmapPng(const std::filesystem::path& path, const SaliencyMap& map) {
  const Grid g = map.ToGrid();
  WriteRgbPng(path, map.width, map.height, Colorize(g.values));
}

void WriteOverlayPng(const std::filesystem::path& path, const SaliencyMap& map,
                     const Image& background) {
  const std::size_t n = background.NumPixels();
  if (n == 0 || background.channels == 0) Fail(ErrorCode::kShape, "empty overlay background");
  const Grid g = SaliencyAtResolution(map, background.height, background.width);
  const auto [lo_it, hi_it] = std::minmax_element(background.values.begin(), background.values.end());
  const double lo = *lo_it, span = *hi_it > *lo_it ? *hi_it - *lo_it : 1.0;
  std::vector<std::uint8_t> rgb = Colorize(g.values);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t src = background.channels == 3 ? c : 0;
      const double base = 255.0 * (background.values[src * n + p] - lo) / span;
      const double mixed = kOverlayAlpha * rgb[3 * p + c] + (1.0 - kOverlayAlpha) * base;
      rgb[3 * p + c] = static_cast<std::uint8_t>(std::lround(std::clamp(mixed, 0.0, 255.0)));
    }
  }
  WriteRgbPng(path, background.width, background.height, rgb);
}

}  // namespace attnfilter
