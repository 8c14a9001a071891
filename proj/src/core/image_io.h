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

#ifndef ATTNFILTER_CORE_IMAGE_IO_H_
#define ATTNFILTER_CORE_IMAGE_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>

#include "core/grid.h"

namespace attnfilter {

// 8-bit PNG decoded to [channels, H, W] with values / 255. Gray, gray+alpha,
// RGB and RGBA inputs are accepted; alpha is composited away.
Image ReadPngImage(const std::filesystem::path& path);

// Gaze density from a 2-D NPY grid ([H,W] or [1,H,W]) or a grayscale PNG
// (density = value / 255). Colour PNGs are averaged over channels.
Grid LoadGazeMap(const std::filesystem::path& path);

// Image from an NPY tensor ([C,H,W] or [H,W]) or from a PNG, in which case
// each channel is standardized as (v/255 - mean[c]) / std[c]. Empty mean/std
// leave the PNG values in [0,1].
Image LoadImage(const std::filesystem::path& path, std::span<const double> mean = {},
                std::span<const double> std = {});

// Colour of a value in [0,1] under the fixed viridis-like lookup table.
std::array<std::uint8_t, 3> ColormapLookup(double value);

inline constexpr double kOverlayAlpha = 0.5;

// Saliency rendered through the colormap, RGB.
void WriteHeatmapPng(const std::filesystem::path& path, const SaliencyMap& map);
// Heatmap blended at alpha 0.5 over `background` (min-max scaled per image,
// gray if it has one channel). The map is resized to the image when needed.
void WriteOverlayPng(const std::filesystem::path& path, const SaliencyMap& map,
                     const Image& background);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_IMAGE_IO_H_
