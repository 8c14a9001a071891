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

#ifndef ATTNFILTER_CORE_GRID_H_
#define ATTNFILTER_CORE_GRID_H_

#include <cstddef>
#include <vector>

#include "core/npy.h"

namespace attnfilter {

// Row-major 2-D field of doubles (patch grids, gaze densities, metric inputs).
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}
  Grid(std::size_t r, std::size_t c, std::vector<double> v)
      : rows(r), cols(c), values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool operator==(const Grid&) const = default;
};

// Explanation map normalized to [0,1]. `non_degenerate` is false when the
// source field was constant (the map is then all zeros).
struct SaliencyMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;
  bool non_degenerate = false;

  Grid ToGrid() const;
  bool operator==(const SaliencyMap&) const = default;
};

// Image tensor [channels, height, width] in the oracle's input space.
struct Image {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;

  std::size_t NumPixels() const { return height * width; }
  static Image FromTensor(const FloatTensor& t);
  FloatTensor ToTensor() const;
  bool operator==(const Image&) const = default;
};

// Bilinear resampling with corner-aligned sampling: output pixel i maps to
// source coordinate i * (in - 1) / (out - 1). Interpolation weights come from
// exact integer remainders, so mirror-symmetric inputs yield bit-exact
// mirror-symmetric outputs.
Grid ResizeBilinear(const Grid& in, std::size_t rows, std::size_t cols);

// Min-max normalization to [0,1]; constant input yields zeros and
// non_degenerate=false. Throws Error(kNumeric) on non-finite input.
SaliencyMap NormalizeToSaliency(const Grid& g);

// Saliency map taken verbatim (values must already lie in [0,1]).
SaliencyMap SaliencyFromValues(std::size_t height, std::size_t width,
                               std::vector<float> values);

// Resize to (rows, cols) unless the map already has that size.
Grid SaliencyAtResolution(const SaliencyMap& s, std::size_t rows, std::size_t cols);

// Sum over channels of an image: a single H x W field.
std::vector<double> ChannelSum(const Image& image);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_GRID_H_
