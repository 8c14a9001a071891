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

#include "core/grid.h"

#include <algorithm>
#include <cmath>

#include "core/error.h"

namespace attnfilter {
namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double w_lo;
  double w_hi;
};

std::vector<Tap> AxisTaps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  if (in == 1 || out == 1) {
    for (auto& t : taps) t = {0, 0, 1.0, 0.0};
    return taps;
  }
  const std::size_t denom = out - 1;
  for (std::size_t i = 0; i < out; ++i) {
    const std::size_t num = i * (in - 1);
    const std::size_t base = num / denom;
    const std::size_t rem = num % denom;
    if (rem == 0) {
      taps[i] = {base, base, 1.0, 0.0};
    } else {
      taps[i] = {base, base + 1, static_cast<double>(denom - rem) / static_cast<double>(denom),
                 static_cast<double>(rem) / static_cast<double>(denom)};
    }
  }
  return taps;
}

}  // namespace

Grid SaliencyMap::ToGrid() const {
  return Grid(height, width, std::vector<double>(values.begin(), values.end()));
}

Image Image::FromTensor(const FloatTensor& t) {
  Image img;
  if (t.shape.size() == 3) {
    img.channels = t.shape[0];
    img.height = t.shape[1];
    img.width = t.shape[2];
  } else if (t.shape.size() == 2) {
    img.channels = 1;
    img.height = t.shape[0];
    img.width = t.shape[1];
  } else {
    Fail(ErrorCode::kShape, "image tensor must be [C,H,W] or [H,W], got " +
                                ShapeToString(t.shape));
  }
  img.values = t.values;
  return img;
}

FloatTensor Image::ToTensor() const { return FloatTensor{{channels, height, width}, values}; }

Grid ResizeBilinear(const Grid& in, std::size_t rows, std::size_t cols) {
  if (in.rows == 0 || in.cols == 0) Fail(ErrorCode::kShape, "cannot resize an empty grid");
  if (in.rows == rows && in.cols == cols) return in;
  const std::vector<Tap> ty = AxisTaps(in.rows, rows);
  const std::vector<Tap> tx = AxisTaps(in.cols, cols);
  Grid out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Tap& y = ty[r];
    for (std::size_t c = 0; c < cols; ++c) {
      const Tap& x = tx[c];
      const double a = in.at(y.lo, x.lo), b = in.at(y.lo, x.hi);
      const double d = in.at(y.hi, x.lo), e = in.at(y.hi, x.hi);
      const double top = x.w_lo * a + x.w_hi * b;
      const double bottom = x.w_lo * d + x.w_hi * e;
      // Rounding can push a blend of equal taps off their value; the exact
      // result always lies within the taps' range.
      out.at(r, c) = std::clamp(y.w_lo * top + y.w_hi * bottom, std::min({a, b, d, e}),
                                std::max({a, b, d, e}));
    }
  }
  return out;
}

SaliencyMap NormalizeToSaliency(const Grid& g) {
  SaliencyMap s;
  s.height = g.rows;
  s.width = g.cols;
  s.values.assign(g.size(), 0.0f);
  if (g.values.empty()) return s;
  double lo = g.values.front(), hi = g.values.front();
  for (double v : g.values) {
    if (!std::isfinite(v)) Fail(ErrorCode::kNumeric, "saliency field has a non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) return s;
  const double range = hi - lo;
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.values[i] = static_cast<float>((g.values[i] - lo) / range);
  }
  s.non_degenerate = true;
  return s;
}

SaliencyMap SaliencyFromValues(std::size_t height, std::size_t width,
                               std::vector<float> values) {
  if (values.size() != height * width) {
    Fail(ErrorCode::kShape, "saliency map holds " + std::to_string(values.size()) +
                                " values for " + std::to_string(height) + "x" +
                                std::to_string(width));
  }
  SaliencyMap s{height, width, std::move(values), false};
  float lo = 1.0f, hi = 0.0f;
  for (float v : s.values) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      Fail(ErrorCode::kNumeric, "saliency values must be finite and within [0,1]");
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  s.non_degenerate = hi > lo;
  return s;
}

Grid SaliencyAtResolution(const SaliencyMap& s, std::size_t rows, std::size_t cols) {
  Grid g = s.ToGrid();
  if (g.rows == rows && g.cols == cols) return g;
  return ResizeBilinear(g, rows, cols);
}

std::vector<double> ChannelSum(const Image& image) {
  const std::size_t hw = image.NumPixels();
  std::vector<double> out(hw, 0.0);
  for (std::size_t c = 0; c < image.channels; ++c) {
    const float* plane = image.values.data() + c * hw;
    for (std::size_t i = 0; i < hw; ++i) out[i] += plane[i];
  }
  return out;
}

}  // namespace attnfilter
