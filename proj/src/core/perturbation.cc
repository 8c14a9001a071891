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

#include "core/perturbation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "core/error.h"

namespace attnfilter {
namespace {

std::vector<float> ExpandFill(std::span<const float> fill, std::size_t channels) {
  if (fill.size() == 1) return std::vector<float>(channels, fill[0]);
  if (fill.size() != channels) {
    Fail(ErrorCode::kShape, "fill has " + std::to_string(fill.size()) +
                                " values for an image with " + std::to_string(channels) +
                                " channels");
  }
  return {fill.begin(), fill.end()};
}

void CheckImageMatchesMap(const Image& image, const Grid& saliency) {
  if (image.height != saliency.rows || image.width != saliency.cols) {
    Fail(ErrorCode::kShape, "image is " + std::to_string(image.height) + "x" +
                                std::to_string(image.width) + " but the saliency map is " +
                                std::to_string(saliency.rows) + "x" +
                                std::to_string(saliency.cols));
  }
  if (image.values.size() != image.channels * image.NumPixels()) {
    Fail(ErrorCode::kShape, "image value count does not match its shape");
  }
  if (image.NumPixels() == 0) Fail(ErrorCode::kShape, "empty image");
}

// Copies pixel `p` of `src` (all channels) into `dst`.
void CopyPixel(const Image& src, Image& dst, std::size_t p) {
  const std::size_t hw = src.NumPixels();
  for (std::size_t c = 0; c < src.channels; ++c) dst.values[c * hw + p] = src.values[c * hw + p];
}

void FillPixel(Image& dst, std::size_t p, const std::vector<float>& fill) {
  const std::size_t hw = dst.NumPixels();
  for (std::size_t c = 0; c < dst.channels; ++c) dst.values[c * hw + p] = fill[c];
}

PerturbationCurve RunCurve(const Image& image, const Grid& saliency, const ScoreFn& score,
                           RelevanceOrder order, PerturbationMode mode,
                           const CurveOptions& options) {
  CheckImageMatchesMap(image, saliency);
  const std::vector<float> fill = ExpandFill(options.fill, image.channels);
  std::vector<std::size_t> ranking = PixelRanking(saliency);
  if (order == RelevanceOrder::kLeRF) std::reverse(ranking.begin(), ranking.end());

  Image work = image;
  if (mode == PerturbationMode::kInsertion) {
    for (std::size_t p = 0; p < image.NumPixels(); ++p) FillPixel(work, p, fill);
  }
  const std::size_t total = image.NumPixels();
  PerturbationCurve curve;
  curve.order = order;
  curve.mode = mode;
  std::size_t applied = 0;
  for (std::size_t k : MaskingSchedule(total, options.step_pixels)) {
    for (; applied < k; ++applied) {
      const std::size_t p = ranking[applied];
      if (mode == PerturbationMode::kDeletion) {
        FillPixel(work, p, fill);
      } else {
        CopyPixel(image, work, p);
      }
    }
    curve.fractions.push_back(static_cast<double>(k) / static_cast<double>(total));
    curve.scores.push_back(score(work));
  }
  return curve;
}

}  // namespace

std::vector<std::size_t> PixelRanking(const Grid& saliency) {
  std::vector<std::size_t> order(saliency.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return saliency.values[a] > saliency.values[b];
  });
  return order;
}

std::vector<std::size_t> MaskingSchedule(std::size_t total_pixels, std::size_t step_pixels) {
  if (step_pixels == 0) Fail(ErrorCode::kInvalidArgument, "step_pixels must be >= 1");
  std::vector<std::size_t> out;
  out.reserve(total_pixels / step_pixels + 2);
  for (std::size_t k = 0; k < total_pixels; k += step_pixels) out.push_back(k);
  out.push_back(total_pixels);
  return out;
}

std::size_t StepForCount(std::size_t total_pixels, std::size_t steps) {
  if (steps == 0) Fail(ErrorCode::kInvalidArgument, "steps must be >= 1");
  return std::max<std::size_t>(1, (total_pixels + steps - 1) / steps);
}

PerturbationCurve DeletionCurve(const Image& image, const Grid& saliency,
                                const ScoreFn& score, RelevanceOrder order,
                                const CurveOptions& options) {
  return RunCurve(image, saliency, score, order, PerturbationMode::kDeletion, options);
}

PerturbationCurve InsertionCurve(const Image& image, const Grid& saliency,
                                 const ScoreFn& score, RelevanceOrder order,
                                 const CurveOptions& options) {
  return RunCurve(image, saliency, score, order, PerturbationMode::kInsertion, options);
}

double AucOfCurve(const PerturbationCurve& curve) {
  if (curve.fractions.size() < 2 || curve.fractions.size() != curve.scores.size()) {
    Fail(ErrorCode::kInvalidArgument, "a curve needs at least two points");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fractions.size(); ++i) {
    area += (curve.fractions[i] - curve.fractions[i - 1]) *
            (curve.scores[i] + curve.scores[i - 1]) / 2.0;
  }
  return area;
}

double DeltaAF(const Image& image, const Grid& saliency, const ScoreFn& score,
               const CurveOptions& options) {
  const double morf =
      AucOfCurve(DeletionCurve(image, saliency, score, RelevanceOrder::kMoRF, options));
  const double lerf =
      AucOfCurve(DeletionCurve(image, saliency, score, RelevanceOrder::kLeRF, options));
  return lerf - morf;
}

AverageResult AverageDrop(std::span<const ConfidencePair> pairs) {
  AverageResult r;
  double sum = 0.0;
  for (const ConfidencePair& s : pairs) {
    if (s.p == 0.0) {
      ++r.skipped;
      Warn("average drop: skipping a sample with zero original confidence");
      continue;
    }
    sum += std::max(0.0, s.p - s.o) / s.p;
    ++r.used;
  }
  r.value = r.used ? sum / static_cast<double>(r.used) : 0.0;
  return r;
}

AverageResult AverageIncrease(std::span<const ConfidencePair> pairs) {
  AverageResult r;
  double sum = 0.0;
  for (const ConfidencePair& s : pairs) {
    sum += s.o > s.p ? 1.0 : 0.0;
    ++r.used;
  }
  r.value = r.used ? sum / static_cast<double>(r.used) : 0.0;
  return r;
}

AverageResult AverageGain(std::span<const ConfidencePair> pairs) {
  AverageResult r;
  double sum = 0.0;
  for (const ConfidencePair& s : pairs) {
    if (s.p == 1.0) {
      ++r.skipped;
      Warn("average gain: skipping a sample with original confidence 1");
      continue;
    }
    sum += std::max(0.0, s.o - s.p) / (1.0 - s.p);
    ++r.used;
  }
  r.value = r.used ? sum / static_cast<double>(r.used) : 0.0;
  return r;
}

Image MaskToExplanation(const Image& image, const Grid& saliency, double threshold,
                        std::span<const float> fill) {
  CheckImageMatchesMap(image, saliency);
  const std::vector<float> f = ExpandFill(fill, image.channels);
  Image out = image;
  for (std::size_t p = 0; p < image.NumPixels(); ++p) {
    if (!(saliency.values[p] >= threshold)) FillPixel(out, p, f);
  }
  return out;
}

CorrectnessScores EvaluateCorrectness(const Image& image, const SaliencyMap& saliency,
                                      const ScoreFn& score, const CorrectnessOptions& options) {
  const Grid s = saliency.ToGrid();
  CorrectnessScores out;
  const PerturbationCurve del_morf =
      DeletionCurve(image, s, score, RelevanceOrder::kMoRF, options.curve);
  const PerturbationCurve del_lerf =
      DeletionCurve(image, s, score, RelevanceOrder::kLeRF, options.curve);
  const PerturbationCurve ins_morf =
      InsertionCurve(image, s, score, RelevanceOrder::kMoRF, options.curve);
  out.dauc = AucOfCurve(del_morf);
  out.iauc = AucOfCurve(ins_morf);
  out.delta_a_f = AucOfCurve(del_lerf) - out.dauc;
  out.confidence.p = del_morf.scores.front();
  out.confidence.o = score(
      MaskToExplanation(image, s, options.support_threshold, options.curve.fill));
  return out;
}

SaliencyMap RandomBaselineMap(std::size_t height, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  SaliencyMap s;
  s.height = height;
  s.width = width;
  s.values.resize(height * width);
  for (float& v : s.values) {
    // 53 random mantissa bits -> [0,1); independent of the stdlib's
    // distribution implementation.
    v = static_cast<float>(static_cast<double>(gen() >> 11) * 0x1.0p-53);
    if (v >= 1.0f) v = std::nextafter(1.0f, 0.0f);
  }
  s.non_degenerate = height * width > 1;
  return s;
}

SaliencyMap CbCamMap(std::size_t height, std::size_t width) {
  Grid seed(7, 7);
  seed.at(3, 3) = 1.0;
  return NormalizeToSaliency(ResizeBilinear(seed, height, width));
}

}  // namespace attnfilter
