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

#ifndef ATTNFILTER_CORE_PERTURBATION_H_
#define ATTNFILTER_CORE_PERTURBATION_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/grid.h"

namespace attnfilter {

// Model confidence for the target class on an image.
using ScoreFn = std::function<double(const Image&)>;

enum class RelevanceOrder { kMoRF, kLeRF };
enum class PerturbationMode { kDeletion, kInsertion };

struct PerturbationCurve {
  std::vector<double> fractions;  // 0 .. 1, strictly increasing
  std::vector<double> scores;
  RelevanceOrder order = RelevanceOrder::kMoRF;
  PerturbationMode mode = PerturbationMode::kDeletion;
};

constexpr std::size_t kDefaultStepPixels = 50;
constexpr double kDefaultSupportThreshold = 0.5;

struct CurveOptions {
  std::size_t step_pixels = kDefaultStepPixels;
  // Replacement value per channel (a single entry is broadcast).
  std::vector<float> fill = {0.0f};
};

// Pixel indices by descending saliency; ties keep row-major order.
std::vector<std::size_t> PixelRanking(const Grid& saliency);

// Cumulative perturbed-pixel counts: 0, step, 2*step, ..., total.
std::vector<std::size_t> MaskingSchedule(std::size_t total_pixels, std::size_t step_pixels);

// Step that splits `total_pixels` into `steps` roughly equal increments.
std::size_t StepForCount(std::size_t total_pixels, std::size_t steps);

// Deletion: start from the intact image and replace ranked pixels with the
// fill. Insertion: start from the all-fill image and restore ranked pixels.
// MoRF walks the ranking from the top, LeRF from the bottom. Any exception
// from `score` aborts the curve.
PerturbationCurve DeletionCurve(const Image& image, const Grid& saliency,
                                const ScoreFn& score, RelevanceOrder order,
                                const CurveOptions& options = {});
PerturbationCurve InsertionCurve(const Image& image, const Grid& saliency,
                                 const ScoreFn& score, RelevanceOrder order,
                                 const CurveOptions& options = {});

// Trapezoidal area over the fraction axis. Throws Error(kInvalidArgument)
// for fewer than two points.
double AucOfCurve(const PerturbationCurve& curve);

// auc(deletion LeRF) - auc(deletion MoRF).
double DeltaAF(const Image& image, const Grid& saliency, const ScoreFn& score,
               const CurveOptions& options = {});

// Original confidence p and confidence o on the explanation-masked image.
struct ConfidencePair {
  double p = 0.0;
  double o = 0.0;
};

struct AverageResult {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// mean(max(0, p - o) / p); samples with p == 0 are skipped with a warning.
AverageResult AverageDrop(std::span<const ConfidencePair> pairs);
// mean([o > p]).
AverageResult AverageIncrease(std::span<const ConfidencePair> pairs);
// mean(max(0, o - p) / (1 - p)); samples with p == 1 are skipped with a warning.
AverageResult AverageGain(std::span<const ConfidencePair> pairs);

// Keeps pixels whose saliency is >= threshold, fills the rest.
Image MaskToExplanation(const Image& image, const Grid& saliency, double threshold,
                        std::span<const float> fill);

struct CorrectnessOptions {
  CurveOptions curve;
  double support_threshold = kDefaultSupportThreshold;
};

struct CorrectnessScores {
  double iauc = 0.0;       // insertion, MoRF
  double dauc = 0.0;       // deletion, MoRF
  double delta_a_f = 0.0;  // deletion LeRF - deletion MoRF
  ConfidencePair confidence;
};

// One image's correctness metrics. The saliency must match the image size.
CorrectnessScores EvaluateCorrectness(const Image& image, const SaliencyMap& saliency,
                                      const ScoreFn& score,
                                      const CorrectnessOptions& options = {});

// I.i.d. uniform [0,1) map, reproducible for a given seed.
SaliencyMap RandomBaselineMap(std::size_t height, std::size_t width, std::uint64_t seed);

// Centre-biased map: a 7x7 grid with a single 1 at (3,3), bilinearly
// upsampled to height x width and normalized.
SaliencyMap CbCamMap(std::size_t height, std::size_t width);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_PERTURBATION_H_
