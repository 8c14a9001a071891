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

#ifndef ATTNFILTER_CORE_SALIENCY_METRICS_H_
#define ATTNFILTER_CORE_SALIENCY_METRICS_H_

#include <cstdint>
#include <vector>

#include "core/grid.h"

namespace attnfilter {

// Binary fixation locations derived from a gaze density map.
struct FixationMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> fixations;
  std::size_t count = 0;
};

struct PlausibilityScores {
  double sim = 0.0;
  double pcc = 0.0;
  double auc_judd = 0.0;
  double nss = 0.0;
};

// Fraction of gaze pixels marked as fixations by FixationMapFromDensity.
constexpr double kFixationTopFraction = 0.05;

// All metrics below use population standard deviations and throw
// Error(kShape) on mismatched sizes, Error(kDegenerateInput) when an input
// has no mass or no variance.

// Histogram intersection of the two maps after normalizing each to sum 1.
double Sim(const Grid& saliency, const Grid& gaze);

// Pearson correlation coefficient.
double Pcc(const Grid& saliency, const Grid& gaze);

// Top ceil(5% * H*W) pixels of the density, ties broken in row-major order.
// Throws Error(kDegenerateInput) on a map without positive mass.
FixationMap FixationMapFromDensity(const Grid& gaze);

// Mean of the standardized saliency over fixation pixels.
double Nss(const Grid& saliency, const FixationMap& fixations);

// Area under the ROC curve of saliency as a fixation classifier. Thresholds
// sweep every distinct saliency value; ties contribute half, so the result
// equals P(s_fix > s_other) + 0.5 * P(s_fix == s_other).
double AucJudd(const Grid& saliency, const FixationMap& fixations);

// Scores a saliency map against a gaze density map, resampling the saliency
// to the density's resolution first.
PlausibilityScores EvaluatePlausibility(const SaliencyMap& saliency, const Grid& gaze);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_SALIENCY_METRICS_H_
