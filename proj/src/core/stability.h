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

#ifndef ATTNFILTER_CORE_STABILITY_H_
#define ATTNFILTER_CORE_STABILITY_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "core/grid.h"
#include "core/perturbation.h"

namespace attnfilter {

struct PerturbationConfig {
  double epsilon = 0.0;  // L2 radius in input units
  std::size_t n_samples = 50;
  std::uint64_t seed = 0;
};

constexpr std::size_t kDefaultStabilitySamples = 50;
constexpr double kDefaultRelativeEpsilon = 0.01;

// epsilon = 0.01 * ||x0||_2 (falls back to 0.01 for an all-zero image).
PerturbationConfig DefaultPerturbationConfig(const Image& x0, std::uint64_t seed = 0);

// Produces a flattened H*W explanation map for an image.
using ExplainFn = std::function<std::vector<double>(const Image&)>;

// n_samples points drawn uniformly from the open L2 ball of radius epsilon
// around x0. Samples are drawn sequentially from one seeded generator, so
// the first k samples do not depend on n_samples.
std::vector<Image> SampleNeighborhood(const Image& x0, const PerturbationConfig& config);

// First-order surrogate E_X = g(X0) + <S_X0, channel-sum(X - X0)>.
struct SurrogateModel {
  Image anchor;
  std::vector<double> saliency;  // H*W
  double base_score = 0.0;
};

double SurrogateEval(const SurrogateModel& model, const Image& x);

// max ||S_x0 - S_x~||_2 / ||x0 - x~||_2 over the sampled neighborhood.
double Lip(const Image& x0, const ExplainFn& explain, const PerturbationConfig& config);

// max |E_x0(m) - E_x~(m)| / ||x0 - x~||_2 with m the midpoint of x0 and x~.
double Lss(const Image& x0, const ExplainFn& explain, const ScoreFn& score,
           const PerturbationConfig& config);

struct StabilityScores {
  double lip = 0.0;
  double lss = 0.0;
  std::size_t samples_used = 0;
};

// LIP and LSS from one shared set of samples and explanations.
StabilityScores EvaluateStability(const Image& x0, const ExplainFn& explain,
                                  const ScoreFn& score, const PerturbationConfig& config);

double L2Distance(const Image& a, const Image& b);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_STABILITY_H_
