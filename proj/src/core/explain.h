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

#ifndef ATTNFILTER_CORE_EXPLAIN_H_
#define ATTNFILTER_CORE_EXPLAIN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "core/bundle.h"
#include "core/grid.h"

namespace attnfilter {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BinaryMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Which entries of the per-head rollout define the head weight w_h.
enum class WeightSource { kFullMatrix, kClsRow };

struct RolloutOptions {
  // Clamp (A * dA) at zero before adding the identity in the class variant.
  bool clamp_modulation = false;
  WeightSource weight_source = WeightSource::kFullMatrix;
};

// Per-head layer aggregates and their max-value weights.
struct HeadAggregate {
  std::vector<Matrix> per_head;
  std::vector<double> weights;
};

// K-sigma binarization of each head aggregate.
struct FilteredHeads {
  std::vector<BinaryMatrix> binary;
  std::vector<double> mean;
  std::vector<double> stddev;  // population
  double k = 0.0;
};

// CLS query row without its self-entry, reshaped to side x side.
struct PatchGrid {
  std::size_t side = 0;
  std::vector<double> values;

  Grid AsGrid() const { return Grid(side, side, values); }
};

// Divides every row with a positive sum by that sum. Rows summing to
// <= 1e-12 (possible only for gradient-modulated inputs) are left as is.
void RowNormalize(Matrix& m);

// Row-normalized (a + I). Throws Error(kNumeric) on non-finite entries.
Matrix AugmentWithIdentity(const Matrix& a);

// (a .* g) + I, not normalized. Throws Error(kShape) on mismatched shapes.
Matrix GradModulate(const Matrix& a, const Matrix& g, bool clamp = false);

// Per head h: M^(L) * ... * M^(1) with M^(l) the identity-augmented,
// row-normalized attention of layer l (gradient-modulated when class_id is
// set). Throws Error(kGradientMissing) if the class has no gradients.
HeadAggregate PerHeadRollout(const AttentionBundle& bundle,
                             std::optional<std::int64_t> class_id = std::nullopt,
                             const RolloutOptions& options = {});

// binary(i,j) = [agg(i,j) >= mean + k * stddev], statistics per head over all
// T*T entries.
FilteredHeads KSigmaFilter(const HeadAggregate& aggregate, double k);

// Sum_h weights[h] * binary[h], accumulated in head order.
Matrix AggregateHeads(const FilteredHeads& filtered, std::span<const double> weights);

// Throws Error(kGeometry) if T - 1 is not a perfect square.
PatchGrid ExtractClsMap(const Matrix& m);

// Bilinear upsampling to height x width followed by min-max normalization.
SaliencyMap ToSaliency(const PatchGrid& grid, std::size_t height, std::size_t width);

SaliencyMap Rfem(const AttentionBundle& bundle, double k,
                 const RolloutOptions& options = {});
SaliencyMap RfemClass(const AttentionBundle& bundle, std::int64_t class_id, double k,
                      const RolloutOptions& options = {});

// Head-averaged attention rollout.
SaliencyMap RolloutBaseline(const AttentionBundle& bundle);
// Gradient-scaled rollout: head mean of (A .* dA), negatives clamped.
SaliencyMap SawBaseline(const AttentionBundle& bundle, std::int64_t class_id);
// Last layer only: head mean of max(A .* dA, 0), CLS row.
SaliencyMap GradCamBaseline(const AttentionBundle& bundle, std::int64_t class_id);

enum class Method { kRfem, kRfemClass, kRollout, kSaw, kGradCam, kRandom, kCbCam };

std::string_view MethodName(Method method);
std::optional<Method> ParseMethod(std::string_view name);
bool MethodNeedsClass(Method method);

struct ExplainOptions {
  double k = 1.0;
  // Target class; nullopt means the argmax of the bundle logits.
  std::optional<std::int64_t> class_id;
  RolloutOptions rollout;
  std::uint64_t seed = 0;  // random baseline only
};

// Default K and the ablation sweep grid.
constexpr double kDefaultK = 1.0;
inline constexpr double kKSweep[] = {-0.5, 0.0, 0.5, 1.0, 1.5, 2.0};

SaliencyMap Explain(const AttentionBundle& bundle, Method method,
                    const ExplainOptions& options);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_EXPLAIN_H_
