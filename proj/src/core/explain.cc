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

#include "core/explain.h"

#include <cmath>

#include "core/error.h"
#include "core/perturbation.h"

namespace attnfilter {
namespace {

using FloatMatrixMap =
    Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

constexpr double kMinRowSum = 1e-12;

Matrix ToMatrix(std::span<const float> data, std::size_t tokens) {
  const auto t = static_cast<Eigen::Index>(tokens);
  return FloatMatrixMap(data.data(), t, t).cast<double>();
}

// Left-multiplies layer factors in order: P = M^(L) * ... * M^(1).
template <typename LayerFactor>
Matrix ChainLayers(std::size_t layers, LayerFactor&& factor) {
  Matrix product = factor(0);
  Matrix scratch(product.rows(), product.cols());
  for (std::size_t l = 1; l < layers; ++l) {
    scratch.noalias() = factor(l) * product;
    product.swap(scratch);
  }
  return product;
}

std::int64_t ResolveClass(const AttentionBundle& bundle,
                          std::optional<std::int64_t> class_id) {
  return class_id ? *class_id : bundle.PredictedClass();
}

SaliencyMap FinishCls(const Matrix& m, const AttentionBundle& bundle) {
  return ToSaliency(ExtractClsMap(m), bundle.geometry.image_height,
                    bundle.geometry.image_width);
}

void RequireGradients(const AttentionBundle& bundle, std::int64_t class_id) {
  if (!bundle.HasGradients(class_id)) {
    Fail(ErrorCode::kGradientMissing, "bundle '" + bundle.image_id +
                                          "' has no gradients for class " +
                                          std::to_string(class_id));
  }
}

// Mean over heads of layer l (optionally of A .* dA), summed in head order.
Matrix HeadMean(const AttentionBundle& bundle, std::size_t layer,
                const std::int64_t* class_id) {
  const BundleGeometry& g = bundle.geometry;
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(g.tokens),
                            static_cast<Eigen::Index>(g.tokens));
  for (std::size_t h = 0; h < g.heads; ++h) {
    Matrix a = ToMatrix(bundle.Attention(layer, h), g.tokens);
    if (class_id != nullptr) {
      a = a.cwiseProduct(ToMatrix(bundle.Gradient(*class_id, layer, h), g.tokens));
    }
    sum += a;
  }
  return sum / static_cast<double>(g.heads);
}

}  // namespace

void RowNormalize(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).sum();
    if (s > kMinRowSum) m.row(r) /= s;
  }
}

Matrix AugmentWithIdentity(const Matrix& a) {
  if (a.rows() != a.cols()) Fail(ErrorCode::kShape, "attention matrix must be square");
  if (!a.allFinite()) Fail(ErrorCode::kNumeric, "attention matrix has non-finite entries");
  Matrix out = a;
  out.diagonal().array() += 1.0;
  RowNormalize(out);
  return out;
}

Matrix GradModulate(const Matrix& a, const Matrix& g, bool clamp) {
  if (a.rows() != g.rows() || a.cols() != g.cols() || a.rows() != a.cols()) {
    Fail(ErrorCode::kShape, "attention/gradient shape mismatch: " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(g.rows()) + "x" +
                                std::to_string(g.cols()));
  }
  Matrix out = a.cwiseProduct(g);
  if (clamp) out = out.cwiseMax(0.0);
  out.diagonal().array() += 1.0;
  return out;
}

HeadAggregate PerHeadRollout(const AttentionBundle& bundle,
                             std::optional<std::int64_t> class_id,
                             const RolloutOptions& options) {
  const BundleGeometry& g = bundle.geometry;
  if (class_id) RequireGradients(bundle, *class_id);
  HeadAggregate agg;
  agg.per_head.reserve(g.heads);
  agg.weights.reserve(g.heads);
  for (std::size_t h = 0; h < g.heads; ++h) {
    Matrix product = ChainLayers(g.layers, [&](std::size_t l) {
      const Matrix a = ToMatrix(bundle.Attention(l, h), g.tokens);
      if (!class_id) return AugmentWithIdentity(a);
      if (!a.allFinite()) Fail(ErrorCode::kNumeric, "attention matrix has non-finite entries");
      Matrix m = GradModulate(a, ToMatrix(bundle.Gradient(*class_id, l, h), g.tokens),
                              options.clamp_modulation);
      if (!m.allFinite()) Fail(ErrorCode::kNumeric, "modulated attention is non-finite");
      RowNormalize(m);
      return m;
    });
    const double w = options.weight_source == WeightSource::kClsRow
                         ? product.row(0).maxCoeff()
                         : product.maxCoeff();
    agg.weights.push_back(w);
    agg.per_head.push_back(std::move(product));
  }
  return agg;
}

FilteredHeads KSigmaFilter(const HeadAggregate& aggregate, double k) {
  FilteredHeads out;
  out.k = k;
  for (const Matrix& m : aggregate.per_head) {
    if (!m.allFinite()) Fail(ErrorCode::kNumeric, "head aggregate has non-finite entries");
    const auto n = static_cast<double>(m.size());
    const double mean = m.sum() / n;
    const double var = (m.array() - mean).square().sum() / n;
    const double stddev = std::sqrt(var);
    const double threshold = mean + k * stddev;
    out.binary.push_back((m.array() >= threshold).cast<std::uint8_t>().matrix());
    out.mean.push_back(mean);
    out.stddev.push_back(stddev);
  }
  return out;
}

Matrix AggregateHeads(const FilteredHeads& filtered, std::span<const double> weights) {
  if (weights.size() != filtered.binary.size()) {
    Fail(ErrorCode::kShape, "got " + std::to_string(weights.size()) + " weights for " +
                                std::to_string(filtered.binary.size()) + " heads");
  }
  if (filtered.binary.empty()) Fail(ErrorCode::kShape, "no heads to aggregate");
  const BinaryMatrix& first = filtered.binary.front();
  Matrix sum = Matrix::Zero(first.rows(), first.cols());
  for (std::size_t h = 0; h < filtered.binary.size(); ++h) {
    sum += weights[h] * filtered.binary[h].cast<double>();
  }
  return sum;
}

PatchGrid ExtractClsMap(const Matrix& m) {
  const auto tokens = static_cast<std::size_t>(m.cols());
  if (tokens < 2 || m.rows() < 1) Fail(ErrorCode::kGeometry, "need at least one patch token");
  const std::size_t n = tokens - 1;
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n) {
    Fail(ErrorCode::kGeometry, "N = " + std::to_string(n) + " patches is not a perfect square");
  }
  PatchGrid grid;
  grid.side = side;
  grid.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) grid.values[j] = m(0, static_cast<Eigen::Index>(j + 1));
  return grid;
}

SaliencyMap ToSaliency(const PatchGrid& grid, std::size_t height, std::size_t width) {
  return NormalizeToSaliency(ResizeBilinear(grid.AsGrid(), height, width));
}

SaliencyMap Rfem(const AttentionBundle& bundle, double k, const RolloutOptions& options) {
  const HeadAggregate agg = PerHeadRollout(bundle, std::nullopt, options);
  const FilteredHeads filtered = KSigmaFilter(agg, k);
  return FinishCls(AggregateHeads(filtered, agg.weights), bundle);
}

SaliencyMap RfemClass(const AttentionBundle& bundle, std::int64_t class_id, double k,
                      const RolloutOptions& options) {
  const HeadAggregate agg = PerHeadRollout(bundle, class_id, options);
  const FilteredHeads filtered = KSigmaFilter(agg, k);
  return FinishCls(AggregateHeads(filtered, agg.weights), bundle);
}

SaliencyMap RolloutBaseline(const AttentionBundle& bundle) {
  const Matrix product = ChainLayers(bundle.geometry.layers, [&](std::size_t l) {
    return AugmentWithIdentity(HeadMean(bundle, l, nullptr));
  });
  return FinishCls(product, bundle);
}

SaliencyMap SawBaseline(const AttentionBundle& bundle, std::int64_t class_id) {
  RequireGradients(bundle, class_id);
  const Matrix product = ChainLayers(bundle.geometry.layers, [&](std::size_t l) {
    return AugmentWithIdentity(HeadMean(bundle, l, &class_id).cwiseMax(0.0));
  });
  return FinishCls(product, bundle);
}

SaliencyMap GradCamBaseline(const AttentionBundle& bundle, std::int64_t class_id) {
  RequireGradients(bundle, class_id);
  const BundleGeometry& g = bundle.geometry;
  const std::size_t last = g.layers - 1;
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(g.tokens),
                            static_cast<Eigen::Index>(g.tokens));
  for (std::size_t h = 0; h < g.heads; ++h) {
    sum += ToMatrix(bundle.Attention(last, h), g.tokens)
               .cwiseProduct(ToMatrix(bundle.Gradient(class_id, last, h), g.tokens))
               .cwiseMax(0.0);
  }
  return FinishCls(sum / static_cast<double>(g.heads), bundle);
}

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kRfem:
      return "rfem";
    case Method::kRfemClass:
      return "rfem-class";
    case Method::kRollout:
      return "rollout";
    case Method::kSaw:
      return "saw";
    case Method::kGradCam:
      return "gradcam";
    case Method::kRandom:
      return "random";
    case Method::kCbCam:
      return "cbcam";
  }
  return "unknown";
}

std::optional<Method> ParseMethod(std::string_view name) {
  for (Method m : {Method::kRfem, Method::kRfemClass, Method::kRollout, Method::kSaw,
                   Method::kGradCam, Method::kRandom, Method::kCbCam}) {
    if (MethodName(m) == name) return m;
  }
  return std::nullopt;
}

bool MethodNeedsClass(Method method) {
  return method == Method::kRfemClass || method == Method::kSaw || method == Method::kGradCam;
}

SaliencyMap Explain(const AttentionBundle& bundle, Method method,
                    const ExplainOptions& options) {
  const BundleGeometry& g = bundle.geometry;
  switch (method) {
    case Method::kRfem:
      return Rfem(bundle, options.k, options.rollout);
    case Method::kRfemClass:
      return RfemClass(bundle, ResolveClass(bundle, options.class_id), options.k,
                       options.rollout);
    case Method::kRollout:
      return RolloutBaseline(bundle);
    case Method::kSaw:
      return SawBaseline(bundle, ResolveClass(bundle, options.class_id));
    case Method::kGradCam:
      return GradCamBaseline(bundle, ResolveClass(bundle, options.class_id));
    case Method::kRandom:
      return RandomBaselineMap(g.image_height, g.image_width, options.seed);
    case Method::kCbCam:
      return CbCamMap(g.image_height, g.image_width);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown method");
}

}  // namespace attnfilter
