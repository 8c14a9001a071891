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

#ifndef ATTNFILTER_CORE_BUNDLE_H_
#define ATTNFILTER_CORE_BUNDLE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/npy.h"

namespace attnfilter {

struct BundleGeometry {
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t tokens = 0;  // N + 1, the +1 being the [CLS] token
  std::size_t patch_size = 0;
  std::size_t image_height = 0;
  std::size_t image_width = 0;
  std::size_t class_count = 0;

  std::size_t NumPatches() const { return tokens - 1; }
  bool operator==(const BundleGeometry&) const = default;
};

// Per-image export of a ViT forward (and optional backward) pass.
//   attentions: [L, H, T, T] post-softmax attention probabilities.
//   gradients:  class id -> [L, H, T, T] d(logit_c)/dA.
//   logits:     [C], may be empty when the exporter did not store them.
struct AttentionBundle {
  std::string image_id;
  BundleGeometry geometry;
  FloatTensor attentions;
  std::map<std::int64_t, FloatTensor> gradients;
  std::vector<float> logits;

  // Row-major T x T slice for (layer, head).
  std::span<const float> Attention(std::size_t layer, std::size_t head) const;
  std::span<const float> Gradient(std::int64_t class_id, std::size_t layer,
                                  std::size_t head) const;
  bool HasGradients(std::int64_t class_id) const;

  // Argmax of logits; throws Error(kInvalidArgument) if logits are absent.
  std::int64_t PredictedClass() const;
};

constexpr double kRowSumTolerance = 1e-4;

// Checks every AttentionBundle invariant. Throws Error(kBundleInvalid) whose
// message starts with the failing invariant's name: "geometry", "shape",
// "finite", "range", "row-stochastic", "gradient-shape", "logits-length".
void ValidateBundle(const AttentionBundle& bundle);

// Validates [L,H,T,T] attention tensors coming from an oracle.
void ValidateAttentionTensor(const FloatTensor& attentions,
                             const BundleGeometry& geometry);

// Directory layout: manifest.json + attentions.npy [+ logits.npy]
// [+ gradients_<c>.npy ...].
AttentionBundle LoadBundle(const std::filesystem::path& dir);
void SaveBundle(const AttentionBundle& bundle, const std::filesystem::path& dir,
                bool overwrite = false);

// Geometry of a bundle whose attentions have the given token count over an
// image of the given size (square patch grid assumed).
std::optional<std::size_t> PatchSizeFor(std::size_t tokens, std::size_t height,
                                        std::size_t width);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_BUNDLE_H_
