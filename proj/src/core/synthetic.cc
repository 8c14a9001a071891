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

#include "core/synthetic.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "core/error.h"

namespace attnfilter {

AttentionBundle MakeSyntheticBundle(const SyntheticSpec& spec) {
  if (spec.layers == 0 || spec.heads == 0 || spec.patch_size == 0 ||
      spec.image_size % spec.patch_size != 0 || spec.class_count == 0 ||
      !(spec.temperature > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "invalid synthetic bundle spec");
  }
  const std::size_t side = spec.image_size / spec.patch_size;
  const std::size_t t = side * side + 1;

  AttentionBundle b;
  b.image_id = spec.image_id;
  b.geometry = {spec.layers, spec.heads, t, spec.patch_size, spec.image_size,
                spec.image_size, spec.class_count};

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  b.attentions.shape = {spec.layers, spec.heads, t, t};
  b.attentions.values.resize(spec.layers * spec.heads * t * t);
  std::vector<double> row(t);
  for (std::size_t r = 0; r < spec.layers * spec.heads * t; ++r) {
    double peak = -INFINITY;
    for (double& v : row) {
      v = normal(rng) / spec.temperature;
      peak = std::max(peak, v);
    }
    double sum = 0.0;
    for (double& v : row) sum += (v = std::exp(v - peak));
    float* out = b.attentions.values.data() + r * t;
    for (std::size_t j = 0; j < t; ++j) out[j] = static_cast<float>(row[j] / sum);
  }

  b.logits.resize(spec.class_count);
  for (float& v : b.logits) v = static_cast<float>(normal(rng));

  std::vector<std::int64_t> classes = spec.gradient_classes;
  if (classes.empty()) classes.push_back(b.PredictedClass());
  for (std::int64_t c : classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= spec.class_count) {
      Fail(ErrorCode::kInvalidArgument, "gradient class out of range");
    }
    FloatTensor g;
    g.shape = b.attentions.shape;
    g.values.resize(b.attentions.values.size());
    for (float& v : g.values) v = static_cast<float>(normal(rng));
    b.gradients[c] = std::move(g);
  }
  return b;
}

}  // namespace attnfilter
