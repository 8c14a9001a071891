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

#ifndef ATTNFILTER_CORE_SYNTHETIC_H_
#define ATTNFILTER_CORE_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "core/bundle.h"

namespace attnfilter {

struct SyntheticSpec {
  std::size_t layers = 12;
  std::size_t heads = 12;
  std::size_t image_size = 224;
  std::size_t patch_size = 16;
  std::size_t class_count = 10;
  // Classes that receive a gradient tensor. Empty means "the predicted one".
  std::vector<std::int64_t> gradient_classes;
  // Softmax temperature of the attention logits; lower is peakier.
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::string image_id = "synthetic";
};

// Random but valid bundle: softmax attentions, Gaussian gradients and logits.
AttentionBundle MakeSyntheticBundle(const SyntheticSpec& spec);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_SYNTHETIC_H_
