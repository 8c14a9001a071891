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

#include "core/stability.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "core/error.h"

namespace attnfilter {
namespace {

void CheckConfig(const PerturbationConfig& config) {
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    Fail(ErrorCode::kInvalidArgument, "epsilon must be a positive finite radius");
  }
  if (config.n_samples == 0) Fail(ErrorCode::kInvalidArgument, "n_samples must be >= 1");
}

void CheckSameShape(const Image& a, const Image& b) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width ||
      a.values.size() != b.values.size()) {
    Fail(ErrorCode::kShape, "image shapes differ");
  }
}

double MapDistance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kShape, "explanations differ in size (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss);
}

Image Midpoint(const Image& a, const Image& b) {
  Image m = a;
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    m.values[i] = static_cast<float>((static_cast<double>(a.values[i]) + b.values[i]) / 2.0);
  }
  return m;
}

}  // namespace

PerturbationConfig DefaultPerturbationConfig(const Image& x0, std::uint64_t seed) {
  double ss = 0.0;
  for (float v : x0.values) ss += static_cast<double>(v) * v;
  const double norm = std::sqrt(ss);
  return {norm > 0.0 ? kDefaultRelativeEpsilon * norm : kDefaultRelativeEpsilon,
          kDefaultStabilitySamples, seed};
}

double L2Distance(const Image& a, const Image& b) {
  CheckSameShape(a, b);
  double ss = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = static_cast<double>(a.values[i]) - b.values[i];
    ss += d * d;
  }
  return std::sqrt(ss);
}

std::vector<Image> SampleNeighborhood(const Image& x0, const PerturbationConfig& config) {
  CheckConfig(config);
  const std::size_t dim = x0.values.size();
  if (dim == 0) Fail(ErrorCode::kShape, "empty image");
  std::mt19937_64 gen(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> direction(dim);
  std::vector<Image> out;
  out.reserve(config.n_samples);
  for (std::size_t s = 0; s < config.n_samples; ++s) {
    double ss = 0.0;
    for (double& d : direction) {
      d = normal(gen);
      ss += d * d;
    }
    const double norm = std::sqrt(ss);
    // u^(1/D) makes the radius uniform in volume; u < 1 keeps it strictly
    // inside the ball.
    double radius = config.epsilon * std::pow(uniform(gen), 1.0 / static_cast<double>(dim));
    Image x = x0;
    // float32 storage can round a point onto or past the sphere; shrink the
    // step until the stored sample honors the constraint.
    for (int attempt = 0;; ++attempt) {
      for (std::size_t i = 0; i < dim; ++i) {
        x.values[i] = static_cast<float>(x0.values[i] + radius * direction[i] / norm);
      }
      if (L2Distance(x0, x) < config.epsilon) break;
      if (attempt == 60) {
        x = x0;
        break;
      }
      radius *= 0.5;
    }
    out.push_back(std::move(x));
  }
  return out;
}

double SurrogateEval(const SurrogateModel& model, const Image& x) {
  CheckSameShape(model.anchor, x);
  if (model.saliency.size() != x.NumPixels()) {
    Fail(ErrorCode::kShape, "surrogate saliency has " + std::to_string(model.saliency.size()) +
                                " entries for " + std::to_string(x.NumPixels()) + " pixels");
  }
  const std::size_t hw = x.NumPixels();
  double dot = 0.0;
  for (std::size_t p = 0; p < hw; ++p) {
    double delta = 0.0;
    for (std::size_t c = 0; c < x.channels; ++c) {
      delta += static_cast<double>(x.values[c * hw + p]) - model.anchor.values[c * hw + p];
    }
    dot += model.saliency[p] * delta;
  }
  return model.base_score + dot;
}

StabilityScores EvaluateStability(const Image& x0, const ExplainFn& explain,
                                  const ScoreFn& score, const PerturbationConfig& config) {
  const std::vector<Image> samples = SampleNeighborhood(x0, config);
  const std::vector<double> s0 = explain(x0);
  const SurrogateModel at_x0{x0, s0, score ? score(x0) : 0.0};
  StabilityScores out;
  for (const Image& x : samples) {
    const double dx = L2Distance(x0, x);
    if (!(dx > 0.0)) {
      Warn("stability: skipping a zero-norm perturbation");
      continue;
    }
    const std::vector<double> sx = explain(x);
    out.lip = std::max(out.lip, MapDistance(s0, sx) / dx);
    if (score) {
      const SurrogateModel at_x{x, sx, score(x)};
      const Image m = Midpoint(x0, x);
      const double d = SurrogateEval(at_x0, m) - SurrogateEval(at_x, m);
      out.lss = std::max(out.lss, std::abs(d) / dx);
    }
    ++out.samples_used;
  }
  return out;
}

double Lip(const Image& x0, const ExplainFn& explain, const PerturbationConfig& config) {
  return EvaluateStability(x0, explain, nullptr, config).lip;
}

double Lss(const Image& x0, const ExplainFn& explain, const ScoreFn& score,
           const PerturbationConfig& config) {
  if (!score) Fail(ErrorCode::kInvalidArgument, "LSS needs a score function");
  return EvaluateStability(x0, explain, score, config).lss;
}

}  // namespace attnfilter
