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

#include "core/saliency_metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.h"

namespace attnfilter {
namespace {

void CheckSameSize(const Grid& a, const Grid& b, const char* what) {
  if (a.rows != b.rows || a.cols != b.cols || a.size() != b.size()) {
    Fail(ErrorCode::kShape, std::string(what) + ": size mismatch " + std::to_string(a.rows) +
                                "x" + std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + "x" + std::to_string(b.cols));
  }
  if (a.values.empty()) Fail(ErrorCode::kDegenerateInput, std::string(what) + ": empty map");
}

struct Moments {
  double mean;
  double stddev;
};

Moments ComputeMoments(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

double Mass(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    if (x < 0.0 || !std::isfinite(x)) {
      Fail(ErrorCode::kDegenerateInput, "SIM inputs must be finite and non-negative");
    }
    s += x;
  }
  return s;
}

}  // namespace

double Sim(const Grid& saliency, const Grid& gaze) {
  CheckSameSize(saliency, gaze, "SIM");
  const double ms = Mass(saliency.values);
  const double mg = Mass(gaze.values);
  if (!(ms > 0.0) || !(mg > 0.0)) Fail(ErrorCode::kDegenerateInput, "SIM: zero-mass input");
  double total = 0.0;
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    total += std::min(saliency.values[i] / ms, gaze.values[i] / mg);
  }
  return total;
}

double Pcc(const Grid& saliency, const Grid& gaze) {
  CheckSameSize(saliency, gaze, "PCC");
  const Moments ms = ComputeMoments(saliency.values);
  const Moments mg = ComputeMoments(gaze.values);
  if (!(ms.stddev > 0.0) || !(mg.stddev > 0.0)) {
    Fail(ErrorCode::kDegenerateInput, "PCC: constant input");
  }
  double cov = 0.0;
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    cov += (saliency.values[i] - ms.mean) * (gaze.values[i] - mg.mean);
  }
  cov /= static_cast<double>(saliency.size());
  return std::clamp(cov / (ms.stddev * mg.stddev), -1.0, 1.0);
}

FixationMap FixationMapFromDensity(const Grid& gaze) {
  double mass = 0.0;
  for (double v : gaze.values) {
    if (!std::isfinite(v) || v < 0.0) {
      Fail(ErrorCode::kDegenerateInput, "gaze density must be finite and non-negative");
    }
    mass += v;
  }
  if (!(mass > 0.0)) Fail(ErrorCode::kDegenerateInput, "gaze density has no positive mass");

  const std::size_t total = gaze.size();
  const auto want = static_cast<std::size_t>(
      std::ceil(kFixationTopFraction * static_cast<double>(total) - 1e-9));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gaze.values[a] > gaze.values[b];
  });
  FixationMap f{gaze.rows, gaze.cols, std::vector<std::uint8_t>(total, 0), 0};
  for (std::size_t i = 0; i < want && i < total; ++i) f.fixations[order[i]] = 1;
  f.count = std::min(want, total);
  return f;
}

double Nss(const Grid& saliency, const FixationMap& fixations) {
  if (saliency.rows != fixations.height || saliency.cols != fixations.width ||
      saliency.size() != fixations.fixations.size()) {
    Fail(ErrorCode::kShape, "NSS: saliency and fixation maps differ in size");
  }
  if (fixations.count == 0) Fail(ErrorCode::kDegenerateInput, "NSS: no fixations");
  const Moments m = ComputeMoments(saliency.values);
  if (!(m.stddev > 0.0)) Fail(ErrorCode::kDegenerateInput, "NSS: constant saliency map");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    if (fixations.fixations[i]) {
      sum += (saliency.values[i] - m.mean) / m.stddev;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

double AucJudd(const Grid& saliency, const FixationMap& fixations) {
  if (saliency.rows != fixations.height || saliency.cols != fixations.width ||
      saliency.size() != fixations.fixations.size()) {
    Fail(ErrorCode::kShape, "AUC-Judd: saliency and fixation maps differ in size");
  }
  std::size_t n_fix = 0;
  for (std::uint8_t f : fixations.fixations) n_fix += f ? 1 : 0;
  const std::size_t n_other = saliency.size() - n_fix;
  if (n_fix == 0) Fail(ErrorCode::kDegenerateInput, "AUC-Judd: no fixations");
  if (n_other == 0) Fail(ErrorCode::kDegenerateInput, "AUC-Judd: every pixel is fixated");

  std::vector<std::size_t> order(saliency.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return saliency.values[a] > saliency.values[b];
  });

  // Walk thresholds from high to low; each group of equal values moves the
  // ROC point once, and the trapezoid over that step counts ties as half.
  double area = 0.0;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = saliency.values[order[i]];
    std::size_t group_tp = 0, group_fp = 0;
    while (i < order.size() && saliency.values[order[i]] == v) {
      if (fixations.fixations[order[i]]) {
        ++group_tp;
      } else {
        ++group_fp;
      }
      ++i;
    }
    area += static_cast<double>(group_fp) * (2.0 * static_cast<double>(tp) +
                                             static_cast<double>(group_tp)) / 2.0;
    tp += group_tp;
    fp += group_fp;
  }
  return area / (static_cast<double>(n_fix) * static_cast<double>(n_other));
}

PlausibilityScores EvaluatePlausibility(const SaliencyMap& saliency, const Grid& gaze) {
  const Grid s = SaliencyAtResolution(saliency, gaze.rows, gaze.cols);
  const FixationMap f = FixationMapFromDensity(gaze);
  return {Sim(s, gaze), Pcc(s, gaze), AucJudd(s, f), Nss(s, f)};
}

}  // namespace attnfilter
