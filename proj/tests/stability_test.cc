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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "core/error.h"
#include "oracles.h"

namespace attnfilter {
namespace {

Image RandomImage(std::mt19937_64& rng, std::size_t channels, std::size_t side) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Image x{channels, side, side, std::vector<float>(channels * side * side)};
  for (float& v : x.values) v = static_cast<float>(u(rng));
  return x;
}

std::vector<double> ChannelSumD(const Image& x) { return ChannelSum(x); }

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(const std::vector<double>& a) { return std::sqrt(Dot(a, a)); }

TEST(SampleNeighborhoodTest, SamplesStayInsideTheBall) {
  std::mt19937_64 rng(1);
  const Image x0 = RandomImage(rng, 3, 8);
  for (double eps : {1e-6, 0.05, 2.0}) {
    const auto samples = SampleNeighborhood(x0, {eps, 200, 7});
    ASSERT_EQ(samples.size(), 200u);
    for (const Image& x : samples) EXPECT_LT(L2Distance(x0, x), eps);
  }
}

TEST(SampleNeighborhoodTest, DeterministicAndPrefixStable) {
  std::mt19937_64 rng(2);
  const Image x0 = RandomImage(rng, 3, 4);
  const auto a = SampleNeighborhood(x0, {0.1, 20, 5});
  EXPECT_EQ(a, SampleNeighborhood(x0, {0.1, 20, 5}));
  const auto prefix = SampleNeighborhood(x0, {0.1, 7, 5});
  for (std::size_t i = 0; i < prefix.size(); ++i) EXPECT_EQ(prefix[i], a[i]);
  EXPECT_NE(SampleNeighborhood(x0, {0.1, 1, 6})[0], a[0]);
}

TEST(SampleNeighborhoodTest, RadiiFillTheBall) {
  // Uniform in a D-ball: P(r < eps * 0.5^(1/D)) = 1/2.
  std::mt19937_64 rng(3);
  const Image x0 = RandomImage(rng, 1, 2);  // D = 4
  const auto samples = SampleNeighborhood(x0, {1.0, 4000, 9});
  int inner = 0;
  for (const Image& x : samples) inner += L2Distance(x0, x) < std::pow(0.5, 0.25);
  EXPECT_NEAR(inner / 4000.0, 0.5, 0.03);
}

TEST(SampleNeighborhoodTest, InvalidConfig) {
  const Image x0{1, 1, 2, {0.0f, 1.0f}};
  EXPECT_THROW(SampleNeighborhood(x0, {0.0, 5, 0}), Error);
  EXPECT_THROW(SampleNeighborhood(x0, {0.1, 0, 0}), Error);
  EXPECT_THROW(SampleNeighborhood(x0, {NAN, 5, 0}), Error);
}

TEST(DefaultPerturbationConfigTest, RelativeRadius) {
  const Image x0{1, 1, 2, {3.0f, 4.0f}};
  const PerturbationConfig c = DefaultPerturbationConfig(x0, 4);
  EXPECT_DOUBLE_EQ(c.epsilon, 0.05);
  EXPECT_EQ(c.n_samples, 50u);
  EXPECT_EQ(c.seed, 4u);
}

TEST(SurrogateEvalTest, HandCases) {
  const Image x0{1, 1, 2, {1.0f, 1.0f}};
  const SurrogateModel s{x0, {1.0, 2.0}, 0.5};
  EXPECT_EQ(SurrogateEval(s, x0), 0.5);
  EXPECT_NEAR(SurrogateEval(s, Image{1, 1, 2, {1.1f, 0.9f}}), 0.4, 1e-7);
  const SurrogateModel zero{x0, {0.0, 0.0}, 0.5};
  EXPECT_EQ(SurrogateEval(zero, Image{1, 1, 2, {7.0f, -3.0f}}), 0.5);
  EXPECT_THROW(SurrogateEval(s, Image{1, 2, 1, {1.0f, 1.0f}}), Error);
  EXPECT_THROW(SurrogateEval(SurrogateModel{x0, {1.0}, 0.5}, x0), Error);
}

TEST(SurrogateEvalTest, MatchesOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Image x0 = RandomImage(rng, 3, 5), x = RandomImage(rng, 3, 5);
    SurrogateModel s{x0, std::vector<double>(25), u(rng)};
    for (double& v : s.saliency) v = u(rng);
    std::vector<double> delta = ChannelSumD(x);
    const std::vector<double> base = ChannelSumD(x0);
    for (std::size_t p = 0; p < 25; ++p) delta[p] -= base[p];
    EXPECT_TRUE(oracle::NearRel(SurrogateEval(s, x), s.base_score + Dot(s.saliency, delta)));
  }
}

TEST(LipTest, ConstantExplanationIsZero) {
  std::mt19937_64 rng(5);
  const Image x0 = RandomImage(rng, 3, 6);
  const ExplainFn constant = [](const Image&) { return std::vector<double>(36, 0.25); };
  EXPECT_EQ(Lip(x0, constant, DefaultPerturbationConfig(x0)), 0.0);
}

TEST(LipTest, KLipschitzExplainerIsBounded) {
  std::mt19937_64 rng(6);
  for (double k : {0.5, 1.0, 3.0}) {
    const Image x0 = RandomImage(rng, 3, 6);
    // ||chsum(a) - chsum(b)|| <= sqrt(3) ||a - b||, and sin is 1-Lipschitz.
    const ExplainFn explain = [k](const Image& x) {
      std::vector<double> s = ChannelSum(x);
      for (double& v : s) v = k * std::sin(v / std::sqrt(3.0));
      return s;
    };
    const double lip = Lip(x0, explain, {0.3, 100, 1});
    EXPECT_GT(lip, 0.0);
    EXPECT_LE(lip, k + 1e-9);
  }
}

TEST(LipTest, ChannelMeanMatchesBruteForce) {
  std::mt19937_64 rng(7);
  const Image x0 = RandomImage(rng, 3, 5);
  const ExplainFn mean = [](const Image& x) {
    std::vector<double> s = ChannelSum(x);
    for (double& v : s) v /= 3.0;
    return s;
  };
  const PerturbationConfig cfg{0.2, 30, 3};
  double want = 0.0;
  const auto m0 = mean(x0);
  for (const Image& x : SampleNeighborhood(x0, cfg)) {
    const auto mx = mean(x);
    std::vector<double> diff(m0.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = m0[i] - mx[i];
    want = std::max(want, Norm(diff) / L2Distance(x0, x));
  }
  const double lip = Lip(x0, mean, cfg);
  EXPECT_TRUE(oracle::NearRel(lip, want));
  EXPECT_LE(lip, 1.0 / std::sqrt(3.0) + 1e-9);
}

TEST(LssTest, LinearModelWithExactGradientIsZero) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Image x0 = RandomImage(rng, 3, 8);
  std::vector<double> w(64);
  for (double& v : w) v = u(rng);
  const ScoreFn g = [&](const Image& x) { return Dot(w, ChannelSum(x)); };
  const ExplainFn explain = [&](const Image&) { return w; };
  EXPECT_LE(Lss(x0, explain, g, DefaultPerturbationConfig(x0)), 1e-9);
}

TEST(LssTest, ConstantModelAndExplanationIsZero) {
  std::mt19937_64 rng(9);
  const Image x0 = RandomImage(rng, 3, 4);
  const ScoreFn g = [](const Image&) { return 0.3; };
  const ExplainFn explain = [](const Image&) { return std::vector<double>(16, 0.0); };
  EXPECT_EQ(Lss(x0, explain, g, {0.1, 20, 0}), 0.0);
  EXPECT_THROW(Lss(x0, explain, nullptr, {0.1, 20, 0}), Error);
}

TEST(LssTest, QuadraticModelMatchesBruteForce) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Image x0 = RandomImage(rng, 3, 6);
  std::vector<double> a(36);
  for (double& v : a) v = u(rng);
  // g(x) = sum_p a_p chsum(x)_p^2; its gradient in chsum space is 2 a_p chsum_p.
  const ScoreFn g = [&](const Image& x) {
    const auto c = ChannelSum(x);
    double s = 0.0;
    for (std::size_t p = 0; p < 36; ++p) s += a[p] * c[p] * c[p];
    return s;
  };
  const ExplainFn grad = [&](const Image& x) {
    auto c = ChannelSum(x);
    for (std::size_t p = 0; p < 36; ++p) c[p] *= 2.0 * a[p];
    return c;
  };
  const PerturbationConfig cfg{0.5, 40, 11};
  double want = 0.0;
  for (const Image& x : SampleNeighborhood(x0, cfg)) {
    Image m = x0;
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      m.values[i] = static_cast<float>((static_cast<double>(x0.values[i]) + x.values[i]) / 2.0);
    }
    const auto cm = ChannelSum(m), c0 = ChannelSum(x0), cx = ChannelSum(x);
    std::vector<double> d0(36), dx(36);
    for (std::size_t p = 0; p < 36; ++p) {
      d0[p] = cm[p] - c0[p];
      dx[p] = cm[p] - cx[p];
    }
    const double e0 = g(x0) + Dot(grad(x0), d0);
    const double ex = g(x) + Dot(grad(x), dx);
    want = std::max(want, std::abs(e0 - ex) / L2Distance(x0, x));
  }
  const double lss = Lss(x0, grad, g, cfg);
  EXPECT_GT(lss, 0.0);
  EXPECT_NEAR(lss, want, 1e-9 * std::max(1.0, want));
}

TEST(StabilityTest, MonotoneInSampleCount) {
  std::mt19937_64 rng(12);
  const Image x0 = RandomImage(rng, 3, 5);
  const ExplainFn explain = [](const Image& x) {
    auto s = ChannelSum(x);
    for (double& v : s) v = v * v;
    return s;
  };
  const ScoreFn g = [](const Image& x) { return std::tanh(x.values[3]); };
  StabilityScores prev{};
  for (std::size_t n : {1u, 5u, 20u, 60u}) {
    const StabilityScores cur = EvaluateStability(x0, explain, g, {0.2, n, 4});
    EXPECT_EQ(cur.samples_used, n);
    EXPECT_GE(cur.lip, prev.lip);
    EXPECT_GE(cur.lss, prev.lss);
    EXPECT_GE(cur.lip, 0.0);
    prev = cur;
  }
}

TEST(StabilityTest, ExplanationSizeMismatch) {
  const Image x0{1, 2, 2, {0.1f, 0.2f, 0.3f, 0.4f}};
  int calls = 0;
  const ExplainFn bad = [&](const Image&) { return std::vector<double>(++calls == 1 ? 4 : 3); };
  EXPECT_THROW(Lip(x0, bad, {0.1, 3, 0}), Error);
}

}  // namespace
}  // namespace attnfilter
