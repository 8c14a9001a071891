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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "core/error.h"
#include "oracles.h"

namespace attnfilter {
namespace {

Grid Row(std::vector<double> v) { return Grid(1, v.size(), std::move(v)); }

FixationMap Fix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> f) {
  FixationMap m{rows, cols, std::move(f), 0};
  for (auto x : m.fixations) m.count += x;
  return m;
}

Grid RandomGrid(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int levels = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Grid g(rows, cols);
  for (double& v : g.values) v = levels > 0 ? std::floor(u(rng) * levels) / levels : u(rng);
  return g;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(SimTest, HandCases) {
  const Grid g = Row({0.1, 0.7, 0.2, 3.0});
  EXPECT_DOUBLE_EQ(Sim(g, g), 1.0);
  EXPECT_DOUBLE_EQ(Sim(Row({1, 0, 2, 0}), Row({0, 5, 0, 1e-3})), 0.0);
  EXPECT_DOUBLE_EQ(Sim(Row({0.5, 0.5}), Row({1, 0})), 0.5);
}

TEST(SimTest, SymmetricScaleInvariantAndMatchesOracle) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const Grid s = RandomGrid(rng, 6, 7), g = RandomGrid(rng, 6, 7);
    EXPECT_TRUE(oracle::NearRel(Sim(s, g), Sim(g, s)));
    EXPECT_TRUE(oracle::NearRel(Sim(s, g), oracle::Sim(s.values, g.values)));
    Grid scaled = s;
    for (double& v : scaled.values) v *= 17.5;
    EXPECT_TRUE(oracle::NearRel(Sim(scaled, g), Sim(s, g)));
    const double v = Sim(s, g);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(SimTest, Errors) {
  EXPECT_EQ(CodeOf([] { Sim(Row({0, 0}), Row({1, 0})); }), ErrorCode::kDegenerateInput);
  EXPECT_EQ(CodeOf([] { Sim(Row({1, 0}), Row({1, 0, 0})); }), ErrorCode::kShape);
}

TEST(PccTest, HandCases) {
  const Grid g = Row({1, 2, 2, 4});
  EXPECT_DOUBLE_EQ(Pcc(g, g), 1.0);
  EXPECT_DOUBLE_EQ(Pcc(Row({9, 8, 8, 6}), g), -1.0);
  // cov = 4.5/4, var_s = 5/4, var_g = 4.75/4.
  EXPECT_TRUE(oracle::NearRel(Pcc(Row({1, 2, 3, 4}), g), 4.5 / std::sqrt(5.0 * 4.75)));
  EXPECT_EQ(CodeOf([&] { Pcc(Row({3, 3, 3, 3}), g); }), ErrorCode::kDegenerateInput);
}

TEST(PccTest, MatchesOracle) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const Grid s = RandomGrid(rng, 5, 9), g = RandomGrid(rng, 5, 9);
    const double v = Pcc(s, g);
    EXPECT_TRUE(oracle::NearRel(v, oracle::Pcc(s.values, g.values)));
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(FixationMapTest, DistinctMaxima) {
  Grid g(10, 10, 0.1);
  const std::size_t peaks[] = {3, 17, 42, 77, 99};
  for (std::size_t p : peaks) g.values[p] = 0.9;
  const FixationMap f = FixationMapFromDensity(g);
  EXPECT_EQ(f.count, 5u);
  for (std::size_t p : peaks) EXPECT_EQ(f.fixations[p], 1);
}

TEST(FixationMapTest, ConstantMapTakesFirstPixelsRowMajor) {
  const FixationMap f = FixationMapFromDensity(Grid(7, 9, 0.3));  // ceil(3.15) = 4
  EXPECT_EQ(f.count, 4u);
  for (std::size_t i = 0; i < 63; ++i) EXPECT_EQ(f.fixations[i], i < 4 ? 1 : 0);
}

TEST(FixationMapTest, CountAt224) {
  std::mt19937_64 rng(3);
  const FixationMap f = FixationMapFromDensity(RandomGrid(rng, 224, 224, 10));
  EXPECT_EQ(f.count, 2509u);
  std::mt19937_64 again(3);
  EXPECT_EQ(f.fixations, oracle::Fixations(RandomGrid(again, 224, 224, 10).values));
}

TEST(FixationMapTest, ZeroMassIsDegenerate) {
  EXPECT_EQ(CodeOf([] { FixationMapFromDensity(Grid(4, 4, 0.0)); }), ErrorCode::kDegenerateInput);
}

TEST(NssTest, HandCases) {
  const Grid s(2, 2, {0, 0, 0, 1});
  EXPECT_NEAR(Nss(s, Fix(2, 2, {0, 0, 0, 1})), std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(Nss(s, Fix(2, 2, {1, 0, 0, 0})), -1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(Nss(s, Fix(2, 2, {1, 1, 1, 1})), 0.0, 1e-12);
  EXPECT_EQ(CodeOf([] { Nss(Grid(2, 2, 0.5), Fix(2, 2, {1, 0, 0, 0})); }),
            ErrorCode::kDegenerateInput);
}

TEST(NssTest, MatchesOracle) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Grid s = RandomGrid(rng, 8, 8);
    const Grid g = RandomGrid(rng, 8, 8);
    const FixationMap f = FixationMapFromDensity(g);
    EXPECT_TRUE(oracle::NearRel(Nss(s, f), oracle::Nss(s.values, f.fixations)));
  }
}

TEST(AucJuddTest, PerfectAndReversedRanking) {
  const Grid s(2, 3, {0.9, 0.1, 0.2, 0.95, 0.3, 0.0});
  EXPECT_DOUBLE_EQ(AucJudd(s, Fix(2, 3, {1, 0, 0, 1, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(AucJudd(s, Fix(2, 3, {0, 1, 0, 0, 0, 1})), 0.0);
  EXPECT_EQ(CodeOf([&] { AucJudd(s, Fix(2, 3, {1, 1, 1, 1, 1, 1})); }),
            ErrorCode::kDegenerateInput);
  EXPECT_EQ(CodeOf([&] { AucJudd(s, Fix(2, 3, {0, 0, 0, 0, 0, 0})); }),
            ErrorCode::kDegenerateInput);
}

TEST(AucJuddTest, MatchesPairwiseOracleWithTies) {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.2);
  for (int i = 0; i < 200; ++i) {
    const Grid s = RandomGrid(rng, 6, 6, i % 2 == 0 ? 4 : 0);  // even trials are tie-heavy
    std::vector<std::uint8_t> f(36);
    for (auto& x : f) x = coin(rng);
    f[i % 36] = 1;
    f[(i + 7) % 36] = 0;
    const FixationMap fm = Fix(6, 6, f);
    EXPECT_NEAR(AucJudd(s, fm), oracle::AucPairwise(s.values, f), 1e-9) << "trial " << i;
  }
}

TEST(AucJuddTest, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(6);
  const Grid s = RandomGrid(rng, 9, 9, 6);
  const FixationMap f = FixationMapFromDensity(RandomGrid(rng, 9, 9));
  Grid t = s;
  for (double& v : t.values) v = std::exp(3.0 * v) - 2.0;
  EXPECT_EQ(AucJudd(t, f), AucJudd(s, f));
}

TEST(AucJuddTest, RandomMapsAverageHalf) {
  std::mt19937_64 rng(7);
  double sum = 0.0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    const Grid s = RandomGrid(rng, 32, 32);
    const FixationMap f = FixationMapFromDensity(RandomGrid(rng, 32, 32));
    sum += AucJudd(s, f);
  }
  EXPECT_NEAR(sum / trials, 0.5, 0.02);
}

TEST(EvaluatePlausibilityTest, ResamplesToGazeResolution) {
  std::mt19937_64 rng(8);
  const Grid gaze = RandomGrid(rng, 20, 20);
  const SaliencyMap small = NormalizeToSaliency(RandomGrid(rng, 5, 5));
  const PlausibilityScores p = EvaluatePlausibility(small, gaze);
  const Grid up = ResizeBilinear(small.ToGrid(), 20, 20);
  const FixationMap f = FixationMapFromDensity(gaze);
  EXPECT_EQ(p.sim, Sim(up, gaze));
  EXPECT_EQ(p.pcc, Pcc(up, gaze));
  EXPECT_EQ(p.nss, Nss(up, f));
  EXPECT_EQ(p.auc_judd, AucJudd(up, f));
  EXPECT_GE(p.auc_judd, 0.0);
  EXPECT_LE(p.auc_judd, 1.0);
}

}  // namespace
}  // namespace attnfilter
