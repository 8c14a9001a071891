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

// Exercises the shared library through its C interface only.
#include "attnfilter/attnfilter.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

const fs::path kData = fs::path(ATTNFILTER_TEST_DATA);

class ScratchDir {
 public:
  ScratchDir() {
    path_ = fs::temp_directory_path() / ("af_capi_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

af_bundle* Synthetic(size_t layers, size_t heads, size_t image, size_t patch, uint64_t seed) {
  af_synthetic_spec spec;
  af_synthetic_spec_default(&spec);
  spec.layers = layers;
  spec.heads = heads;
  spec.image_size = image;
  spec.patch_size = patch;
  spec.seed = seed;
  af_bundle* b = nullptr;
  EXPECT_EQ(af_bundle_synthetic(&spec, &b), AF_OK) << af_last_error();
  return b;
}

std::string OracleSpec(const std::string& args) {
  return std::string("cmd:") + TEST_ORACLE_SERVER + " " + args;
}

TEST(CapiTest, StatusNamesAndVersion) {
  EXPECT_STREQ(af_status_name(AF_OK), "Ok");
  EXPECT_STRNE(af_status_name(AF_ERR_GRADIENT_MISSING), af_status_name(AF_ERR_GEOMETRY));
  EXPECT_STREQ(af_version(), "1.0.0");
}

TEST(CapiTest, NullArgumentsAreRejected) {
  af_bundle* b = nullptr;
  EXPECT_EQ(af_bundle_load(nullptr, &b), AF_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(af_last_error()), "");
  EXPECT_EQ(af_bundle_synthetic(nullptr, &b), AF_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(af_explain(nullptr, AF_METHOD_RFEM, nullptr, nullptr), AF_ERR_INVALID_ARGUMENT);
  af_bundle_free(nullptr);
  af_map_free(nullptr);
}

TEST(CapiTest, SyntheticBundleSaveLoadAndExplain) {
  af_bundle* b = Synthetic(2, 3, 32, 8, 7);
  af_geometry g;
  ASSERT_EQ(af_bundle_geometry(b, &g), AF_OK);
  EXPECT_EQ(g.tokens, 17u);
  EXPECT_EQ(af_bundle_validate(b), AF_OK);
  int64_t pred = -1;
  ASSERT_EQ(af_bundle_predicted_class(b, &pred), AF_OK);
  int64_t classes[4];
  ASSERT_EQ(af_bundle_gradient_classes(b, classes, 4), 1u);
  EXPECT_EQ(classes[0], pred);

  ScratchDir dir;
  const std::string path = (dir.path() / "b").string();
  ASSERT_EQ(af_bundle_save(b, path.c_str(), 0), AF_OK) << af_last_error();
  EXPECT_EQ(af_bundle_save(b, path.c_str(), 0), AF_ERR_ALREADY_EXISTS);
  af_bundle* back = nullptr;
  ASSERT_EQ(af_bundle_load(path.c_str(), &back), AF_OK) << af_last_error();
  EXPECT_STREQ(af_bundle_image_id(back), af_bundle_image_id(b));

  af_explain_options opts;
  af_explain_options_default(&opts);
  for (int m = AF_METHOD_RFEM; m <= AF_METHOD_CBCAM; ++m) {
    af_map* a = nullptr;
    af_map* c = nullptr;
    ASSERT_EQ(af_explain(b, static_cast<af_method>(m), &opts, &a), AF_OK) << af_last_error();
    ASSERT_EQ(af_explain(back, static_cast<af_method>(m), &opts, &c), AF_OK);
    ASSERT_EQ(af_map_height(a), 32u);
    EXPECT_EQ(std::memcmp(af_map_values(a), af_map_values(c), 32 * 32 * sizeof(float)), 0);
    af_method parsed;
    ASSERT_EQ(af_method_parse(af_method_name(static_cast<af_method>(m)), &parsed), AF_OK);
    EXPECT_EQ(parsed, m);
    af_map_free(a);
    af_map_free(c);
  }
  af_method parsed;
  EXPECT_EQ(af_method_parse("lime", &parsed), AF_ERR_INVALID_ARGUMENT);
  af_bundle_free(back);
  af_bundle_free(b);
}

TEST(CapiTest, ErrorCodesPropagate) {
  af_bundle* b = Synthetic(1, 1, 16, 8, 1);
  af_explain_options opts;
  af_explain_options_default(&opts);
  opts.class_id = 9;  // no gradients for this class
  af_map* m = nullptr;
  EXPECT_EQ(af_explain(b, AF_METHOD_RFEM_CLASS, &opts, &m), AF_ERR_GRADIENT_MISSING);
  EXPECT_EQ(m, nullptr);
  EXPECT_NE(std::string(af_last_error()).find("class 9"), std::string::npos);
  ScratchDir dir;
  af_bundle* none = nullptr;
  EXPECT_EQ(af_bundle_load(dir.path().c_str(), &none), AF_ERR_MISSING_COMPONENT);
  af_bundle_free(b);
}

TEST(CapiTest, MapsAndPlausibility) {
  const double field[] = {0, 0, 0, 1};
  af_map* m = nullptr;
  ASSERT_EQ(af_map_normalize(2, 2, field, &m), AF_OK);
  EXPECT_TRUE(af_map_non_degenerate(m));
  const double density[] = {0, 0, 0, 1};
  af_gaze* g = nullptr;
  ASSERT_EQ(af_gaze_from_values(2, 2, density, &g), AF_OK);
  af_plausibility p;
  ASSERT_EQ(af_plausibility_evaluate(m, g, &p), AF_OK);
  EXPECT_DOUBLE_EQ(p.sim, 1.0);
  EXPECT_DOUBLE_EQ(p.pcc, 1.0);
  EXPECT_NEAR(p.nss, std::sqrt(3.0), 1e-12);
  EXPECT_DOUBLE_EQ(p.auc_judd, 1.0);

  double v = 0.0;
  const double s2[] = {0.5, 0.5}, g2[] = {1.0, 0.0};
  ASSERT_EQ(af_metric_sim(1, 2, s2, g2, &v), AF_OK);
  EXPECT_DOUBLE_EQ(v, 0.5);
  const double flat[] = {1, 1, 1, 1};
  EXPECT_EQ(af_metric_pcc(2, 2, flat, density, &v), AF_ERR_DEGENERATE_INPUT);

  ScratchDir dir;
  const std::string npy = (dir.path() / "m.npy").string();
  ASSERT_EQ(af_map_save_npy(m, npy.c_str()), AF_OK);
  af_map* loaded = nullptr;
  ASSERT_EQ(af_map_load_npy(npy.c_str(), &loaded), AF_OK);
  EXPECT_EQ(std::memcmp(af_map_values(m), af_map_values(loaded), 4 * sizeof(float)), 0);
  EXPECT_EQ(af_map_save_png(m, (dir.path() / "m.png").c_str()), AF_OK);
  af_map* big = nullptr;
  ASSERT_EQ(af_map_resize(m, 8, 8, &big), AF_OK);
  EXPECT_EQ(af_map_values(big)[63], 1.0f);

  af_gaze* png = nullptr;
  ASSERT_EQ(af_gaze_load((kData / "npy" / "gaze_3x4.png").c_str(), &png), AF_OK);
  EXPECT_EQ(af_gaze_rows(png), 3u);
  EXPECT_NEAR(af_gaze_values(png)[6], 1.0, 1e-12);

  const float bad[] = {0.0f, 2.0f};
  af_map* invalid = nullptr;
  EXPECT_EQ(af_map_from_values(1, 2, bad, &invalid), AF_ERR_NUMERIC);
  af_gaze_free(png);
  af_map_free(big);
  af_map_free(loaded);
  af_gaze_free(g);
  af_map_free(m);
}

// score = sum of the first channel / number of pixels (values in [0,1]).
int MeanScore(const float* values, size_t, size_t h, size_t w, void* user, double* out) {
  ++*static_cast<int*>(user);
  double s = 0.0;
  for (size_t i = 0; i < h * w; ++i) s += values[i];
  *out = s / static_cast<double>(h * w);
  return 0;
}

int FailingScore(const float*, size_t, size_t, size_t, void*, double*) { return 1; }

TEST(CapiTest, CorrectnessWithCallback) {
  std::vector<float> px(16);
  for (size_t i = 0; i < 16; ++i) px[i] = static_cast<float>(i) / 15.0f;
  af_image* img = nullptr;
  ASSERT_EQ(af_image_from_values(1, 4, 4, px.data(), &img), AF_OK);
  std::vector<double> field(px.begin(), px.end());
  af_map* m = nullptr;
  ASSERT_EQ(af_map_normalize(4, 4, field.data(), &m), AF_OK);

  af_correctness_options opts;
  af_correctness_options_default(&opts);
  opts.step_pixels = 1;
  int calls = 0;
  af_correctness c;
  ASSERT_EQ(af_correctness_evaluate_fn(MeanScore, &calls, img, m, &opts, &c), AF_OK)
      << af_last_error();
  EXPECT_GT(c.delta_a_f, 0.0);
  EXPECT_GT(c.iauc, c.dauc);
  EXPECT_NEAR(c.p, 0.5, 1e-7);  // float pixels
  EXPECT_EQ(calls, 3 * 17 + 1);
  EXPECT_EQ(af_correctness_evaluate_fn(FailingScore, nullptr, img, m, &opts, &c), AF_ERR_ORACLE);
  af_map_free(m);
  af_image_free(img);
}

void CountWarnings(const char*, void* user) { ++*static_cast<int*>(user); }

TEST(CapiTest, AveragesAndWarnings) {
  int warnings = 0;
  af_set_warning_callback(CountWarnings, &warnings);
  const double p[] = {0.8, 0.5, 0.0}, o[] = {0.6, 0.75, 0.1};
  af_average a;
  ASSERT_EQ(af_average_drop(p, o, 3, &a), AF_OK);
  EXPECT_DOUBLE_EQ(a.value, 0.125);
  EXPECT_EQ(a.skipped, 1u);
  ASSERT_EQ(af_average_increase(p, o, 3, &a), AF_OK);
  EXPECT_DOUBLE_EQ(a.value, 2.0 / 3.0);
  ASSERT_EQ(af_average_gain(p, o, 2, &a), AF_OK);
  EXPECT_DOUBLE_EQ(a.value, 0.25);
  EXPECT_EQ(warnings, 1);
  af_set_warning_callback(nullptr, nullptr);
}

TEST(CapiTest, OracleRoundTrip) {
  af_oracle* oracle = nullptr;
  ASSERT_EQ(af_oracle_open(OracleSpec("--linear --classes 3").c_str(), 10000, &oracle), AF_OK)
      << af_last_error();
  af_oracle_info info;
  ASSERT_EQ(af_oracle_info_get(oracle, &info), AF_OK);
  EXPECT_EQ(info.class_count, 3u);
  double mean[3], sd[3];
  ASSERT_EQ(af_oracle_normalization(oracle, mean, sd, 3), 3u);
  EXPECT_EQ(mean[0], 0.5);
  EXPECT_EQ(sd[0], 0.25);

  std::vector<float> px(info.channels * info.height * info.width, 0.2f);
  af_image* img = nullptr;
  ASSERT_EQ(af_image_from_values(info.channels, info.height, info.width, px.data(), &img), AF_OK);
  double probs[3];
  ASSERT_EQ(af_oracle_score(oracle, img, probs, 3), AF_OK);
  EXPECT_NEAR(probs[0] + probs[1] + probs[2], 1.0, 1e-4);

  const int64_t classes[] = {0, 2};
  af_bundle* b = nullptr;
  ASSERT_EQ(af_oracle_fetch_bundle(oracle, img, "x", classes, 2, &b), AF_OK) << af_last_error();
  af_explain_options eo;
  af_explain_options_default(&eo);
  eo.class_id = 2;
  af_map* m = nullptr;
  ASSERT_EQ(af_explain(b, AF_METHOD_RFEM_CLASS, &eo, &m), AF_OK) << af_last_error();

  af_correctness_options co;
  af_correctness_options_default(&co);
  co.steps = 8;
  af_correctness c;
  ASSERT_EQ(af_correctness_evaluate(oracle, img, m, &co, &c), AF_OK) << af_last_error();
  EXPECT_GE(c.class_id, 0);
  EXPECT_GT(c.p, 0.0);

  af_stability_options so;
  af_stability_options_default(&so);
  so.n_samples = 3;
  so.method = AF_METHOD_RFEM;
  af_stability st;
  ASSERT_EQ(af_stability_evaluate(oracle, img, &so, &st), AF_OK) << af_last_error();
  EXPECT_EQ(st.samples_used, 3u);
  EXPECT_GE(st.lip, 0.0);
  EXPECT_GE(st.lss, 0.0);

  af_map_free(m);
  af_bundle_free(b);
  af_image_free(img);
  af_oracle_close(oracle);

  EXPECT_EQ(af_oracle_open("bogus:1", 1000, &oracle), AF_ERR_INVALID_ARGUMENT);
}

TEST(CapiTest, ImageRoundTrip) {
  ScratchDir dir;
  const float px[] = {1, 2, 3, 4, 5, 6};
  af_image* img = nullptr;
  ASSERT_EQ(af_image_from_values(3, 1, 2, px, &img), AF_OK);
  const std::string path = (dir.path() / "x.npy").string();
  ASSERT_EQ(af_image_save_npy(img, path.c_str()), AF_OK);
  af_image* back = nullptr;
  ASSERT_EQ(af_image_load(path.c_str(), nullptr, nullptr, 0, &back), AF_OK);
  size_t c, h, w;
  af_image_shape(back, &c, &h, &w);
  EXPECT_EQ(c, 3u);
  EXPECT_EQ(w, 2u);
  EXPECT_EQ(std::memcmp(af_image_values(back), px, sizeof(px)), 0);
  af_image_free(back);
  af_image_free(img);
}

}  // namespace
