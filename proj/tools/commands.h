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

#ifndef ATTNFILTER_TOOLS_COMMANDS_H_
#define ATTNFILTER_TOOLS_COMMANDS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace attnfilter::cli {

struct ExplainArgs {
  std::vector<std::string> bundles;
  std::vector<std::string> methods;
  std::vector<double> k = {1.0};
  std::string class_id = "predicted";
  std::string out_dir;
  bool png = false;
  std::string images_dir;  // overlay backgrounds, optional
  bool clamp_modulation = false;
  std::string weight_source = "full";
  uint64_t seed = 0;
  int jobs = 1;
};

struct EvaluateArgs {
  std::string maps_dir;
  std::string gaze_dir;
  std::string images_dir;
  std::string oracle;
  int timeout_ms = 30000;
  std::vector<std::string> baselines;  // random, cbcam
  std::size_t step_pixels = 50;
  std::size_t steps = 0;
  double support_threshold = 0.5;
  std::string fill = "mean";
  std::string class_id = "predicted";
  bool stability = false;
  std::size_t stability_samples = 50;
  double epsilon = 0.0;
  uint64_t seed = 0;
  std::string report;
  std::string csv;
  int jobs = 1;
};

struct BenchArgs {
  std::vector<std::string> bundles;
  std::size_t synthetic = 0;
  std::size_t layers = 12;
  std::size_t heads = 12;
  std::size_t image_size = 224;
  std::size_t patch_size = 16;
  std::vector<std::string> methods = {"rfem", "rollout"};
  double k = 1.0;
  std::size_t min_runs = 100;
  uint64_t seed = 0;
  std::string json;
};

struct SynthArgs {
  std::string out_dir;
  std::size_t count = 1;
  std::size_t layers = 12;
  std::size_t heads = 12;
  std::size_t image_size = 224;
  std::size_t patch_size = 16;
  std::size_t classes = 10;
  uint64_t seed = 0;
  std::string images_dir;
  bool overwrite = false;
};

int RunExplain(const ExplainArgs& args);
int RunEvaluate(const EvaluateArgs& args);
int RunBench(const BenchArgs& args);
int RunSynth(const SynthArgs& args);

}  // namespace attnfilter::cli

#endif  // ATTNFILTER_TOOLS_COMMANDS_H_
