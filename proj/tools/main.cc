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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli_common.h"
#include "commands.h"

namespace cli = attnfilter::cli;

namespace {

void AddSharedGeometry(CLI::App* cmd, std::size_t& layers, std::size_t& heads,
                       std::size_t& image_size, std::size_t& patch_size) {
  cmd->add_option("--layers", layers, "Transformer layers")->capture_default_str();
  cmd->add_option("--heads", heads, "Heads per layer")->capture_default_str();
  cmd->add_option("--image-size", image_size, "Square image side in pixels")->capture_default_str();
  cmd->add_option("--patch-size", patch_size, "Patch side in pixels")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-filter explanations for vision transformers and their evaluation"};
  app.set_version_flag("--version", std::string(af_version()));
  app.require_subcommand(1);

  cli::ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Compute saliency maps from attention bundles");
  explain->add_option("--bundles,bundles", ex.bundles, "Bundle directories or parents of them")
      ->required();
  explain->add_option("--method,-m", ex.methods,
                      "rfem, rfem-class, rollout, saw, gradcam, random, cbcam")
      ->delimiter(',')
      ->required();
  explain->add_option("--k", ex.k, "K-sigma threshold(s), comma separated")
      ->delimiter(',')
      ->capture_default_str();
  explain->add_option("--class", ex.class_id, "Target class index or 'predicted'")
      ->capture_default_str();
  explain->add_option("--out,-o", ex.out_dir, "Output directory")->required();
  explain->add_flag("--png", ex.png, "Also write a PNG heatmap per map");
  explain->add_option("--images", ex.images_dir, "Images for PNG overlays (<image_id>.npy|.png)");
  explain->add_flag("--clamp-modulation", ex.clamp_modulation,
                    "Clamp attention*gradient at zero (class-specific methods)");
  explain->add_option("--weight-source", ex.weight_source, "Head weight: 'full' or 'cls'")
      ->capture_default_str();
  explain->add_option("--seed", ex.seed, "Seed of the random baseline")->capture_default_str();
  explain->add_option("--jobs,-j", ex.jobs, "Worker threads")->check(CLI::PositiveNumber);

  cli::EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score saliency maps and write a metric report");
  evaluate->add_option("--maps", ev.maps_dir, "Directory of <image_id>.<method>[.k=K].npy maps")
      ->required();
  evaluate->add_option("--gaze", ev.gaze_dir, "Gaze density maps (<image_id>.npy|.png)");
  evaluate->add_option("--images", ev.images_dir, "Model inputs (<image_id>.npy|.png)");
  evaluate->add_option("--oracle", ev.oracle,
                       "cmd:<command> or tcp:<host>:<port>; ATTNFILTER_ORACLE overrides");
  evaluate->add_option("--timeout-ms", ev.timeout_ms, "Oracle request timeout")
      ->capture_default_str();
  evaluate->add_option("--baseline", ev.baselines, "Add random and/or cbcam rows")
      ->delimiter(',');
  auto* step_px = evaluate->add_option("--step-pixels", ev.step_pixels,
                                       "Pixels perturbed per curve step")
                      ->capture_default_str()
                      ->check(CLI::PositiveNumber);
  evaluate->add_option("--steps", ev.steps, "Number of curve steps (overrides --step-pixels)")
      ->excludes(step_px)
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--support-threshold", ev.support_threshold,
                       "Saliency kept when masking for AD/AI/AG")
      ->capture_default_str();
  evaluate->add_option("--fill", ev.fill, "Perturbation fill: 'mean' or 'black'")
      ->capture_default_str();
  evaluate->add_option("--class", ev.class_id, "Target class index or 'predicted'")
      ->capture_default_str();
  evaluate->add_flag("--stability", ev.stability, "Also compute LIP and LSS");
  evaluate->add_option("--stability-samples", ev.stability_samples, "Neighbourhood samples")
      ->capture_default_str();
  evaluate->add_option("--epsilon", ev.epsilon, "Neighbourhood radius (default 0.01*||x||)");
  evaluate->add_option("--seed", ev.seed, "Seed for baselines and sampling")->capture_default_str();
  evaluate->add_option("--report", ev.report, "JSON report path (default: stdout)");
  evaluate->add_option("--csv", ev.csv, "CSV report path");
  evaluate->add_option("--jobs,-j", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);

  cli::BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Time explanation methods");
  bench->add_option("--bundles,bundles", be.bundles, "Bundle directories or parents of them");
  bench->add_option("--synthetic", be.synthetic, "Number of synthetic bundles to add");
  AddSharedGeometry(bench, be.layers, be.heads, be.image_size, be.patch_size);
  bench->add_option("--method,-m", be.methods, "Methods to time")->delimiter(',')->capture_default_str();
  bench->add_option("--k", be.k, "K-sigma threshold")->capture_default_str();
  bench->add_option("--runs", be.min_runs, "Minimum timed runs per method")->capture_default_str();
  bench->add_option("--seed", be.seed, "First synthetic seed")->capture_default_str();
  bench->add_option("--json", be.json, "Write results as JSON");

  cli::SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write random valid bundles (and images)");
  synth->add_option("--out,-o", sy.out_dir, "Output directory")->required();
  synth->add_option("--count,-n", sy.count, "Number of bundles")->capture_default_str();
  AddSharedGeometry(synth, sy.layers, sy.heads, sy.image_size, sy.patch_size);
  synth->add_option("--classes", sy.classes, "Class count")->capture_default_str();
  synth->add_option("--seed", sy.seed, "First seed")->capture_default_str();
  synth->add_option("--images", sy.images_dir, "Also write a random [3,H,W] image per bundle");
  synth->add_flag("--overwrite", sy.overwrite, "Replace existing bundle directories");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  try {
    if (*explain) return cli::RunExplain(ex);
    if (*evaluate) return cli::RunEvaluate(ev);
    if (*bench) return cli::RunBench(be);
    if (*synth) return cli::RunSynth(sy);
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitPartial;
  }
  return cli::kExitConfig;
}
