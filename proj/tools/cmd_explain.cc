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

#include <atomic>
#include <string>
#include <vector>

#include "cli_common.h"
#include "commands.h"

namespace attnfilter::cli {
namespace {

struct Job {
  af_method method;
  std::optional<double> k;  // set for K-dependent methods
};

bool UsesK(af_method m) { return m == AF_METHOD_RFEM || m == AF_METHOD_RFEM_CLASS; }

std::string OutputStem(const std::string& image_id, const Job& job, bool k_suffix) {
  std::string stem = image_id + "." + af_method_name(job.method);
  if (k_suffix && job.k) stem += ".k=" + FormatNumber(*job.k);
  return stem;
}

}  // namespace

int RunExplain(const ExplainArgs& args) {
  if (args.k.empty()) throw ConfigError("--k needs at least one value");
  if (args.weight_source != "full" && args.weight_source != "cls") {
    throw ConfigError("--weight-source must be 'full' or 'cls'");
  }
  std::vector<Job> jobs;
  for (const std::string& name : args.methods) {
    af_method m;
    if (af_method_parse(name.c_str(), &m) != AF_OK) throw ConfigError(af_last_error());
    if (UsesK(m)) {
      for (double k : args.k) jobs.push_back({m, k});
    } else {
      jobs.push_back({m, std::nullopt});
    }
  }
  af_explain_options base;
  af_explain_options_default(&base);
  base.class_id = ParseClass(args.class_id);
  base.clamp_modulation = args.clamp_modulation ? 1 : 0;
  base.weight_source = args.weight_source == "cls" ? AF_WEIGHT_CLS_ROW : AF_WEIGHT_FULL_MATRIX;
  base.seed = args.seed;

  const std::vector<fs::path> bundles = DiscoverBundles(args.bundles);
  if (bundles.empty()) throw ConfigError("no bundles found");
  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) throw ConfigError("cannot create " + args.out_dir + ": " + ec.message());

  const bool k_suffix = args.k.size() > 1;
  std::atomic<std::size_t> failures{0};
  ParallelFor(bundles.size(), args.jobs, [&](std::size_t i, std::size_t) {
    const fs::path& dir = bundles[i];
    try {
      af_bundle* raw = nullptr;
      Check(af_bundle_load(dir.c_str(), &raw), dir.string());
      const BundlePtr bundle(raw);
      const std::string image_id = af_bundle_image_id(bundle.get());
      ImagePtr background;
      if (args.png) {
        if (const auto img = FindByStem(args.images_dir, image_id)) {
          af_image* im = nullptr;
          Check(af_image_load(img->c_str(), nullptr, nullptr, 0, &im), img->string());
          background.reset(im);
        }
      }
      for (const Job& job : jobs) {
        af_explain_options opts = base;
        if (job.k) opts.k = *job.k;
        const std::string stem = OutputStem(image_id, job, k_suffix);
        af_map* m = nullptr;
        Check(af_explain(bundle.get(), job.method, &opts, &m), image_id + " " + stem);
        const MapPtr map(m);
        if (!af_map_non_degenerate(map.get())) {
          LogInfo("warning: " + stem + " is constant (degenerate map)");
        }
        const fs::path npy = fs::path(args.out_dir) / (stem + ".npy");
        Check(af_map_save_npy(map.get(), npy.c_str()), npy.string());
        if (args.png) {
          const fs::path png = fs::path(args.out_dir) / (stem + ".png");
          Check(background ? af_map_save_overlay_png(map.get(), background.get(), png.c_str())
                           : af_map_save_png(map.get(), png.c_str()),
                png.string());
        }
      }
    } catch (const std::exception& e) {
      ++failures;
      LogError(e.what());
    }
  });
  return failures == 0 ? kExitOk : kExitPartial;
}

}  // namespace attnfilter::cli
