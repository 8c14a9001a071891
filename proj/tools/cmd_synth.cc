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

#include <random>
#include <string>
#include <vector>

#include "cli_common.h"
#include "commands.h"

namespace attnfilter::cli {

int RunSynth(const SynthArgs& args) {
  if (args.count == 0) throw ConfigError("--count must be positive");
  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) throw ConfigError("cannot create " + args.out_dir + ": " + ec.message());
  if (!args.images_dir.empty()) {
    fs::create_directories(args.images_dir, ec);
    if (ec) throw ConfigError("cannot create " + args.images_dir + ": " + ec.message());
  }
  for (std::size_t i = 0; i < args.count; ++i) {
    const std::string id = "synthetic_" + std::to_string(i);
    af_synthetic_spec spec;
    af_synthetic_spec_default(&spec);
    spec.layers = args.layers;
    spec.heads = args.heads;
    spec.image_size = args.image_size;
    spec.patch_size = args.patch_size;
    spec.class_count = args.classes;
    spec.seed = args.seed + i;
    spec.image_id = id.c_str();
    af_bundle* raw = nullptr;
    if (af_bundle_synthetic(&spec, &raw) != AF_OK) throw ConfigError(af_last_error());
    const BundlePtr bundle(raw);
    const fs::path dir = fs::path(args.out_dir) / id;
    Check(af_bundle_save(bundle.get(), dir.c_str(), args.overwrite ? 1 : 0), dir.string());

    if (!args.images_dir.empty()) {
      std::mt19937_64 rng(args.seed + i);
      std::normal_distribution<float> normal(0.0f, 1.0f);
      std::vector<float> pixels(3 * args.image_size * args.image_size);
      for (float& v : pixels) v = normal(rng);
      af_image* im = nullptr;
      Check(af_image_from_values(3, args.image_size, args.image_size, pixels.data(), &im), id);
      const ImagePtr image(im);
      const fs::path path = fs::path(args.images_dir) / (id + ".npy");
      Check(af_image_save_npy(image.get(), path.c_str()), path.string());
    }
  }
  return kExitOk;
}

}  // namespace attnfilter::cli
