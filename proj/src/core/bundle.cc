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

#include "core/bundle.h"

#include <algorithm>
#include <cmath>
#include <system_error>

#include "core/error.h"
#include "json.hpp"

namespace attnfilter {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kManifest = "manifest.json";

[[noreturn]] void Invalid(const std::string& invariant, const std::string& detail) {
  Fail(ErrorCode::kBundleInvalid, invariant + ": " + detail);
}

std::string GradientKey(std::int64_t c) { return "gradients_" + std::to_string(c); }

std::size_t SliceOffset(const BundleGeometry& g, std::size_t layer, std::size_t head) {
  return (layer * g.heads + head) * g.tokens * g.tokens;
}

void CheckGeometry(const BundleGeometry& g) {
  if (g.layers == 0 || g.heads == 0) Invalid("geometry", "layers and heads must be >= 1");
  if (g.patch_size == 0) Invalid("geometry", "patch_size must be >= 1");
  if (g.image_height % g.patch_size != 0 || g.image_width % g.patch_size != 0) {
    Invalid("geometry", "image " + std::to_string(g.image_height) + "x" +
                            std::to_string(g.image_width) +
                            " is not a multiple of patch_size " +
                            std::to_string(g.patch_size));
  }
  const std::size_t n = (g.image_height / g.patch_size) * (g.image_width / g.patch_size);
  if (g.tokens != n + 1) {
    Invalid("geometry", "tokens=" + std::to_string(g.tokens) + " but H*W/P^2 + 1 = " +
                            std::to_string(n + 1));
  }
}

void CheckTensorShape(const FloatTensor& t, const BundleGeometry& g,
                      const std::string& invariant, const std::string& name) {
  const std::vector<std::size_t> want = {g.layers, g.heads, g.tokens, g.tokens};
  if (t.shape != want) {
    Invalid(invariant, name + " has shape " + ShapeToString(t.shape) + ", expected " +
                           ShapeToString(want));
  }
  if (t.values.size() != t.NumElements()) {
    Invalid(invariant, name + " value count does not match its shape");
  }
}

std::size_t GetCount(const json& manifest, const char* key) {
  if (!manifest.contains(key) || !manifest[key].is_number_integer() ||
      manifest[key].get<std::int64_t>() < 0) {
    Fail(ErrorCode::kFormat,
         std::string("manifest.json: missing or invalid integer key '") + key + "'");
  }
  return manifest[key].get<std::size_t>();
}

}  // namespace

std::span<const float> AttentionBundle::Attention(std::size_t layer,
                                                  std::size_t head) const {
  const std::size_t tt = geometry.tokens * geometry.tokens;
  return {attentions.values.data() + SliceOffset(geometry, layer, head), tt};
}

std::span<const float> AttentionBundle::Gradient(std::int64_t class_id, std::size_t layer,
                                                 std::size_t head) const {
  auto it = gradients.find(class_id);
  if (it == gradients.end()) {
    Fail(ErrorCode::kGradientMissing,
         "bundle '" + image_id + "' has no gradients for class " + std::to_string(class_id));
  }
  const std::size_t tt = geometry.tokens * geometry.tokens;
  return {it->second.values.data() + SliceOffset(geometry, layer, head), tt};
}

bool AttentionBundle::HasGradients(std::int64_t class_id) const {
  return gradients.contains(class_id);
}

std::int64_t AttentionBundle::PredictedClass() const {
  if (logits.empty()) {
    Fail(ErrorCode::kInvalidArgument,
         "bundle '" + image_id + "' stores no logits; cannot resolve predicted class");
  }
  return std::distance(logits.begin(), std::max_element(logits.begin(), logits.end()));
}

void ValidateAttentionTensor(const FloatTensor& attentions, const BundleGeometry& g) {
  CheckTensorShape(attentions, g, "shape", "attentions");
  const std::size_t t = g.tokens;
  const float* data = attentions.values.data();
  for (std::size_t i = 0; i < attentions.values.size(); ++i) {
    if (!std::isfinite(data[i])) Invalid("finite", "attentions contain a non-finite value");
    if (data[i] < 0.0f || data[i] > 1.0f) {
      Invalid("range", "attention entry " + std::to_string(data[i]) + " outside [0,1]");
    }
  }
  for (std::size_t l = 0; l < g.layers; ++l) {
    for (std::size_t h = 0; h < g.heads; ++h) {
      const float* m = data + SliceOffset(g, l, h);
      for (std::size_t r = 0; r < t; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < t; ++c) sum += m[r * t + c];
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
          Invalid("row-stochastic", "layer " + std::to_string(l) + " head " +
                                        std::to_string(h) + " row " + std::to_string(r) +
                                        " sums to " + std::to_string(sum));
        }
      }
    }
  }
}

void ValidateBundle(const AttentionBundle& bundle) {
  const BundleGeometry& g = bundle.geometry;
  CheckGeometry(g);
  ValidateAttentionTensor(bundle.attentions, g);
  for (const auto& [c, grad] : bundle.gradients) {
    CheckTensorShape(grad, g, "gradient-shape", GradientKey(c));
    if (c < 0 || (g.class_count > 0 && static_cast<std::size_t>(c) >= g.class_count)) {
      Invalid("gradient-shape", GradientKey(c) + " refers to a class outside [0, C)");
    }
    for (float v : grad.values) {
      if (!std::isfinite(v)) Invalid("finite", GradientKey(c) + " contains a non-finite value");
    }
  }
  if (!bundle.logits.empty()) {
    if (bundle.logits.size() != g.class_count) {
      Invalid("logits-length", "logits has " + std::to_string(bundle.logits.size()) +
                                   " entries, class_count is " +
                                   std::to_string(g.class_count));
    }
    for (float v : bundle.logits) {
      if (!std::isfinite(v)) Invalid("finite", "logits contain a non-finite value");
    }
  }
}

AttentionBundle LoadBundle(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifest;
  if (!fs::exists(manifest_path)) {
    Fail(ErrorCode::kMissingComponent, "no manifest.json in '" + dir.string() + "'");
  }
  json manifest;
  try {
    manifest = json::parse(ReadFileBytes(manifest_path));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, "manifest.json in '" + dir.string() + "': " + e.what());
  }
  if (!manifest.is_object()) Fail(ErrorCode::kFormat, "manifest.json is not an object");

  AttentionBundle bundle;
  if (!manifest.contains("image_id") || !manifest["image_id"].is_string()) {
    Fail(ErrorCode::kFormat, "manifest.json: missing string key 'image_id'");
  }
  bundle.image_id = manifest["image_id"].get<std::string>();
  BundleGeometry& g = bundle.geometry;
  g.layers = GetCount(manifest, "layers");
  g.heads = GetCount(manifest, "heads");
  g.tokens = GetCount(manifest, "tokens");
  g.patch_size = GetCount(manifest, "patch_size");
  g.image_height = GetCount(manifest, "image_height");
  g.image_width = GetCount(manifest, "image_width");
  g.class_count = GetCount(manifest, "class_count");

  if (!manifest.contains("files") || !manifest["files"].is_object()) {
    Fail(ErrorCode::kFormat, "manifest.json: missing object key 'files'");
  }
  const json& files = manifest["files"];
  auto component = [&](const std::string& name) -> fs::path {
    if (!files.contains(name) || !files[name].is_string()) {
      Fail(ErrorCode::kMissingComponent,
           "manifest.json in '" + dir.string() + "' lists no file for '" + name + "'");
    }
    const fs::path p = dir / files[name].get<std::string>();
    if (!fs::exists(p)) {
      Fail(ErrorCode::kMissingComponent, "bundle component '" + name + "' missing: " +
                                             p.string());
    }
    return p;
  };

  bundle.attentions = ReadTensor(component("attentions"));
  if (files.contains("logits")) {
    FloatTensor logits = ReadTensor(component("logits"));
    bundle.logits = std::move(logits.values);
  }
  if (manifest.contains("target_classes")) {
    if (!manifest["target_classes"].is_array()) {
      Fail(ErrorCode::kFormat, "manifest.json: 'target_classes' must be a list");
    }
    for (const json& c : manifest["target_classes"]) {
      if (!c.is_number_integer()) {
        Fail(ErrorCode::kFormat, "manifest.json: 'target_classes' must hold integers");
      }
      const auto id = c.get<std::int64_t>();
      bundle.gradients[id] = ReadTensor(component(GradientKey(id)));
    }
  }
  ValidateBundle(bundle);
  return bundle;
}

void SaveBundle(const AttentionBundle& bundle, const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) {
      Fail(ErrorCode::kIo, "'" + dir.string() + "' exists and is not a directory");
    }
    if (!overwrite && !fs::is_empty(dir, ec)) {
      Fail(ErrorCode::kAlreadyExists, "bundle directory '" + dir.string() +
                                          "' is not empty (overwrite not requested)");
    }
  } else {
    fs::create_directories(dir, ec);
    if (ec) Fail(ErrorCode::kIo, "cannot create '" + dir.string() + "': " + ec.message());
  }

  ordered_json files = ordered_json::object();
  files["attentions"] = "attentions.npy";
  WriteTensor(bundle.attentions, dir / "attentions.npy");
  if (!bundle.logits.empty()) {
    files["logits"] = "logits.npy";
    WriteTensor(FloatTensor{{bundle.logits.size()}, bundle.logits}, dir / "logits.npy");
  }
  ordered_json targets = ordered_json::array();
  for (const auto& [c, grad] : bundle.gradients) {
    const std::string key = GradientKey(c);
    files[key] = key + ".npy";
    WriteTensor(grad, dir / (key + ".npy"));
    targets.push_back(c);
  }

  const BundleGeometry& g = bundle.geometry;
  ordered_json manifest;
  manifest["image_id"] = bundle.image_id;
  manifest["layers"] = g.layers;
  manifest["heads"] = g.heads;
  manifest["tokens"] = g.tokens;
  manifest["patch_size"] = g.patch_size;
  manifest["image_height"] = g.image_height;
  manifest["image_width"] = g.image_width;
  manifest["class_count"] = g.class_count;
  manifest["target_classes"] = targets;
  manifest["files"] = files;
  WriteFileBytes(dir / kManifest, manifest.dump(2) + "\n");
}

std::optional<std::size_t> PatchSizeFor(std::size_t tokens, std::size_t height,
                                        std::size_t width) {
  if (tokens < 2) return std::nullopt;
  const std::size_t n = tokens - 1;
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n || height % side != 0 || width % side != 0) return std::nullopt;
  if (height / side != width / side) return std::nullopt;
  return height / side;
}

}  // namespace attnfilter
