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

#ifndef ATTNFILTER_TOOLS_CLI_COMMON_H_
#define ATTNFILTER_TOOLS_CLI_COMMON_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnfilter/attnfilter.h"

namespace attnfilter::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

// Bad flags, unreadable inputs, unreachable oracle: exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws std::runtime_error carrying the status name and last error.
void Check(af_status status, const std::string& context);

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using BundlePtr = std::unique_ptr<af_bundle, HandleDeleter<af_bundle, af_bundle_free>>;
using MapPtr = std::unique_ptr<af_map, HandleDeleter<af_map, af_map_free>>;
using GazePtr = std::unique_ptr<af_gaze, HandleDeleter<af_gaze, af_gaze_free>>;
using ImagePtr = std::unique_ptr<af_image, HandleDeleter<af_image, af_image_free>>;
using OraclePtr = std::unique_ptr<af_oracle, HandleDeleter<af_oracle, af_oracle_close>>;

// Each path is either a bundle directory (has manifest.json) or a directory
// whose immediate subdirectories are bundles. Sorted, deduplicated.
std::vector<fs::path> DiscoverBundles(const std::vector<std::string>& paths);

// <dir>/<stem>.npy, then <dir>/<stem>.png.
std::optional<fs::path> FindByStem(const fs::path& dir, const std::string& stem);

// --oracle value unless ATTNFILTER_ORACLE is set.
std::string ResolveOracleSpec(const std::string& flag_value);

OraclePtr OpenOracle(const std::string& spec, int timeout_ms);

// "predicted" or a non-negative integer.
int64_t ParseClass(const std::string& text);

// Shortest decimal form that round-trips ("-0.5", "1", "1.25").
std::string FormatNumber(double v);

// Runs fn(i, worker) for i in [0, n) on up to `jobs` threads, worker being
// the thread slot in [0, WorkerCount(n, jobs)). fn must not throw.
std::size_t WorkerCount(std::size_t n, int jobs);
void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t, std::size_t)>& fn);

// Serialized stderr logging for worker threads.
void LogError(const std::string& message);
void LogInfo(const std::string& message);

}  // namespace attnfilter::cli

#endif  // ATTNFILTER_TOOLS_CLI_COMMON_H_
