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

#include "cli_common.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

namespace attnfilter::cli {
namespace {

std::mutex& LogMutex() {
  static std::mutex m;
  return m;
}

bool IsBundleDir(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p / "manifest.json", ec);
}

}  // namespace

void Check(af_status status, const std::string& context) {
  if (status == AF_OK) return;
  throw std::runtime_error(context + ": " + af_status_name(status) + ": " + af_last_error());
}

std::vector<fs::path> DiscoverBundles(const std::vector<std::string>& paths) {
  std::set<fs::path> found;
  for (const std::string& p : paths) {
    const fs::path path(p);
    std::error_code ec;
    if (!fs::is_directory(path, ec)) throw ConfigError("not a directory: " + p);
    if (IsBundleDir(path)) {
      found.insert(path);
      continue;
    }
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_directory() && IsBundleDir(entry.path())) found.insert(entry.path());
    }
  }
  return {found.begin(), found.end()};
}

std::optional<fs::path> FindByStem(const fs::path& dir, const std::string& stem) {
  if (dir.empty()) return std::nullopt;
  for (const char* ext : {".npy", ".png"}) {
    fs::path p = dir / (stem + ext);
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) return p;
  }
  return std::nullopt;
}

std::string ResolveOracleSpec(const std::string& flag_value) {
  const char* env = std::getenv("ATTNFILTER_ORACLE");
  if (env != nullptr && *env != '\0') return env;
  return flag_value;
}

OraclePtr OpenOracle(const std::string& spec, int timeout_ms) {
  af_oracle* raw = nullptr;
  const af_status st = af_oracle_open(spec.c_str(), timeout_ms, &raw);
  if (st != AF_OK) {
    throw ConfigError("cannot open oracle '" + spec + "': " + af_status_name(st) + ": " +
                      af_last_error());
  }
  return OraclePtr(raw);
}

int64_t ParseClass(const std::string& text) {
  if (text == "predicted") return AF_CLASS_PREDICTED;
  int64_t v = -1;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 0) {
    throw ConfigError("--class expects 'predicted' or a class index, got '" + text + "'");
  }
  return v;
}

std::string FormatNumber(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t WorkerCount(std::size_t n, int jobs) {
  return std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs))));
}

void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers = WorkerCount(n, jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = next++; i < n; i = next++) fn(i, w);
    });
  }
  for (auto& t : pool) t.join();
}

void LogError(const std::string& message) {
  std::lock_guard<std::mutex> lock(LogMutex());
  std::cerr << "error: " << message << "\n";
}

void LogInfo(const std::string& message) {
  std::lock_guard<std::mutex> lock(LogMutex());
  std::cerr << message << "\n";
}

}  // namespace attnfilter::cli
