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

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cli_common.h"
#include "commands.h"
#include "json.hpp"

namespace attnfilter::cli {
namespace {

using Json = nlohmann::ordered_json;

// Per-image metric columns, in report order.
constexpr std::array<const char*, 12> kRowMetrics = {
    "sim", "pcc", "auc_judd", "nss", "iauc", "dauc", "delta_a_f", "p_c", "o_c", "lip", "lss",
    "class_id"};
constexpr std::size_t kNumValueMetrics = 11;  // class_id is not aggregated
constexpr std::array<const char*, 17> kCsvColumns = {
    "row_type", "image_id", "method", "sim", "pcc", "auc_judd", "nss", "iauc", "dauc",
    "delta_a_f", "ad", "ai", "ag", "p_c", "o_c", "lip", "lss"};

struct Task {
  std::string image_id;
  std::string label;  // method plus optional ".k=<K>"
  af_method method;
  double k;
  fs::path map_path;  // empty for generated baselines
};

struct Row {
  std::map<std::string, double> metrics;  // absent key = null
  std::optional<std::string> error;
};

const std::regex& MapNamePattern() {
  static const std::regex re(
      R"(^(.+)\.(rfem-class|rfem|rollout|saw|gradcam|random|cbcam)(\.k=([-+0-9.eE]+|inf|-inf))?\.npy$)");
  return re;
}

std::vector<Task> CollectTasks(const EvaluateArgs& args) {
  std::vector<Task> tasks;
  std::error_code ec;
  if (!fs::is_directory(args.maps_dir, ec)) throw ConfigError("not a directory: " + args.maps_dir);
  std::set<std::string> ids;
  for (const auto& entry : fs::directory_iterator(args.maps_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, MapNamePattern())) continue;
    Task t;
    t.image_id = m[1];
    af_method_parse(m[2].str().c_str(), &t.method);
    t.label = m[2].str() + m[3].str();
    t.k = m[4].matched ? std::stod(m[4]) : 1.0;
    t.map_path = entry.path();
    ids.insert(t.image_id);
    tasks.push_back(std::move(t));
  }
  for (const std::string& b : args.baselines) {
    af_method m;
    if (af_method_parse(b.c_str(), &m) != AF_OK || (m != AF_METHOD_RANDOM && m != AF_METHOD_CBCAM)) {
      throw ConfigError("--baseline accepts 'random' and 'cbcam', got '" + b + "'");
    }
    for (const std::string& id : ids) {
      bool present = false;
      for (const Task& t : tasks) present |= t.image_id == id && t.label == b;
      if (!present) tasks.push_back({id, b, m, 1.0, {}});
    }
  }
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return std::tie(a.image_id, a.label) < std::tie(b.image_id, b.label);
  });
  return tasks;
}

std::string Timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json Nullable(const std::map<std::string, double>& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end() || !std::isfinite(it->second)) return nullptr;
  return it->second;
}

std::string CsvCell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<int64_t>());
  if (v.is_number()) return FormatNumber(v.get<double>());
  return v.get<std::string>();
}

std::string CsvQuote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Evaluator {
 public:
  Evaluator(const EvaluateArgs& args, std::vector<OraclePtr>& oracles)
      : args_(args), oracles_(oracles) {}

  Row Run(const Task& task, std::size_t worker) {
    Row row;
    std::vector<std::string> errors;
    // Each metric group fails on its own; the others still fill in.
    auto guarded = [&](const auto& body) {
      try {
        body();
      } catch (const std::exception& e) {
        errors.push_back(e.what());
        LogError(task.image_id + " " + task.label + ": " + e.what());
      }
    };
    af_oracle* oracle = oracles_.empty() ? nullptr : oracles_[worker].get();
    ImagePtr image;
    GazePtr gaze;
    MapPtr map;
    guarded([&] {
      image = LoadImage(task.image_id, oracle);
      gaze = LoadGaze(task.image_id);
      map = LoadMap(task, image.get(), gaze.get());
    });
    if (!map) {
      row.error = errors.empty() ? "no map" : errors.front();
      return row;
    }
    guarded([&] {
      if (gaze) {
        af_plausibility p;
        Check(af_plausibility_evaluate(map.get(), gaze.get(), &p), "plausibility");
        row.metrics["sim"] = p.sim;
        row.metrics["pcc"] = p.pcc;
        row.metrics["auc_judd"] = p.auc_judd;
        row.metrics["nss"] = p.nss;
      }
    });
    std::int64_t class_id = -1;
    guarded([&] {
      if (oracle != nullptr && image) {
        af_correctness_options opts;
        af_correctness_options_default(&opts);
        opts.step_pixels = args_.step_pixels;
        opts.steps = args_.steps;
        opts.support_threshold = args_.support_threshold;
        opts.class_id = ParseClass(args_.class_id);
        const std::vector<float> fill = Fill(oracle);
        opts.fill = fill.data();
        opts.fill_len = fill.size();
        af_correctness c;
        Check(af_correctness_evaluate(oracle, image.get(), map.get(), &opts, &c), "correctness");
        row.metrics["iauc"] = c.iauc;
        row.metrics["dauc"] = c.dauc;
        row.metrics["delta_a_f"] = c.delta_a_f;
        row.metrics["p_c"] = c.p;
        row.metrics["o_c"] = c.o;
        row.metrics["class_id"] = static_cast<double>(c.class_id);
        class_id = c.class_id;
      }
    });
    guarded([&] {
      if (oracle != nullptr && image && class_id >= 0 && args_.stability) {
        af_stability_options so;
        af_stability_options_default(&so);
        so.epsilon = args_.epsilon;
        so.n_samples = args_.stability_samples;
        so.seed = args_.seed;
        so.method = task.method;
        so.explain.k = task.k;
        so.explain.class_id = class_id;
        so.explain.seed = args_.seed;
        af_stability s;
        Check(af_stability_evaluate(oracle, image.get(), &so, &s), "stability");
        row.metrics["lip"] = s.lip;
        row.metrics["lss"] = s.lss;
      }
    });
    if (!errors.empty()) {
      std::string joined;
      for (const std::string& e : errors) joined += (joined.empty() ? "" : "; ") + e;
      row.error = joined;
    }
    return row;
  }

 private:
  ImagePtr LoadImage(const std::string& id, af_oracle* oracle) {
    const auto path = FindByStem(args_.images_dir, id);
    if (!path) return nullptr;
    std::vector<double> mean(8), stdev(8);
    std::size_t n = 0;
    if (oracle != nullptr) n = af_oracle_normalization(oracle, mean.data(), stdev.data(), mean.size());
    af_image* raw = nullptr;
    Check(af_image_load(path->c_str(), n ? mean.data() : nullptr, n ? stdev.data() : nullptr, n,
                        &raw),
          path->string());
    return ImagePtr(raw);
  }

  GazePtr LoadGaze(const std::string& id) {
    const auto path = FindByStem(args_.gaze_dir, id);
    if (!path) return nullptr;
    af_gaze* raw = nullptr;
    Check(af_gaze_load(path->c_str(), &raw), path->string());
    return GazePtr(raw);
  }

  MapPtr LoadMap(const Task& t, const af_image* image, const af_gaze* gaze) {
    af_map* raw = nullptr;
    if (!t.map_path.empty()) {
      Check(af_map_load_npy(t.map_path.c_str(), &raw), t.map_path.string());
      return MapPtr(raw);
    }
    std::size_t h = 0, w = 0;
    if (image != nullptr) {
      af_image_shape(image, nullptr, &h, &w);
    } else if (gaze != nullptr) {
      h = af_gaze_rows(gaze);
      w = af_gaze_cols(gaze);
    } else {
      throw std::runtime_error("baseline needs an image or a gaze map for its size");
    }
    Check(t.method == AF_METHOD_RANDOM ? af_random_map(h, w, args_.seed, &raw)
                                       : af_cbcam_map(h, w, &raw),
          t.label);
    return MapPtr(raw);
  }

  std::vector<float> Fill(af_oracle* oracle) const {
    std::vector<double> mean(8), stdev(8);
    const std::size_t n = af_oracle_normalization(oracle, mean.data(), stdev.data(), mean.size());
    if (n == 0) return {0.0f};
    std::vector<float> fill(n, 0.0f);
    // "mean": the dataset mean colour, which standardization maps to 0.
    if (args_.fill == "black") {
      for (std::size_t c = 0; c < n; ++c) fill[c] = static_cast<float>(-mean[c] / stdev[c]);
    }
    return fill;
  }

  const EvaluateArgs& args_;
  std::vector<OraclePtr>& oracles_;
};

Json Stats(const std::vector<double>& v) {
  if (v.empty()) return Json{{"mean", nullptr}, {"std", nullptr}, {"n", 0}};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return Json{{"mean", mean}, {"std", std::sqrt(ss / static_cast<double>(v.size()))}, {"n", v.size()}};
}

Json Average(af_status (*fn)(const double*, const double*, size_t, af_average*),
             const std::vector<double>& p, const std::vector<double>& o) {
  af_average a{};
  if (p.empty() || fn(p.data(), o.data(), p.size(), &a) != AF_OK || a.used == 0) {
    return Json{{"value", nullptr}, {"used", a.used}, {"skipped", a.skipped}};
  }
  return Json{{"value", a.value}, {"used", a.used}, {"skipped", a.skipped}};
}

}  // namespace

int RunEvaluate(const EvaluateArgs& args) {
  if (args.fill != "mean" && args.fill != "black") {
    throw ConfigError("--fill must be 'mean' or 'black'");
  }
  ParseClass(args.class_id);
  const std::vector<Task> tasks = CollectTasks(args);
  if (tasks.empty()) throw ConfigError("no saliency maps found in " + args.maps_dir);

  const std::string spec = ResolveOracleSpec(args.oracle);
  if (args.stability && spec.empty()) throw ConfigError("--stability needs an oracle");
  std::vector<OraclePtr> oracles;
  const std::size_t workers = WorkerCount(tasks.size(), args.jobs);
  if (!spec.empty()) {
    for (std::size_t w = 0; w < workers; ++w) oracles.push_back(OpenOracle(spec, args.timeout_ms));
  }

  Evaluator evaluator(args, oracles);
  std::vector<Row> rows(tasks.size());
  ParallelFor(tasks.size(), static_cast<int>(workers),
              [&](std::size_t i, std::size_t w) { rows[i] = evaluator.Run(tasks[i], w); });

  Json report;
  report["schema_version"] = 1;
  report["tool"] = "attnfilter";
  report["version"] = af_version();
  report["generated_at"] = Timestamp();
  report["config"] = {
      {"maps_dir", args.maps_dir},
      {"gaze_dir", args.gaze_dir.empty() ? Json(nullptr) : Json(args.gaze_dir)},
      {"images_dir", args.images_dir.empty() ? Json(nullptr) : Json(args.images_dir)},
      {"oracle", spec.empty() ? Json(nullptr) : Json(spec)},
      {"baselines", args.baselines},
      {"step_pixels", args.step_pixels},
      {"steps", args.steps},
      {"support_threshold", args.support_threshold},
      {"fill", args.fill},
      {"class", args.class_id},
      {"stability", args.stability},
      {"stability_samples", args.stability_samples},
      {"epsilon", args.epsilon > 0 ? Json(args.epsilon) : Json("relative:0.01")},
      {"seed", args.seed}};

  std::size_t failures = 0;
  Json json_rows = Json::array();
  std::map<std::string, std::vector<std::size_t>> by_method;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Json metrics = Json::object();
    for (const char* key : kRowMetrics) metrics[key] = Nullable(rows[i].metrics, key);
    if (!metrics["class_id"].is_null()) metrics["class_id"] = static_cast<int64_t>(rows[i].metrics["class_id"]);
    json_rows.push_back({{"image_id", tasks[i].image_id},
                         {"method", tasks[i].label},
                         {"error", rows[i].error ? Json(*rows[i].error) : Json(nullptr)},
                         {"metrics", metrics}});
    if (rows[i].error) ++failures;
    by_method[tasks[i].label].push_back(i);
  }
  report["rows"] = json_rows;

  Json aggregate = Json::array();
  for (const auto& [label, idx] : by_method) {
    Json metrics = Json::object();
    for (std::size_t m = 0; m < kNumValueMetrics; ++m) {
      std::vector<double> values;
      for (std::size_t i : idx) {
        const auto it = rows[i].metrics.find(kRowMetrics[m]);
        if (it != rows[i].metrics.end() && std::isfinite(it->second)) values.push_back(it->second);
      }
      metrics[kRowMetrics[m]] = Stats(values);
    }
    std::vector<double> p, o;
    for (std::size_t i : idx) {
      const auto& r = rows[i].metrics;
      if (r.contains("p_c") && r.contains("o_c")) {
        p.push_back(r.at("p_c"));
        o.push_back(r.at("o_c"));
      }
    }
    metrics["ad"] = Average(af_average_drop, p, o);
    metrics["ai"] = Average(af_average_increase, p, o);
    metrics["ag"] = Average(af_average_gain, p, o);
    aggregate.push_back({{"method", label}, {"images", idx.size()}, {"metrics", metrics}});
  }
  report["aggregate"] = aggregate;

  const std::string text = report.dump(2) + "\n";
  if (args.report.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(args.report, std::ios::binary);
    if (!(f << text)) throw ConfigError("cannot write " + args.report);
  }

  if (!args.csv.empty()) {
    std::ofstream f(args.csv, std::ios::binary);
    std::string header;
    for (const char* c : kCsvColumns) header += std::string(header.empty() ? "" : ",") + c;
    f << header << "\n";
    auto emit = [&](const std::vector<std::string>& cells) {
      std::string line;
      for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + CsvQuote(cells[i]);
      f << line << "\n";
    };
    for (const Json& r : report["rows"]) {
      std::vector<std::string> cells = {"image", r["image_id"], r["method"]};
      for (std::size_t c = 3; c < kCsvColumns.size(); ++c) {
        const std::string col = kCsvColumns[c];
        cells.push_back(r["metrics"].contains(col) ? CsvCell(r["metrics"][col]) : "");
      }
      emit(cells);
    }
    for (const char* stat : {"mean", "std"}) {
      for (const Json& a : report["aggregate"]) {
        std::vector<std::string> cells = {stat, "", a["method"]};
        for (std::size_t c = 3; c < kCsvColumns.size(); ++c) {
          const std::string col = kCsvColumns[c];
          const Json& m = a["metrics"][col];
          if (col == "ad" || col == "ai" || col == "ag") {
            cells.push_back(std::string(stat) == "mean" ? CsvCell(m["value"]) : "");
          } else {
            cells.push_back(CsvCell(m[stat]));
          }
        }
        emit(cells);
      }
    }
    if (!f) throw ConfigError("cannot write " + args.csv);
  }
  return failures == 0 ? kExitOk : kExitPartial;
}

}  // namespace attnfilter::cli
