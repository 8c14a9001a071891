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

#include "attnfilter/attnfilter.h"

#include <algorithm>
#include <chrono>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/bundle.h"
#include "core/error.h"
#include "core/explain.h"
#include "core/grid.h"
#include "core/image_io.h"
#include "core/npy.h"
#include "core/oracle_client.h"
#include "core/perturbation.h"
#include "core/saliency_metrics.h"
#include "core/stability.h"
#include "core/synthetic.h"

namespace af = attnfilter;

struct af_bundle {
  af::AttentionBundle bundle;
};
struct af_map {
  af::SaliencyMap map;
};
struct af_gaze {
  af::Grid grid;
};
struct af_image {
  af::Image image;
};
struct af_oracle {
  std::unique_ptr<af::OracleSession> session;
};

namespace {

thread_local std::string g_last_error;

af_status SetError(af_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
af_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return AF_OK;
  } catch (const af::Error& e) {
    return SetError(static_cast<af_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return SetError(AF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return SetError(AF_ERR_INTERNAL, e.what());
  } catch (...) {
    return SetError(AF_ERR_INTERNAL, "unknown exception");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) af::Fail(af::ErrorCode::kInvalidArgument, what);
}

af::ExplainOptions ToCore(const af_explain_options* o) {
  af_explain_options d;
  af_explain_options_default(&d);
  if (o == nullptr) o = &d;
  Require(o->class_id >= AF_CLASS_PREDICTED, "class_id must be >= 0 or AF_CLASS_PREDICTED");
  af::ExplainOptions out;
  out.k = o->k;
  if (o->class_id != AF_CLASS_PREDICTED) out.class_id = o->class_id;
  out.rollout.clamp_modulation = o->clamp_modulation != 0;
  out.rollout.weight_source = o->weight_source == AF_WEIGHT_CLS_ROW
                                  ? af::WeightSource::kClsRow
                                  : af::WeightSource::kFullMatrix;
  out.seed = o->seed;
  return out;
}

af::Method ToCore(af_method m) {
  Require(m >= AF_METHOD_RFEM && m <= AF_METHOD_CBCAM, "unknown method");
  return static_cast<af::Method>(m);
}

af::Grid GridFrom(size_t rows, size_t cols, const double* values) {
  Require(values != nullptr, "null values");
  return af::Grid(rows, cols, std::vector<double>(values, values + rows * cols));
}

std::size_t Argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

af::CorrectnessOptions ToCore(const af_correctness_options* o, const af::Image& image) {
  af_correctness_options d;
  af_correctness_options_default(&d);
  if (o == nullptr) o = &d;
  af::CorrectnessOptions out;
  out.curve.step_pixels =
      o->steps > 0 ? af::StepForCount(image.NumPixels(), o->steps) : o->step_pixels;
  Require(out.curve.step_pixels > 0, "step_pixels must be positive");
  if (o->fill != nullptr && o->fill_len > 0) {
    out.curve.fill.assign(o->fill, o->fill + o->fill_len);
  }
  out.support_threshold = o->support_threshold;
  return out;
}

af_status Correctness(const af::ScoreFn& score, const af::Image& image, const af_map* map,
                      const af_correctness_options* options, af_correctness* out) {
  return Guard([&] {
    Require(map != nullptr && out != nullptr, "null argument");
    const af::CorrectnessOptions opts = ToCore(options, image);
    af::SaliencyMap s = map->map;
    if (s.height != image.height || s.width != image.width) {
      // Values stay in [0,1] under bilinear resampling.
      const af::Grid g = af::SaliencyAtResolution(s, image.height, image.width);
      s.height = image.height;
      s.width = image.width;
      s.values.assign(g.values.begin(), g.values.end());
    }
    const af::CorrectnessScores r = af::EvaluateCorrectness(image, s, score, opts);
    out->iauc = r.iauc;
    out->dauc = r.dauc;
    out->delta_a_f = r.delta_a_f;
    out->p = r.confidence.p;
    out->o = r.confidence.o;
  });
}

std::vector<af::ConfidencePair> Pairs(const double* p, const double* o, size_t n) {
  Require(n == 0 || (p != nullptr && o != nullptr), "null confidence arrays");
  std::vector<af::ConfidencePair> pairs(n);
  for (size_t i = 0; i < n; ++i) pairs[i] = {p[i], o[i]};
  return pairs;
}

void Store(const af::AverageResult& r, af_average* out) {
  out->value = r.value;
  out->used = r.used;
  out->skipped = r.skipped;
}

}  // namespace

extern "C" {

const char* af_status_name(af_status status) {
  if (status == AF_OK) return "Ok";
  if (status == AF_ERR_INTERNAL) return "InternalError";
  if (status >= AF_ERR_FORMAT && status <= AF_ERR_INVALID_ARGUMENT) {
    return af::ErrorCodeName(static_cast<af::ErrorCode>(status));
  }
  return "UnknownStatus";
}

const char* af_last_error(void) { return g_last_error.c_str(); }

const char* af_version(void) { return "1.0.0"; }

void af_set_warning_callback(af_warning_fn fn, void* user) {
  if (fn == nullptr) {
    af::SetWarningHandler(nullptr);
    return;
  }
  af::SetWarningHandler([fn, user](std::string_view msg) {
    const std::string copy(msg);
    fn(copy.c_str(), user);
  });
}

void af_synthetic_spec_default(af_synthetic_spec* spec) {
  if (spec == nullptr) return;
  *spec = {};
  spec->layers = 12;
  spec->heads = 12;
  spec->image_size = 224;
  spec->patch_size = 16;
  spec->class_count = 10;
  spec->temperature = 1.0;
  spec->image_id = "synthetic";
}

af_status af_bundle_load(const char* dir, af_bundle** out) {
  return Guard([&] {
    Require(dir != nullptr && out != nullptr, "null argument");
    auto b = std::make_unique<af_bundle>();
    b->bundle = af::LoadBundle(dir);
    *out = b.release();
  });
}

af_status af_bundle_save(const af_bundle* bundle, const char* dir, int overwrite) {
  return Guard([&] {
    Require(bundle != nullptr && dir != nullptr, "null argument");
    af::SaveBundle(bundle->bundle, dir, overwrite != 0);
  });
}

af_status af_bundle_synthetic(const af_synthetic_spec* spec, af_bundle** out) {
  return Guard([&] {
    Require(spec != nullptr && out != nullptr, "null argument");
    af::SyntheticSpec s;
    s.layers = spec->layers;
    s.heads = spec->heads;
    s.image_size = spec->image_size;
    s.patch_size = spec->patch_size;
    s.class_count = spec->class_count;
    if (spec->gradient_classes != nullptr) {
      s.gradient_classes.assign(spec->gradient_classes,
                                spec->gradient_classes + spec->gradient_class_count);
    }
    s.temperature = spec->temperature;
    s.seed = spec->seed;
    if (spec->image_id != nullptr) s.image_id = spec->image_id;
    auto b = std::make_unique<af_bundle>();
    b->bundle = af::MakeSyntheticBundle(s);
    *out = b.release();
  });
}

af_status af_bundle_validate(const af_bundle* bundle) {
  return Guard([&] {
    Require(bundle != nullptr, "null bundle");
    af::ValidateBundle(bundle->bundle);
  });
}

void af_bundle_free(af_bundle* bundle) { delete bundle; }

af_status af_bundle_geometry(const af_bundle* bundle, af_geometry* out) {
  return Guard([&] {
    Require(bundle != nullptr && out != nullptr, "null argument");
    const af::BundleGeometry& g = bundle->bundle.geometry;
    *out = {g.layers, g.heads, g.tokens, g.patch_size, g.image_height, g.image_width,
            g.class_count};
  });
}

const char* af_bundle_image_id(const af_bundle* bundle) {
  return bundle == nullptr ? "" : bundle->bundle.image_id.c_str();
}

af_status af_bundle_predicted_class(const af_bundle* bundle, int64_t* out) {
  return Guard([&] {
    Require(bundle != nullptr && out != nullptr, "null argument");
    *out = bundle->bundle.PredictedClass();
  });
}

size_t af_bundle_gradient_classes(const af_bundle* bundle, int64_t* out, size_t capacity) {
  if (bundle == nullptr) return 0;
  size_t i = 0;
  for (const auto& [c, unused] : bundle->bundle.gradients) {
    if (out != nullptr && i < capacity) out[i] = c;
    ++i;
  }
  return i;
}

void af_explain_options_default(af_explain_options* options) {
  if (options == nullptr) return;
  options->k = af::kDefaultK;
  options->class_id = AF_CLASS_PREDICTED;
  options->clamp_modulation = 0;
  options->weight_source = AF_WEIGHT_FULL_MATRIX;
  options->seed = 0;
}

af_status af_method_parse(const char* name, af_method* out) {
  return Guard([&] {
    Require(name != nullptr && out != nullptr, "null argument");
    const auto m = af::ParseMethod(name);
    if (!m) af::Fail(af::ErrorCode::kInvalidArgument, std::string("unknown method '") + name + "'");
    *out = static_cast<af_method>(*m);
  });
}

const char* af_method_name(af_method method) {
  if (method < AF_METHOD_RFEM || method > AF_METHOD_CBCAM) return "";
  return af::MethodName(static_cast<af::Method>(method)).data();
}

int af_method_needs_class(af_method method) {
  if (method < AF_METHOD_RFEM || method > AF_METHOD_CBCAM) return 0;
  return af::MethodNeedsClass(static_cast<af::Method>(method)) ? 1 : 0;
}

af_status af_explain(const af_bundle* bundle, af_method method,
                     const af_explain_options* options, af_map** out) {
  return Guard([&] {
    Require(bundle != nullptr && out != nullptr, "null argument");
    auto m = std::make_unique<af_map>();
    m->map = af::Explain(bundle->bundle, ToCore(method), ToCore(options));
    *out = m.release();
  });
}

af_status af_random_map(size_t height, size_t width, uint64_t seed, af_map** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    auto m = std::make_unique<af_map>();
    m->map = af::RandomBaselineMap(height, width, seed);
    *out = m.release();
  });
}

af_status af_cbcam_map(size_t height, size_t width, af_map** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    auto m = std::make_unique<af_map>();
    m->map = af::CbCamMap(height, width);
    *out = m.release();
  });
}

af_status af_map_from_values(size_t height, size_t width, const float* values, af_map** out) {
  return Guard([&] {
    Require(values != nullptr && out != nullptr, "null argument");
    auto m = std::make_unique<af_map>();
    m->map = af::SaliencyFromValues(height, width,
                                    std::vector<float>(values, values + height * width));
    *out = m.release();
  });
}

af_status af_map_normalize(size_t height, size_t width, const double* values, af_map** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    auto m = std::make_unique<af_map>();
    m->map = af::NormalizeToSaliency(GridFrom(height, width, values));
    *out = m.release();
  });
}

af_status af_map_load_npy(const char* path, af_map** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    const af::FloatTensor t = af::ReadTensor(path);
    if (t.shape.size() != 2) {
      af::Fail(af::ErrorCode::kShape,
               std::string("saliency map ") + path + " has shape " + af::ShapeToString(t.shape));
    }
    auto m = std::make_unique<af_map>();
    m->map = af::SaliencyFromValues(t.shape[0], t.shape[1], t.values);
    *out = m.release();
  });
}

af_status af_map_save_npy(const af_map* map, const char* path) {
  return Guard([&] {
    Require(map != nullptr && path != nullptr, "null argument");
    af::WriteTensor(af::FloatTensor{{map->map.height, map->map.width}, map->map.values}, path);
  });
}

af_status af_map_save_png(const af_map* map, const char* path) {
  return Guard([&] {
    Require(map != nullptr && path != nullptr, "null argument");
    af::WriteHeatmapPng(path, map->map);
  });
}

af_status af_map_save_overlay_png(const af_map* map, const af_image* background,
                                  const char* path) {
  return Guard([&] {
    Require(map != nullptr && background != nullptr && path != nullptr, "null argument");
    af::WriteOverlayPng(path, map->map, background->image);
  });
}

af_status af_map_resize(const af_map* map, size_t height, size_t width, af_map** out) {
  return Guard([&] {
    Require(map != nullptr && out != nullptr, "null argument");
    const af::Grid g = af::SaliencyAtResolution(map->map, height, width);
    auto m = std::make_unique<af_map>();
    m->map.height = height;
    m->map.width = width;
    m->map.values.assign(g.values.begin(), g.values.end());
    m->map.non_degenerate = map->map.non_degenerate;
    *out = m.release();
  });
}

size_t af_map_height(const af_map* map) { return map == nullptr ? 0 : map->map.height; }
size_t af_map_width(const af_map* map) { return map == nullptr ? 0 : map->map.width; }
const float* af_map_values(const af_map* map) {
  return map == nullptr ? nullptr : map->map.values.data();
}
int af_map_non_degenerate(const af_map* map) {
  return map != nullptr && map->map.non_degenerate ? 1 : 0;
}
void af_map_free(af_map* map) { delete map; }

af_status af_gaze_load(const char* path, af_gaze** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    auto g = std::make_unique<af_gaze>();
    g->grid = af::LoadGazeMap(path);
    *out = g.release();
  });
}

af_status af_gaze_from_values(size_t rows, size_t cols, const double* values, af_gaze** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    auto g = std::make_unique<af_gaze>();
    g->grid = GridFrom(rows, cols, values);
    *out = g.release();
  });
}

size_t af_gaze_rows(const af_gaze* gaze) { return gaze == nullptr ? 0 : gaze->grid.rows; }
size_t af_gaze_cols(const af_gaze* gaze) { return gaze == nullptr ? 0 : gaze->grid.cols; }
const double* af_gaze_values(const af_gaze* gaze) {
  return gaze == nullptr ? nullptr : gaze->grid.values.data();
}
void af_gaze_free(af_gaze* gaze) { delete gaze; }

af_status af_image_load(const char* path, const double* mean, const double* std,
                        size_t channels, af_image** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    Require((mean == nullptr) == (std == nullptr), "mean and std go together");
    const std::span<const double> m = mean ? std::span<const double>(mean, channels)
                                           : std::span<const double>();
    const std::span<const double> s = std ? std::span<const double>(std, channels)
                                          : std::span<const double>();
    auto img = std::make_unique<af_image>();
    img->image = af::LoadImage(path, m, s);
    *out = img.release();
  });
}

af_status af_image_from_values(size_t channels, size_t height, size_t width,
                               const float* values, af_image** out) {
  return Guard([&] {
    Require(values != nullptr && out != nullptr, "null argument");
    auto img = std::make_unique<af_image>();
    img->image = {channels, height, width,
                  std::vector<float>(values, values + channels * height * width)};
    *out = img.release();
  });
}

af_status af_image_save_npy(const af_image* image, const char* path) {
  return Guard([&] {
    Require(image != nullptr && path != nullptr, "null argument");
    af::WriteTensor(image->image.ToTensor(), path);
  });
}

void af_image_shape(const af_image* image, size_t* channels, size_t* height, size_t* width) {
  if (channels) *channels = image ? image->image.channels : 0;
  if (height) *height = image ? image->image.height : 0;
  if (width) *width = image ? image->image.width : 0;
}

const float* af_image_values(const af_image* image) {
  return image == nullptr ? nullptr : image->image.values.data();
}
void af_image_free(af_image* image) { delete image; }

af_status af_plausibility_evaluate(const af_map* map, const af_gaze* gaze,
                                   af_plausibility* out) {
  return Guard([&] {
    Require(map != nullptr && gaze != nullptr && out != nullptr, "null argument");
    const af::PlausibilityScores s = af::EvaluatePlausibility(map->map, gaze->grid);
    *out = {s.sim, s.pcc, s.auc_judd, s.nss};
  });
}

af_status af_metric_sim(size_t rows, size_t cols, const double* saliency,
                        const double* density, double* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = af::Sim(GridFrom(rows, cols, saliency), GridFrom(rows, cols, density));
  });
}

af_status af_metric_pcc(size_t rows, size_t cols, const double* saliency,
                        const double* density, double* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = af::Pcc(GridFrom(rows, cols, saliency), GridFrom(rows, cols, density));
  });
}

af_status af_metric_nss(size_t rows, size_t cols, const double* saliency,
                        const double* density, double* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = af::Nss(GridFrom(rows, cols, saliency),
                   af::FixationMapFromDensity(GridFrom(rows, cols, density)));
  });
}

af_status af_metric_auc_judd(size_t rows, size_t cols, const double* saliency,
                             const double* density, double* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = af::AucJudd(GridFrom(rows, cols, saliency),
                       af::FixationMapFromDensity(GridFrom(rows, cols, density)));
  });
}

void af_correctness_options_default(af_correctness_options* options) {
  if (options == nullptr) return;
  options->step_pixels = af::kDefaultStepPixels;
  options->steps = 0;
  options->support_threshold = af::kDefaultSupportThreshold;
  options->fill = nullptr;
  options->fill_len = 0;
  options->class_id = AF_CLASS_PREDICTED;
}

af_status af_correctness_evaluate(af_oracle* oracle, const af_image* image, const af_map* map,
                                  const af_correctness_options* options,
                                  af_correctness* out) {
  int64_t class_id = AF_CLASS_PREDICTED;
  const af_status st = Guard([&] {
    Require(oracle != nullptr && image != nullptr && out != nullptr, "null argument");
    class_id = options != nullptr ? options->class_id : AF_CLASS_PREDICTED;
    Require(class_id >= AF_CLASS_PREDICTED, "invalid class_id");
    if (class_id == AF_CLASS_PREDICTED) {
      class_id = static_cast<int64_t>(Argmax(oracle->session->Score(image->image)));
    }
    Require(static_cast<size_t>(class_id) < oracle->session->info().class_count,
            "class_id out of range");
  });
  if (st != AF_OK) return st;
  af::OracleSession& session = *oracle->session;
  const af::ScoreFn score = [&session, class_id](const af::Image& x) {
    return session.Score(x)[static_cast<size_t>(class_id)];
  };
  out->class_id = class_id;
  return Correctness(score, image->image, map, options, out);
}

af_status af_correctness_evaluate_fn(af_score_fn score, void* user, const af_image* image,
                                     const af_map* map, const af_correctness_options* options,
                                     af_correctness* out) {
  if (score == nullptr || image == nullptr) {
    return SetError(AF_ERR_INVALID_ARGUMENT, "null argument");
  }
  const af::ScoreFn fn = [score, user](const af::Image& x) {
    double v = 0.0;
    if (score(x.values.data(), x.channels, x.height, x.width, user, &v) != 0) {
      af::Fail(af::ErrorCode::kOracle, "score callback reported failure");
    }
    return v;
  };
  if (out != nullptr) out->class_id = options != nullptr ? options->class_id : AF_CLASS_PREDICTED;
  return Correctness(fn, image->image, map, options, out);
}

af_status af_average_drop(const double* p, const double* o, size_t n, af_average* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    Store(af::AverageDrop(Pairs(p, o, n)), out);
  });
}

af_status af_average_increase(const double* p, const double* o, size_t n, af_average* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    Store(af::AverageIncrease(Pairs(p, o, n)), out);
  });
}

af_status af_average_gain(const double* p, const double* o, size_t n, af_average* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    Store(af::AverageGain(Pairs(p, o, n)), out);
  });
}

void af_stability_options_default(af_stability_options* options) {
  if (options == nullptr) return;
  options->epsilon = 0.0;
  options->n_samples = af::kDefaultStabilitySamples;
  options->seed = 0;
  options->method = AF_METHOD_RFEM;
  af_explain_options_default(&options->explain);
}

af_status af_stability_evaluate(af_oracle* oracle, const af_image* image,
                                const af_stability_options* options, af_stability* out) {
  return Guard([&] {
    Require(oracle != nullptr && image != nullptr && out != nullptr, "null argument");
    af_stability_options d;
    af_stability_options_default(&d);
    if (options == nullptr) options = &d;
    af::OracleSession& session = *oracle->session;
    const af::Image& x0 = image->image;
    const af::Method method = ToCore(options->method);
    af::ExplainOptions explain = ToCore(&options->explain);
    if (!explain.class_id) {
      explain.class_id = static_cast<std::int64_t>(Argmax(session.Score(x0)));
    }
    const std::int64_t c = *explain.class_id;
    Require(c >= 0 && static_cast<size_t>(c) < session.info().class_count,
            "class_id out of range");

    const af::ExplainFn explain_fn = [&](const af::Image& x) {
      af::SaliencyMap m;
      if (method == af::Method::kRandom) {
        m = af::RandomBaselineMap(x.height, x.width, explain.seed);
      } else if (method == af::Method::kCbCam) {
        m = af::CbCamMap(x.height, x.width);
      } else {
        std::vector<std::int64_t> classes;
        if (af::MethodNeedsClass(method)) classes.push_back(c);
        m = af::Explain(session.FetchBundle(x, "neighbour", classes), method, explain);
      }
      return af::SaliencyAtResolution(m, x.height, x.width).values;
    };
    const af::ScoreFn score = [&](const af::Image& x) {
      return session.Score(x)[static_cast<size_t>(c)];
    };
    af::PerturbationConfig cfg = af::DefaultPerturbationConfig(x0, options->seed);
    if (options->epsilon > 0.0) cfg.epsilon = options->epsilon;
    cfg.n_samples = options->n_samples;
    const af::StabilityScores s = af::EvaluateStability(x0, explain_fn, score, cfg);
    out->lip = s.lip;
    out->lss = s.lss;
    out->samples_used = s.samples_used;
    out->class_id = c;
  });
}

af_status af_oracle_open(const char* spec, int timeout_ms, af_oracle** out) {
  return Guard([&] {
    Require(spec != nullptr && out != nullptr, "null argument");
    const auto timeout = timeout_ms > 0 ? std::chrono::milliseconds(timeout_ms)
                                        : af::kDefaultOracleTimeout;
    auto o = std::make_unique<af_oracle>();
    o->session = af::OracleSession::Connect(spec, timeout);
    *out = o.release();
  });
}

af_status af_oracle_info_get(const af_oracle* oracle, af_oracle_info* out) {
  return Guard([&] {
    Require(oracle != nullptr && out != nullptr, "null argument");
    const af::OracleInfo& i = oracle->session->info();
    *out = {i.class_count, i.layers, i.heads, i.tokens, 0, 0, 0};
    if (i.input_shape.size() == 3) {
      out->channels = i.input_shape[0];
      out->height = i.input_shape[1];
      out->width = i.input_shape[2];
    }
  });
}

const char* af_oracle_model(const af_oracle* oracle) {
  return oracle == nullptr ? "" : oracle->session->info().model.c_str();
}

size_t af_oracle_normalization(const af_oracle* oracle, double* mean, double* std,
                               size_t capacity) {
  if (oracle == nullptr) return 0;
  const af::OracleInfo& i = oracle->session->info();
  for (size_t k = 0; k < capacity && k < i.mean.size(); ++k) {
    if (mean) mean[k] = i.mean[k];
    if (std && k < i.std.size()) std[k] = i.std[k];
  }
  return i.mean.size();
}

af_status af_oracle_score(af_oracle* oracle, const af_image* image, double* probs,
                          size_t capacity) {
  return Guard([&] {
    Require(oracle != nullptr && image != nullptr, "null argument");
    const std::vector<double> p = oracle->session->Score(image->image);
    Require(probs != nullptr && capacity >= p.size(), "probability buffer too small");
    std::copy(p.begin(), p.end(), probs);
  });
}

af_status af_oracle_fetch_bundle(af_oracle* oracle, const af_image* image, const char* image_id,
                                 const int64_t* classes, size_t class_count, af_bundle** out) {
  return Guard([&] {
    Require(oracle != nullptr && image != nullptr && out != nullptr, "null argument");
    Require(class_count == 0 || classes != nullptr, "null class list");
    auto b = std::make_unique<af_bundle>();
    b->bundle = oracle->session->FetchBundle(
        image->image, image_id ? image_id : "",
        std::span<const std::int64_t>(classes, class_count));
    *out = b.release();
  });
}

void af_oracle_close(af_oracle* oracle) { delete oracle; }

}  // extern "C"
