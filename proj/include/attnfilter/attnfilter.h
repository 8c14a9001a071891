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

/* C interface to the attnfilter library.
 *
 * Every fallible call returns an af_status. On failure a description is
 * available from af_last_error() on the calling thread until the next call.
 * Objects are opaque and owned by the caller once returned; release them
 * with the matching *_free function (NULL is accepted). Distinct objects may
 * be used from different threads; a single object must not be.
 */

#ifndef ATTNFILTER_ATTNFILTER_H_
#define ATTNFILTER_ATTNFILTER_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ATTNFILTER_BUILDING_LIBRARY)
#define AF_API __attribute__((visibility("default")))
#else
#define AF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum af_status {
  AF_OK = 0,
  AF_ERR_FORMAT = 1,
  AF_ERR_DTYPE = 2,
  AF_ERR_MISSING_COMPONENT = 3,
  AF_ERR_BUNDLE_INVALID = 4,
  AF_ERR_IO = 5,
  AF_ERR_ALREADY_EXISTS = 6,
  AF_ERR_NUMERIC = 7,
  AF_ERR_SHAPE = 8,
  AF_ERR_GRADIENT_MISSING = 9,
  AF_ERR_GEOMETRY = 10,
  AF_ERR_DEGENERATE_INPUT = 11,
  AF_ERR_ORACLE = 12,
  AF_ERR_PROTOCOL = 13,
  AF_ERR_INVALID_ARGUMENT = 14,
  AF_ERR_INTERNAL = 99
} af_status;

AF_API const char* af_status_name(af_status status);
AF_API const char* af_last_error(void);
AF_API const char* af_version(void);

/* Receives library warnings (skipped samples, narrowed dtypes). Passing NULL
 * restores the default, which prints to stderr. */
typedef void (*af_warning_fn)(const char* message, void* user);
AF_API void af_set_warning_callback(af_warning_fn fn, void* user);

typedef struct af_bundle af_bundle;
typedef struct af_map af_map;
typedef struct af_gaze af_gaze;
typedef struct af_image af_image;
typedef struct af_oracle af_oracle;

/* ---- Attention bundles ---- */

typedef struct af_geometry {
  size_t layers;
  size_t heads;
  size_t tokens;
  size_t patch_size;
  size_t image_height;
  size_t image_width;
  size_t class_count;
} af_geometry;

typedef struct af_synthetic_spec {
  size_t layers;
  size_t heads;
  size_t image_size;
  size_t patch_size;
  size_t class_count;
  const int64_t* gradient_classes; /* NULL: the predicted class only */
  size_t gradient_class_count;
  double temperature;
  uint64_t seed;
  const char* image_id;
} af_synthetic_spec;

/* ViT-B/16 sized defaults: 12 layers, 12 heads, 224 px, 16 px patches. */
AF_API void af_synthetic_spec_default(af_synthetic_spec* spec);

AF_API af_status af_bundle_load(const char* dir, af_bundle** out);
AF_API af_status af_bundle_save(const af_bundle* bundle, const char* dir, int overwrite);
AF_API af_status af_bundle_synthetic(const af_synthetic_spec* spec, af_bundle** out);
AF_API af_status af_bundle_validate(const af_bundle* bundle);
AF_API void af_bundle_free(af_bundle* bundle);

AF_API af_status af_bundle_geometry(const af_bundle* bundle, af_geometry* out);
AF_API const char* af_bundle_image_id(const af_bundle* bundle);
AF_API af_status af_bundle_predicted_class(const af_bundle* bundle, int64_t* out);
/* Writes up to `capacity` class ids and returns how many the bundle has. */
AF_API size_t af_bundle_gradient_classes(const af_bundle* bundle, int64_t* out,
                                         size_t capacity);

/* ---- Explanations ---- */

typedef enum af_method {
  AF_METHOD_RFEM = 0,
  AF_METHOD_RFEM_CLASS = 1,
  AF_METHOD_ROLLOUT = 2,
  AF_METHOD_SAW = 3,
  AF_METHOD_GRADCAM = 4,
  AF_METHOD_RANDOM = 5,
  AF_METHOD_CBCAM = 6
} af_method;

typedef enum af_weight_source {
  AF_WEIGHT_FULL_MATRIX = 0,
  AF_WEIGHT_CLS_ROW = 1
} af_weight_source;

#define AF_CLASS_PREDICTED (-1)

typedef struct af_explain_options {
  double k;
  int64_t class_id; /* AF_CLASS_PREDICTED: argmax of the bundle logits */
  int clamp_modulation;
  af_weight_source weight_source;
  uint64_t seed; /* random baseline */
} af_explain_options;

AF_API void af_explain_options_default(af_explain_options* options);
AF_API af_status af_method_parse(const char* name, af_method* out);
AF_API const char* af_method_name(af_method method);
AF_API int af_method_needs_class(af_method method);

AF_API af_status af_explain(const af_bundle* bundle, af_method method,
                            const af_explain_options* options, af_map** out);
AF_API af_status af_random_map(size_t height, size_t width, uint64_t seed, af_map** out);
AF_API af_status af_cbcam_map(size_t height, size_t width, af_map** out);

/* ---- Saliency maps (values in [0,1], row-major) ---- */

AF_API af_status af_map_from_values(size_t height, size_t width, const float* values,
                                    af_map** out);
/* Min-max normalizes an arbitrary finite field. */
AF_API af_status af_map_normalize(size_t height, size_t width, const double* values,
                                  af_map** out);
AF_API af_status af_map_load_npy(const char* path, af_map** out);
AF_API af_status af_map_save_npy(const af_map* map, const char* path);
AF_API af_status af_map_save_png(const af_map* map, const char* path);
AF_API af_status af_map_save_overlay_png(const af_map* map, const af_image* background,
                                         const char* path);
AF_API af_status af_map_resize(const af_map* map, size_t height, size_t width,
                               af_map** out);
AF_API size_t af_map_height(const af_map* map);
AF_API size_t af_map_width(const af_map* map);
AF_API const float* af_map_values(const af_map* map);
AF_API int af_map_non_degenerate(const af_map* map);
AF_API void af_map_free(af_map* map);

/* ---- Gaze density maps ---- */

AF_API af_status af_gaze_load(const char* path, af_gaze** out); /* .npy or .png */
AF_API af_status af_gaze_from_values(size_t rows, size_t cols, const double* values,
                                     af_gaze** out);
AF_API size_t af_gaze_rows(const af_gaze* gaze);
AF_API size_t af_gaze_cols(const af_gaze* gaze);
AF_API const double* af_gaze_values(const af_gaze* gaze);
AF_API void af_gaze_free(af_gaze* gaze);

/* ---- Images [C,H,W] in the model input space ---- */

/* .npy tensors load verbatim; .png files are standardized with mean/std
 * (both NULL: left in [0,1]). */
AF_API af_status af_image_load(const char* path, const double* mean, const double* std,
                               size_t channels, af_image** out);
AF_API af_status af_image_from_values(size_t channels, size_t height, size_t width,
                                      const float* values, af_image** out);
AF_API af_status af_image_save_npy(const af_image* image, const char* path);
AF_API void af_image_shape(const af_image* image, size_t* channels, size_t* height,
                           size_t* width);
AF_API const float* af_image_values(const af_image* image);
AF_API void af_image_free(af_image* image);

/* ---- Plausibility ---- */

typedef struct af_plausibility {
  double sim;
  double pcc;
  double auc_judd;
  double nss;
} af_plausibility;

/* The map is resized to the gaze resolution before scoring. */
AF_API af_status af_plausibility_evaluate(const af_map* map, const af_gaze* gaze,
                                          af_plausibility* out);
/* Single metrics over same-sized row-major fields. NSS and AUC-Judd derive
 * fixations from the density (top 5% of pixels). */
AF_API af_status af_metric_sim(size_t rows, size_t cols, const double* saliency,
                               const double* density, double* out);
AF_API af_status af_metric_pcc(size_t rows, size_t cols, const double* saliency,
                               const double* density, double* out);
AF_API af_status af_metric_nss(size_t rows, size_t cols, const double* saliency,
                               const double* density, double* out);
AF_API af_status af_metric_auc_judd(size_t rows, size_t cols, const double* saliency,
                                    const double* density, double* out);

/* ---- Correctness ---- */

/* Confidence of the target class for an image given as [C,H,W] floats. */
typedef int (*af_score_fn)(const float* values, size_t channels, size_t height,
                           size_t width, void* user, double* out);

typedef struct af_correctness_options {
  size_t step_pixels;       /* pixels perturbed per curve step */
  size_t steps;             /* if nonzero, overrides step_pixels */
  double support_threshold; /* AD/AI/AG explanation mask */
  const float* fill;        /* per-channel replacement, NULL: zero */
  size_t fill_len;
  int64_t class_id;         /* oracle scoring only; AF_CLASS_PREDICTED: argmax */
} af_correctness_options;

typedef struct af_correctness {
  double iauc;
  double dauc;
  double delta_a_f;
  double p; /* confidence on the intact image */
  double o; /* confidence on the explanation-masked image */
  int64_t class_id;
} af_correctness;

AF_API void af_correctness_options_default(af_correctness_options* options);
/* The map is resized to the image when the sizes differ. */
AF_API af_status af_correctness_evaluate(af_oracle* oracle, const af_image* image,
                                         const af_map* map,
                                         const af_correctness_options* options,
                                         af_correctness* out);
AF_API af_status af_correctness_evaluate_fn(af_score_fn score, void* user,
                                            const af_image* image, const af_map* map,
                                            const af_correctness_options* options,
                                            af_correctness* out);

typedef struct af_average {
  double value;
  size_t used;
  size_t skipped;
} af_average;

AF_API af_status af_average_drop(const double* p, const double* o, size_t n, af_average* out);
AF_API af_status af_average_increase(const double* p, const double* o, size_t n,
                                     af_average* out);
AF_API af_status af_average_gain(const double* p, const double* o, size_t n, af_average* out);

/* ---- Stability ---- */

typedef struct af_stability_options {
  double epsilon; /* <= 0: 0.01 * ||x0|| */
  size_t n_samples;
  uint64_t seed;
  af_method method;
  af_explain_options explain;
} af_stability_options;

typedef struct af_stability {
  double lip;
  double lss;
  size_t samples_used;
  int64_t class_id;
} af_stability;

AF_API void af_stability_options_default(af_stability_options* options);
/* Re-explains every sampled neighbour with attentions (and gradients) served
 * by the oracle; g is the oracle probability of the target class. */
AF_API af_status af_stability_evaluate(af_oracle* oracle, const af_image* image,
                                       const af_stability_options* options,
                                       af_stability* out);

/* ---- Oracle ---- */

typedef struct af_oracle_info {
  size_t class_count;
  size_t layers;
  size_t heads;
  size_t tokens;
  size_t channels;
  size_t height;
  size_t width;
} af_oracle_info;

/* spec: "cmd:<command line>" or "tcp:<host>:<port>"; timeout_ms <= 0 means
 * the 30 s default. */
AF_API af_status af_oracle_open(const char* spec, int timeout_ms, af_oracle** out);
AF_API af_status af_oracle_info_get(const af_oracle* oracle, af_oracle_info* out);
AF_API const char* af_oracle_model(const af_oracle* oracle);
/* Per-channel normalization; writes up to `capacity` entries to each array
 * and returns the channel count. */
AF_API size_t af_oracle_normalization(const af_oracle* oracle, double* mean, double* std,
                                      size_t capacity);
AF_API af_status af_oracle_score(af_oracle* oracle, const af_image* image, double* probs,
                                 size_t capacity);
AF_API af_status af_oracle_fetch_bundle(af_oracle* oracle, const af_image* image,
                                        const char* image_id, const int64_t* classes,
                                        size_t class_count, af_bundle** out);
AF_API void af_oracle_close(af_oracle* oracle);

#ifdef __cplusplus
}
#endif

#endif /* ATTNFILTER_ATTNFILTER_H_ */
