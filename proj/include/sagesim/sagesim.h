/* Copyright 2026 The sagesim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to the sagesim quantized-attention simulator.
 *
 * Objects are opaque handles created by sagesim_*_create / _generate / _load
 * / _run functions and released with the matching _destroy function. Every
 * fallible call returns a sagesim_status; on failure a description is
 * available from sagesim_last_error() on the same thread until the next
 * failing call. Strings returned by accessor functions are owned by the
 * handle they came from.
 */

#ifndef SAGESIM_SAGESIM_H_
#define SAGESIM_SAGESIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SAGESIM_BUILDING_LIBRARY)
#define SAGESIM_API __attribute__((visibility("default")))
#else
#define SAGESIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sagesim_status {
  SAGESIM_OK = 0,
  SAGESIM_ERROR_INVALID_ARGUMENT = 1,
  SAGESIM_ERROR_SHAPE_MISMATCH = 2,
  SAGESIM_ERROR_RANGE_VIOLATION = 3,
  SAGESIM_ERROR_IO = 4,
  SAGESIM_ERROR_PARSE = 5,
  SAGESIM_ERROR_DEGENERATE = 6,
  SAGESIM_ERROR_OVERFLOW = 7,
  SAGESIM_ERROR_BUFFER_TOO_SMALL = 8,
  SAGESIM_ERROR_INTERNAL = 99
} sagesim_status;

typedef enum sagesim_distribution_kind {
  SAGESIM_DIST_GAUSSIAN = 0,
  SAGESIM_DIST_UNIFORM = 1,
  SAGESIM_DIST_ADVERSARIAL_MAX = 2
} sagesim_distribution_kind;

typedef enum sagesim_accumulator {
  SAGESIM_ACC_FP16 = 0,
  SAGESIM_ACC_FP32 = 1
} sagesim_accumulator;

typedef struct sagesim_distribution {
  int32_t kind; /* sagesim_distribution_kind */
  double mean;
  double stddev;
  double low;
  double high;
  double magnitude;
} sagesim_distribution;

typedef struct sagesim_attention_config {
  uint64_t block_q;
  uint64_t block_k;
  int32_t qk_bits; /* 4 or 8 */
  double p_r;
  double v_r;
  int32_t buffering_depth; /* 1 or 2 */
  int32_t accumulator;     /* sagesim_accumulator */
  int32_t causal;
  int32_t smoothing;
  double softmax_scale; /* <= 0 selects 1/sqrt(head_dim) */
  int32_t expect_overflow;
} sagesim_attention_config;

typedef struct sagesim_tensor sagesim_tensor;
typedef struct sagesim_report sagesim_report;
typedef struct sagesim_sweep_result sagesim_sweep_result;

SAGESIM_API const char* sagesim_version(void);
SAGESIM_API const char* sagesim_status_name(sagesim_status status);
SAGESIM_API const char* sagesim_last_error(void);

/* Defaults: block 128 x 64, INT8, p_r 224, v_r 4.5, depth 2, FP16
 * accumulator, smoothing on, non-causal. */
SAGESIM_API void sagesim_attention_config_init(sagesim_attention_config* config);
/* Defaults: standard normal. */
SAGESIM_API void sagesim_distribution_init(sagesim_distribution* dist);

/* Scalar codecs. */
SAGESIM_API uint8_t sagesim_e4m3_encode(double x);
SAGESIM_API double sagesim_e4m3_decode(uint8_t code);
/* SAGESIM_ERROR_OVERFLOW when the rounded magnitude exceeds 65504. */
SAGESIM_API sagesim_status sagesim_fp16_encode(double x, uint16_t* code);
SAGESIM_API double sagesim_fp16_decode(uint16_t code);
/* SAGESIM_ERROR_RANGE_VIOLATION (reason in sagesim_last_error) when
 * p_r * v_r exceeds 65504 / 32 / depth. */
SAGESIM_API sagesim_status sagesim_check_range(double p_r, double v_r, int32_t depth);

/* Tensors. */
SAGESIM_API sagesim_status sagesim_tensor_create(const uint64_t* shape, size_t rank,
                                                 const double* data, sagesim_tensor** out);
SAGESIM_API sagesim_status sagesim_tensor_generate(const uint64_t* shape, size_t rank,
                                                   const sagesim_distribution* dist,
                                                   uint64_t seed, sagesim_tensor** out);
SAGESIM_API sagesim_status sagesim_tensor_load(const char* path, sagesim_tensor** out);
SAGESIM_API sagesim_status sagesim_tensor_save(const sagesim_tensor* tensor, const char* path);
/* Generates a tensor and writes it together with its .meta.json sidecar. */
SAGESIM_API sagesim_status sagesim_generate_file(const uint64_t* shape, size_t rank,
                                                 const sagesim_distribution* dist,
                                                 uint64_t seed, const char* path);
SAGESIM_API size_t sagesim_tensor_rank(const sagesim_tensor* tensor);
SAGESIM_API uint64_t sagesim_tensor_dim(const sagesim_tensor* tensor, size_t axis);
SAGESIM_API size_t sagesim_tensor_size(const sagesim_tensor* tensor);
SAGESIM_API sagesim_status sagesim_tensor_copy_data(const sagesim_tensor* tensor, double* out,
                                                    size_t count);
SAGESIM_API void sagesim_tensor_destroy(sagesim_tensor* tensor);

/* Q, K, V of shape (heads, seq_len, head_dim) drawn from one seeded stream. */
SAGESIM_API sagesim_status sagesim_inputs_generate(uint64_t seed, uint64_t seq_len,
                                                   uint64_t head_dim, uint64_t heads,
                                                   const sagesim_distribution* dist,
                                                   sagesim_tensor** q, sagesim_tensor** k,
                                                   sagesim_tensor** v);

/* Runs full-precision and quantized attention and compares them.
 * input_json (nullable) is echoed under "input" in the report JSON. */
SAGESIM_API sagesim_status sagesim_run(const sagesim_attention_config* config,
                                       const sagesim_tensor* q, const sagesim_tensor* k,
                                       const sagesim_tensor* v, const char* input_json,
                                       sagesim_report** out);
SAGESIM_API void sagesim_report_metrics(const sagesim_report* report, double* cossim,
                                        double* l1, double* rmse);
SAGESIM_API uint64_t sagesim_report_overflow_events(const sagesim_report* report);
SAGESIM_API uint64_t sagesim_report_conversions(const sagesim_report* report);
SAGESIM_API uint64_t sagesim_report_mma_invocations(const sagesim_report* report);
SAGESIM_API const char* sagesim_report_json(const sagesim_report* report);
/* Borrowed; valid while the report lives. */
SAGESIM_API const sagesim_tensor* sagesim_report_output(const sagesim_report* report);
SAGESIM_API void sagesim_report_destroy(sagesim_report* report);

/* Sweeps. spec_json follows the documented sweep description format. */
SAGESIM_API sagesim_status sagesim_sweep(const char* spec_json, sagesim_sweep_result** out);
SAGESIM_API const char* sagesim_sweep_csv(const sagesim_sweep_result* result);
SAGESIM_API size_t sagesim_sweep_row_count(const sagesim_sweep_result* result);
SAGESIM_API size_t sagesim_sweep_rejected_count(const sagesim_sweep_result* result);
/* "p_r=... v_r=... depth=...: reason" */
SAGESIM_API const char* sagesim_sweep_rejected(const sagesim_sweep_result* result, size_t index);
SAGESIM_API int sagesim_sweep_unexpected_overflow(const sagesim_sweep_result* result);
SAGESIM_API void sagesim_sweep_destroy(sagesim_sweep_result* result);

/* E4M3 code table CSV. Writes up to capacity bytes (NUL-terminated) and
 * stores the full length, excluding the NUL, in *length. */
SAGESIM_API sagesim_status sagesim_codec_table_csv(char* buffer, size_t capacity,
                                                   size_t* length);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SAGESIM_SAGESIM_H_ */
