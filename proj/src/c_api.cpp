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

#include "sagesim/sagesim.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "sagesim/attention.hpp"
#include "sagesim/error.hpp"
#include "sagesim/format.hpp"
#include "sagesim/harness.hpp"
#include "sagesim/numerics.hpp"
#include "sagesim/quantization.hpp"
#include "sagesim/tensor_io.hpp"

struct sagesim_tensor {
  sagesim::Tensor value;
};

struct sagesim_report {
  sagesim::harness::ReportRow row;
  sagesim_tensor output;
  std::string json;
};

struct sagesim_sweep_result {
  sagesim::harness::SweepResult result;
  std::vector<std::string> rejected;
};

namespace {

using sagesim::Error;
using sagesim::ErrorCode;

thread_local std::string g_last_error;

sagesim_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return SAGESIM_ERROR_INVALID_ARGUMENT;
    case ErrorCode::kShapeMismatch: return SAGESIM_ERROR_SHAPE_MISMATCH;
    case ErrorCode::kRangeViolation: return SAGESIM_ERROR_RANGE_VIOLATION;
    case ErrorCode::kIo: return SAGESIM_ERROR_IO;
    case ErrorCode::kParse: return SAGESIM_ERROR_PARSE;
    case ErrorCode::kDegenerate: return SAGESIM_ERROR_DEGENERATE;
    case ErrorCode::kOverflow: return SAGESIM_ERROR_OVERFLOW;
  }
  return SAGESIM_ERROR_INTERNAL;
}

sagesim_status fail(sagesim_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
sagesim_status guarded(Fn&& fn) {
  try {
    fn();
    return SAGESIM_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SAGESIM_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SAGESIM_ERROR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

std::vector<std::size_t> to_shape(const uint64_t* shape, size_t rank) {
  require(shape != nullptr && rank > 0, "shape must be non-empty");
  return std::vector<std::size_t>(shape, shape + rank);
}

sagesim::harness::DistributionSpec to_dist(const sagesim_distribution* d) {
  sagesim::harness::DistributionSpec out;
  if (d == nullptr) return out;
  switch (d->kind) {
    case SAGESIM_DIST_GAUSSIAN: out.kind = sagesim::harness::Distribution::kGaussian; break;
    case SAGESIM_DIST_UNIFORM: out.kind = sagesim::harness::Distribution::kUniform; break;
    case SAGESIM_DIST_ADVERSARIAL_MAX:
      out.kind = sagesim::harness::Distribution::kAdversarialMax;
      break;
    default: throw Error(ErrorCode::kInvalidArgument, "unknown distribution kind");
  }
  out.mean = d->mean;
  out.stddev = d->stddev;
  out.low = d->low;
  out.high = d->high;
  out.magnitude = d->magnitude;
  return out;
}

sagesim::attention::AttentionConfig to_config(const sagesim_attention_config* c) {
  require(c != nullptr, "config is null");
  sagesim::attention::AttentionConfig out;
  out.block_q = c->block_q;
  out.block_k = c->block_k;
  out.qk_bits = c->qk_bits;
  require(c->accumulator == SAGESIM_ACC_FP16 || c->accumulator == SAGESIM_ACC_FP32,
          "unknown accumulator");
  out.pv_accumulator = c->accumulator == SAGESIM_ACC_FP16 ? sagesim::mma::Accumulator::kFp16
                                                          : sagesim::mma::Accumulator::kFp32;
  out.causal = c->causal != 0;
  out.smoothing = c->smoothing != 0;
  if (c->softmax_scale > 0.0) out.softmax_scale = c->softmax_scale;
  out.expect_overflow = c->expect_overflow != 0;
  const bool enforce = out.pv_accumulator == sagesim::mma::Accumulator::kFp16 && !out.expect_overflow;
  out.range = enforce ? sagesim::quant::RangeConfig::make(c->p_r, c->v_r, c->buffering_depth)
                      : sagesim::quant::RangeConfig::unchecked(c->p_r, c->v_r, c->buffering_depth);
  return out;
}

}  // namespace

extern "C" {

const char* sagesim_version(void) { return "0.1.0"; }

const char* sagesim_status_name(sagesim_status status) {
  switch (status) {
    case SAGESIM_OK: return "ok";
    case SAGESIM_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case SAGESIM_ERROR_SHAPE_MISMATCH: return "shape mismatch";
    case SAGESIM_ERROR_RANGE_VIOLATION: return "range violation";
    case SAGESIM_ERROR_IO: return "i/o error";
    case SAGESIM_ERROR_PARSE: return "parse error";
    case SAGESIM_ERROR_DEGENERATE: return "degenerate input";
    case SAGESIM_ERROR_OVERFLOW: return "overflow";
    case SAGESIM_ERROR_BUFFER_TOO_SMALL: return "buffer too small";
    case SAGESIM_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sagesim_last_error(void) { return g_last_error.c_str(); }

void sagesim_attention_config_init(sagesim_attention_config* config) {
  if (config == nullptr) return;
  *config = sagesim_attention_config{};
  config->block_q = 128;
  config->block_k = 64;
  config->qk_bits = 8;
  config->p_r = 224.0;
  config->v_r = 4.5;
  config->buffering_depth = 2;
  config->accumulator = SAGESIM_ACC_FP16;
  config->causal = 0;
  config->smoothing = 1;
  config->softmax_scale = 0.0;
  config->expect_overflow = 0;
}

void sagesim_distribution_init(sagesim_distribution* dist) {
  if (dist == nullptr) return;
  *dist = sagesim_distribution{SAGESIM_DIST_GAUSSIAN, 0.0, 1.0, 0.0, 1.0, 1.0};
}

uint8_t sagesim_e4m3_encode(double x) { return sagesim::numerics::e4m3_encode(x).code; }

double sagesim_e4m3_decode(uint8_t code) {
  return sagesim::numerics::e4m3_decode(sagesim::numerics::Fp8E4M3{code});
}

sagesim_status sagesim_fp16_encode(double x, uint16_t* code) {
  if (code == nullptr) return fail(SAGESIM_ERROR_INVALID_ARGUMENT, "code is null");
  const auto h = sagesim::numerics::fp16_encode(x);
  if (!h) return fail(SAGESIM_ERROR_OVERFLOW, sagesim::format_real(x) + " overflows binary16");
  *code = h->code;
  return SAGESIM_OK;
}

double sagesim_fp16_decode(uint16_t code) {
  return sagesim::numerics::fp16_decode(sagesim::numerics::Fp16{code});
}

sagesim_status sagesim_check_range(double p_r, double v_r, int32_t depth) {
  if (auto reason = sagesim::quant::range_violation(p_r, v_r, depth)) {
    return fail(SAGESIM_ERROR_RANGE_VIOLATION, *reason);
  }
  return SAGESIM_OK;
}

sagesim_status sagesim_tensor_create(const uint64_t* shape, size_t rank, const double* data,
                                     sagesim_tensor** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    auto dims = to_shape(shape, rank);
    sagesim::Tensor t(std::move(dims));
    if (data != nullptr) std::memcpy(t.data().data(), data, t.size() * sizeof(double));
    *out = new sagesim_tensor{std::move(t)};
  });
}

sagesim_status sagesim_tensor_generate(const uint64_t* shape, size_t rank,
                                       const sagesim_distribution* dist, uint64_t seed,
                                       sagesim_tensor** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new sagesim_tensor{
        sagesim::harness::generate_tensor(to_shape(shape, rank), to_dist(dist), seed)};
  });
}

sagesim_status sagesim_tensor_load(const char* path, sagesim_tensor** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must be non-null");
    *out = new sagesim_tensor{sagesim::io::load_tensor(path)};
  });
}

sagesim_status sagesim_tensor_save(const sagesim_tensor* tensor, const char* path) {
  return guarded([&] {
    require(tensor != nullptr && path != nullptr, "tensor and path must be non-null");
    sagesim::io::save_tensor(path, tensor->value);
  });
}

sagesim_status sagesim_generate_file(const uint64_t* shape, size_t rank,
                                     const sagesim_distribution* dist, uint64_t seed,
                                     const char* path) {
  return guarded([&] {
    require(path != nullptr, "path is null");
    const auto dims = to_shape(shape, rank);
    const auto spec = to_dist(dist);
    sagesim::io::save_tensor(path, sagesim::harness::generate_tensor(dims, spec, seed));
    sagesim::io::write_sidecar(path, sagesim::harness::generation_metadata(dims, spec, seed));
  });
}

size_t sagesim_tensor_rank(const sagesim_tensor* tensor) {
  return tensor == nullptr ? 0 : tensor->value.rank();
}

uint64_t sagesim_tensor_dim(const sagesim_tensor* tensor, size_t axis) {
  if (tensor == nullptr || axis >= tensor->value.rank()) return 0;
  return tensor->value.dim(axis);
}

size_t sagesim_tensor_size(const sagesim_tensor* tensor) {
  return tensor == nullptr ? 0 : tensor->value.size();
}

sagesim_status sagesim_tensor_copy_data(const sagesim_tensor* tensor, double* out, size_t count) {
  if (tensor == nullptr || out == nullptr) {
    return fail(SAGESIM_ERROR_INVALID_ARGUMENT, "tensor and out must be non-null");
  }
  if (count < tensor->value.size()) {
    return fail(SAGESIM_ERROR_BUFFER_TOO_SMALL, "output buffer holds fewer elements than the tensor");
  }
  std::memcpy(out, tensor->value.data().data(), tensor->value.size() * sizeof(double));
  return SAGESIM_OK;
}

void sagesim_tensor_destroy(sagesim_tensor* tensor) { delete tensor; }

sagesim_status sagesim_inputs_generate(uint64_t seed, uint64_t seq_len, uint64_t head_dim,
                                       uint64_t heads, const sagesim_distribution* dist,
                                       sagesim_tensor** q, sagesim_tensor** k, sagesim_tensor** v) {
  return guarded([&] {
    require(q != nullptr && k != nullptr && v != nullptr, "output handles must be non-null");
    sagesim::harness::InputSpec spec;
    spec.seed = seed;
    spec.seq_len = seq_len;
    spec.head_dim = head_dim;
    spec.heads = heads;
    spec.dist = to_dist(dist);
    auto inputs = sagesim::harness::make_inputs(spec);
    auto tq = std::make_unique<sagesim_tensor>(sagesim_tensor{std::move(inputs.q)});
    auto tk = std::make_unique<sagesim_tensor>(sagesim_tensor{std::move(inputs.k)});
    auto tv = std::make_unique<sagesim_tensor>(sagesim_tensor{std::move(inputs.v)});
    *q = tq.release();
    *k = tk.release();
    *v = tv.release();
  });
}

sagesim_status sagesim_run(const sagesim_attention_config* config, const sagesim_tensor* q,
                           const sagesim_tensor* k, const sagesim_tensor* v, const char* input_json,
                           sagesim_report** out) {
  return guarded([&] {
    require(q != nullptr && k != nullptr && v != nullptr && out != nullptr,
            "tensors and out must be non-null");
    const auto cfg = to_config(config);
    const sagesim::harness::Inputs inputs{q->value, k->value, v->value};
    auto report = std::make_unique<sagesim_report>();
    report->row = sagesim::harness::run_row(inputs, cfg, &report->output.value);
    report->json = sagesim::harness::row_to_json(report->row, input_json ? input_json : "");
    *out = report.release();
  });
}

void sagesim_report_metrics(const sagesim_report* report, double* cossim, double* l1,
                            double* rmse) {
  if (report == nullptr) return;
  if (cossim) *cossim = report->row.metrics.cossim;
  if (l1) *l1 = report->row.metrics.l1;
  if (rmse) *rmse = report->row.metrics.rmse;
}

uint64_t sagesim_report_overflow_events(const sagesim_report* report) {
  return report ? report->row.overflow_events : 0;
}

uint64_t sagesim_report_conversions(const sagesim_report* report) {
  return report ? report->row.conversions : 0;
}

uint64_t sagesim_report_mma_invocations(const sagesim_report* report) {
  return report ? report->row.mma_invocations : 0;
}

const char* sagesim_report_json(const sagesim_report* report) {
  return report ? report->json.c_str() : "";
}

const sagesim_tensor* sagesim_report_output(const sagesim_report* report) {
  return report ? &report->output : nullptr;
}

void sagesim_report_destroy(sagesim_report* report) { delete report; }

sagesim_status sagesim_sweep(const char* spec_json, sagesim_sweep_result** out) {
  return guarded([&] {
    require(spec_json != nullptr && out != nullptr, "spec and out must be non-null");
    const auto spec = sagesim::harness::parse_sweep_spec(spec_json);
    auto result = std::make_unique<sagesim_sweep_result>();
    result->result = sagesim::harness::run_sweep(spec);
    for (const auto& r : spec.rejected) {
      result->rejected.push_back("p_r=" + sagesim::format_real(r.entry.p_r) +
                                 " v_r=" + sagesim::format_real(r.entry.v_r) +
                                 " depth=" + std::to_string(r.entry.depth) + ": " + r.reason);
    }
    *out = result.release();
  });
}

const char* sagesim_sweep_csv(const sagesim_sweep_result* result) {
  return result ? result->result.csv.c_str() : "";
}

size_t sagesim_sweep_row_count(const sagesim_sweep_result* result) {
  return result ? result->result.rows.size() : 0;
}

size_t sagesim_sweep_rejected_count(const sagesim_sweep_result* result) {
  return result ? result->rejected.size() : 0;
}

const char* sagesim_sweep_rejected(const sagesim_sweep_result* result, size_t index) {
  if (result == nullptr || index >= result->rejected.size()) return "";
  return result->rejected[index].c_str();
}

int sagesim_sweep_unexpected_overflow(const sagesim_sweep_result* result) {
  return result && result->result.unexpected_overflow ? 1 : 0;
}

void sagesim_sweep_destroy(sagesim_sweep_result* result) { delete result; }

sagesim_status sagesim_codec_table_csv(char* buffer, size_t capacity, size_t* length) {
  if (buffer == nullptr && length == nullptr) {
    return fail(SAGESIM_ERROR_INVALID_ARGUMENT, "buffer and length are both null");
  }
  const std::string csv = sagesim::harness::codec_table_csv();
  if (length) *length = csv.size();
  if (buffer == nullptr) return SAGESIM_OK;
  if (capacity <= csv.size()) {
    if (capacity > 0) {
      std::memcpy(buffer, csv.data(), capacity - 1);
      buffer[capacity - 1] = '\0';
    }
    return fail(SAGESIM_ERROR_BUFFER_TOO_SMALL, "codec table needs " +
                                                    std::to_string(csv.size() + 1) + " bytes");
  }
  std::memcpy(buffer, csv.c_str(), csv.size() + 1);
  return SAGESIM_OK;
}

}  // extern "C"
