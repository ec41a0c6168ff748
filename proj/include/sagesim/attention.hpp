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

// FlashAttention-style tiled attention with an online softmax, in two
// flavours: a double-precision reference and the quantized pipeline
//
//   smooth Q (per query block) and K (per head)
//   -> INT8/INT4 per-block codes, exact INT32 QK^T, dequantized in double
//   -> online softmax, P~ = exp(S - running max)
//   -> E4M3 P~ (per tile, range p_r) x E4M3 V (per channel, range v_r)
//      through the FP16- or FP32-accumulator matmul model
//   -> dequantize with delta_P * delta_V[j] and rescale as usual.
//
// Inputs are rank >= 2 tensors whose trailing two dimensions are
// (tokens, channels); every leading index is an independent head.

#ifndef SAGESIM_ATTENTION_HPP_
#define SAGESIM_ATTENTION_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sagesim/mma.hpp"
#include "sagesim/quantization.hpp"
#include "sagesim/tensor.hpp"

namespace sagesim::attention {

struct AttentionConfig {
  std::size_t block_q = 128;
  std::size_t block_k = 64;
  int qk_bits = 8;
  quant::RangeConfig range = quant::RangeConfig::make(224.0, 4.5, 2);
  mma::Accumulator pv_accumulator = mma::Accumulator::kFp16;
  bool causal = false;
  bool smoothing = true;
  std::optional<double> softmax_scale;  // 1/sqrt(head_dim) when unset
  // Lets the FP16 path run with ranges beyond the accumulator bound.
  bool expect_overflow = false;
};

struct SoftmaxState {
  std::vector<double> running_max;  // -inf until a row sees an unmasked key
  std::vector<double> running_sum;
  Tensor output;                    // unnormalized accumulator
};

SoftmaxState make_softmax_state(std::size_t rows, std::size_t dim);

// Folds one block of scores into the state: updates the running max and sum,
// rescales state.output by exp(m_old - m_new) and returns
// P~ = exp(S - m_new). Rows that are still fully masked stay untouched and
// get a zero P~ row.
Tensor online_softmax_update(SoftmaxState& state, ConstMatrixView scores);

// Divides the accumulator by the running sum. A row that never saw an
// unmasked key yields zeros.
Tensor finalize(const SoftmaxState& state);

// Sets scores whose key index exceeds the query index to -infinity. Offsets
// are the global token indices of the tile origin.
void apply_causal_mask(MatrixView scores, std::size_t query_offset, std::size_t key_offset);

struct ScaleStats {
  double min_delta_p = 0.0;
  double max_delta_p = 0.0;
  double min_delta_v = 0.0;
  double max_delta_v = 0.0;
};

struct RunReport {
  Tensor output;
  std::uint64_t overflow_events = 0;
  std::uint64_t fp16_to_fp32_conversions = 0;
  std::uint64_t mma_invocations = 0;
  ScaleStats scales;
};

Tensor attention_reference(const Tensor& q, const Tensor& k, const Tensor& v,
                           const AttentionConfig& config);

RunReport attention_quantized(const Tensor& q, const Tensor& k, const Tensor& v,
                              const AttentionConfig& config);

}  // namespace sagesim::attention

#endif  // SAGESIM_ATTENTION_HPP_
