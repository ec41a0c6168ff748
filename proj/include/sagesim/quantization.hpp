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

// Quantizers for the attention pipeline:
//   - Q and K tiles: symmetric per-block INT8 (divisor 127) or INT4 (divisor 7)
//   - P~ tiles: per-block E4M3 with target range p_r, delta_P = max|P~| / p_r
//   - V: per-channel E4M3 with target range v_r, delta_V[j] = colmax|V[:, j]| / v_r
// plus channel-mean smoothing of Q and K.
//
// An all-zero block (or channel) gets the sentinel scale 1 and zero codes.

#ifndef SAGESIM_QUANTIZATION_HPP_
#define SAGESIM_QUANTIZATION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sagesim/code_matrix.hpp"
#include "sagesim/numerics.hpp"
#include "sagesim/tensor.hpp"

namespace sagesim::quant {

struct IntQuantBlock {
  CodeMatrix<std::int8_t> codes;
  double scale = 1.0;
  int bits = 8;
};

struct Fp8QuantBlock {
  CodeMatrix<numerics::Fp8E4M3> codes;
  double scale = 1.0;
};

struct Fp8ChannelQuantBlock {
  CodeMatrix<numerics::Fp8E4M3> codes;
  std::vector<double> scales;  // one per column
};

// Largest p_r * v_r such that 32 products accumulated per instruction
// (times `depth` instructions chained before the FP32 conversion) cannot
// leave the binary16 range: 65504 / 32 / depth.
double fp16_product_bound(int depth);

// Returns a human-readable reason when (p_r, v_r, depth) violates the
// binary16 accumulator bound or basic validity, std::nullopt otherwise.
std::optional<std::string> range_violation(double p_r, double v_r, int depth);

class RangeConfig {
 public:
  // Throws Error(kRangeViolation) unless the accumulator bound holds.
  static RangeConfig make(double p_r, double v_r, int depth);
  // Only requires 0 < p_r, v_r <= 448 and depth in {1, 2}. For FP32
  // accumulation baselines and deliberate overflow runs.
  static RangeConfig unchecked(double p_r, double v_r, int depth);

  double p_r() const noexcept { return p_r_; }
  double v_r() const noexcept { return v_r_; }
  int depth() const noexcept { return depth_; }
  bool within_fp16_bound() const { return !range_violation(p_r_, v_r_, depth_).has_value(); }

 private:
  RangeConfig(double p_r, double v_r, int depth) : p_r_(p_r), v_r_(v_r), depth_(depth) {}

  double p_r_;
  double v_r_;
  int depth_;
};

struct SmoothedMatrix {
  Tensor values;             // input minus the broadcast channel mean
  std::vector<double> mean;  // per-channel mean over tokens
};

SmoothedMatrix smooth_k(ConstMatrixView k);
// The caller owes the compensation term mean . K^T when scoring.
SmoothedMatrix smooth_q(ConstMatrixView q);

IntQuantBlock quantize_int_block(ConstMatrixView x, int bits);
Fp8QuantBlock quantize_p_block(ConstMatrixView p, double p_r);
Fp8ChannelQuantBlock quantize_v_per_channel(ConstMatrixView v, double v_r);

Tensor dequantize(const IntQuantBlock& block);
Tensor dequantize(const Fp8QuantBlock& block);
Tensor dequantize(const Fp8ChannelQuantBlock& block);

inline IntQuantBlock quantize_int_block(const Tensor& x, int bits) {
  return quantize_int_block(x.view(), bits);
}
inline Fp8QuantBlock quantize_p_block(const Tensor& p, double p_r) {
  return quantize_p_block(p.view(), p_r);
}
inline Fp8ChannelQuantBlock quantize_v_per_channel(const Tensor& v, double v_r) {
  return quantize_v_per_channel(v.view(), v_r);
}

}  // namespace sagesim::quant

#endif  // SAGESIM_QUANTIZATION_HPP_
