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

// Numerical model of the tensor-core matmul instructions used by the
// attention pipeline.
//
//   INT8 x INT8 -> INT32   exact (QK^T path)
//   E4M3 x E4M3 -> FP32    products exact, RNE single-precision running sum
//   E4M3 x E4M3 -> FP16    products exact, RNE binary16 running sum over each
//                          instruction's k = 32 slice, then widened to FP32
//
// With buffering depth 2 the FP16 result of one instruction is the
// accumulator input of the next, so 64 products are summed in binary16
// before a single FP16 -> FP32 conversion. Products inside an instruction are
// added in index order. A binary16 overflow is counted and the partial sum
// saturates to +/-65504 so a run can finish and report totals.

#ifndef SAGESIM_MMA_HPP_
#define SAGESIM_MMA_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

#include "sagesim/code_matrix.hpp"
#include "sagesim/numerics.hpp"
#include "sagesim/tensor.hpp"

namespace sagesim::mma {

// Products accumulated by one m16n8k32 instruction per output element.
inline constexpr std::size_t kGroupK = 32;

struct MmaShape {
  std::size_t k_group = kGroupK;
};

enum class Accumulator { kFp16, kFp32 };

struct MmaCounters {
  numerics::OverflowFlag overflow;
  std::uint64_t fp16_to_fp32_conversions = 0;
  std::uint64_t mma_invocations = 0;

  void merge(const MmaCounters& other) noexcept {
    overflow.merge(other.overflow);
    fp16_to_fp32_conversions += other.fp16_to_fp32_conversions;
    mma_invocations += other.mma_invocations;
  }
};

struct DotReport {
  double value = 0.0;
  numerics::OverflowFlag overflow;
  std::uint64_t fp16_to_fp32_conversions = 0;
  std::uint64_t mma_invocations = 0;
};

std::int32_t dot_int8_int32(std::span<const std::int8_t> a, std::span<const std::int8_t> b);

// Lengths must match and be a multiple of shape.k_group; depth is 1 or 2.
DotReport dot_fp8_fp16acc(std::span<const numerics::Fp8E4M3> p,
                          std::span<const numerics::Fp8E4M3> v, MmaShape shape = {},
                          int buffering_depth = 2);

double dot_fp8_fp32acc(std::span<const numerics::Fp8E4M3> p,
                       std::span<const numerics::Fp8E4M3> v);

struct GemmResult {
  Tensor values;  // rows(a) x cols(b)
  MmaCounters counters;
};

// a is m x k, b is k x n. Element (i, j) equals the matching dot routine on
// row i of a and column j of b.
GemmResult gemm_emulated(const CodeMatrix<std::int8_t>& a, const CodeMatrix<std::int8_t>& b);
GemmResult gemm_emulated(const CodeMatrix<numerics::Fp8E4M3>& a,
                         const CodeMatrix<numerics::Fp8E4M3>& b, Accumulator accumulator,
                         int buffering_depth = 2);

}  // namespace sagesim::mma

#endif  // SAGESIM_MMA_HPP_
