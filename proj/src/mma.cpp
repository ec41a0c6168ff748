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

#include "sagesim/mma.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sagesim/error.hpp"

namespace sagesim::mma {
namespace {

using numerics::Fp8E4M3;
using numerics::kFp16Max;

void check_depth(int depth) {
  if (depth != 1 && depth != 2) {
    throw Error(ErrorCode::kInvalidArgument, "buffering depth must be 1 or 2");
  }
}

// One binary16 accumulation step; products of two E4M3 values and their sum
// with a binary16 value are exact in double.
inline double fp16_accumulate(double acc, double product, std::uint64_t& overflows) {
  const double r = numerics::fp16_round(acc + product);
  overflows += std::fabs(r) > kFp16Max;
  return std::clamp(r, -kFp16Max, kFp16Max);
}

std::vector<double> decode_all(const std::vector<Fp8E4M3>& codes) {
  std::vector<double> out(codes.size());
  std::transform(codes.begin(), codes.end(), out.begin(), numerics::e4m3_decode);
  return out;
}

}  // namespace

std::int32_t dot_int8_int32(std::span<const std::int8_t> a, std::span<const std::int8_t> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShapeMismatch, "dot operands differ in length");
  std::int32_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::int32_t{a[i]} * std::int32_t{b[i]};
  return acc;
}

DotReport dot_fp8_fp16acc(std::span<const Fp8E4M3> p, std::span<const Fp8E4M3> v, MmaShape shape,
                          int buffering_depth) {
  check_depth(buffering_depth);
  if (p.size() != v.size()) throw Error(ErrorCode::kShapeMismatch, "dot operands differ in length");
  if (shape.k_group == 0 || p.size() % shape.k_group != 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "FP8 dot length " + std::to_string(p.size()) + " is not a multiple of " +
                    std::to_string(shape.k_group));
  }
  DotReport report;
  const std::size_t groups = p.size() / shape.k_group;
  const auto depth = static_cast<std::size_t>(buffering_depth);
  float acc32 = 0.0f;
  double acc16 = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    if (g % depth == 0) acc16 = 0.0;
    for (std::size_t i = g * shape.k_group; i < (g + 1) * shape.k_group; ++i) {
      const double product = numerics::e4m3_decode(p[i]) * numerics::e4m3_decode(v[i]);
      acc16 = fp16_accumulate(acc16, product, report.overflow.count);
    }
    ++report.mma_invocations;
    if (g % depth == depth - 1 || g + 1 == groups) {
      acc32 += static_cast<float>(acc16);
      ++report.fp16_to_fp32_conversions;
    }
  }
  report.value = acc32;
  return report;
}

double dot_fp8_fp32acc(std::span<const Fp8E4M3> p, std::span<const Fp8E4M3> v) {
  if (p.size() != v.size()) throw Error(ErrorCode::kShapeMismatch, "dot operands differ in length");
  float acc = 0.0f;
  for (std::size_t i = 0; i < p.size(); ++i) {
    // E4M3 products carry at most 8 significant bits, so the float is exact.
    acc += static_cast<float>(numerics::e4m3_decode(p[i]) * numerics::e4m3_decode(v[i]));
  }
  return acc;
}

GemmResult gemm_emulated(const CodeMatrix<std::int8_t>& a, const CodeMatrix<std::int8_t>& b) {
  if (a.cols != b.rows) {
    throw Error(ErrorCode::kShapeMismatch, "gemm inner dimensions differ: " +
                                               std::to_string(a.cols) + " vs " +
                                               std::to_string(b.rows));
  }
  const std::size_t m = a.rows, n = b.cols, k = a.cols;
  std::vector<std::int8_t> bt(n * k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < n; ++c) bt[c * k + r] = b(r, c);
  }
  GemmResult out{Tensor::matrix(m, n), {}};
  const std::span<const std::int8_t> as(a.codes), bts(bt);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.values(i, j) = dot_int8_int32(as.subspan(i * k, k), bts.subspan(j * k, k));
    }
  }
  return out;
}

GemmResult gemm_emulated(const CodeMatrix<Fp8E4M3>& a, const CodeMatrix<Fp8E4M3>& b,
                         Accumulator accumulator, int buffering_depth) {
  check_depth(buffering_depth);
  if (a.cols != b.rows) {
    throw Error(ErrorCode::kShapeMismatch, "gemm inner dimensions differ: " +
                                               std::to_string(a.cols) + " vs " +
                                               std::to_string(b.rows));
  }
  const std::size_t m = a.rows, n = b.cols, k = a.cols;
  if (k % kGroupK != 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "FP8 gemm inner dimension " + std::to_string(k) + " is not a multiple of 32");
  }
  const std::size_t groups = k / kGroupK;
  const auto depth = static_cast<std::size_t>(buffering_depth);
  const std::vector<double> ad = decode_all(a.codes);
  const std::vector<double> bd = decode_all(b.codes);

  GemmResult out{Tensor::matrix(m, n), {}};
  out.counters.mma_invocations = static_cast<std::uint64_t>(m) * n * groups;
  std::vector<float> acc32(n);
  std::vector<double> acc16(n);

  // Row-at-a-time so the n independent accumulation chains interleave; the
  // per-element order over k is unchanged.
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc32.begin(), acc32.end(), 0.0f);
    if (accumulator == Accumulator::kFp32) {
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double p = ad[i * k + kk];
        if (p == 0.0) continue;
        const double* brow = bd.data() + kk * n;
        for (std::size_t j = 0; j < n; ++j) acc32[j] += static_cast<float>(p * brow[j]);
      }
    } else {
      std::uint64_t overflows = 0;
      for (std::size_t g = 0; g < groups; ++g) {
        if (g % depth == 0) std::fill(acc16.begin(), acc16.end(), 0.0);
        for (std::size_t kk = g * kGroupK; kk < (g + 1) * kGroupK; ++kk) {
          const double p = ad[i * k + kk];
          if (p == 0.0) continue;
          const double* brow = bd.data() + kk * n;
          for (std::size_t j = 0; j < n; ++j) {
            acc16[j] = fp16_accumulate(acc16[j], p * brow[j], overflows);
          }
        }
        if (g % depth == depth - 1 || g + 1 == groups) {
          for (std::size_t j = 0; j < n; ++j) acc32[j] += static_cast<float>(acc16[j]);
          out.counters.fp16_to_fp32_conversions += n;
        }
      }
      out.counters.overflow.record(overflows);
    }
    for (std::size_t j = 0; j < n; ++j) out.values(i, j) = acc32[j];
  }
  return out;
}

}  // namespace sagesim::mma
