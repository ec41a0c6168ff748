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

#include "sagesim/quantization.hpp"

#include <algorithm>
#include <cmath>

#include "sagesim/error.hpp"
#include "sagesim/format.hpp"

namespace sagesim::quant {
namespace {

SmoothedMatrix subtract_channel_mean(ConstMatrixView x) {
  SmoothedMatrix out{Tensor::matrix(x.rows, x.cols), std::vector<double>(x.cols, 0.0)};
  if (x.rows == 0) return out;
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) out.mean[c] += x(r, c);
  }
  for (double& m : out.mean) m /= static_cast<double>(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) out.values(r, c) = x(r, c) - out.mean[c];
  }
  return out;
}

double abs_max(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

double fp16_product_bound(int depth) {
  return numerics::kFp16Max / 32.0 / static_cast<double>(depth);
}

std::optional<std::string> range_violation(double p_r, double v_r, int depth) {
  if (depth != 1 && depth != 2) return "buffering depth must be 1 or 2, got " + std::to_string(depth);
  if (!(p_r > 0.0) || !(v_r > 0.0)) return std::string("p_r and v_r must be positive");
  if (p_r > numerics::kE4M3Max || v_r > numerics::kE4M3Max) {
    return "p_r and v_r must not exceed the E4M3 maximum 448";
  }
  const double product = p_r * v_r;
  const double bound = fp16_product_bound(depth);
  if (product > bound) {
    return "p_r·v_r = " + format_real(product) + " > " + format_real(bound);
  }
  return std::nullopt;
}

RangeConfig RangeConfig::make(double p_r, double v_r, int depth) {
  if (auto reason = range_violation(p_r, v_r, depth)) throw Error(ErrorCode::kRangeViolation, *reason);
  return RangeConfig(p_r, v_r, depth);
}

RangeConfig RangeConfig::unchecked(double p_r, double v_r, int depth) {
  if (depth != 1 && depth != 2) {
    throw Error(ErrorCode::kRangeViolation, "buffering depth must be 1 or 2");
  }
  if (!(p_r > 0.0) || !(v_r > 0.0) || p_r > numerics::kE4M3Max || v_r > numerics::kE4M3Max) {
    throw Error(ErrorCode::kRangeViolation, "p_r and v_r must lie in (0, 448]");
  }
  return RangeConfig(p_r, v_r, depth);
}

SmoothedMatrix smooth_k(ConstMatrixView k) { return subtract_channel_mean(k); }

SmoothedMatrix smooth_q(ConstMatrixView q) { return subtract_channel_mean(q); }

IntQuantBlock quantize_int_block(ConstMatrixView x, int bits) {
  if (bits != 4 && bits != 8) {
    throw Error(ErrorCode::kInvalidArgument, "integer quantization supports 4 or 8 bits");
  }
  const int qmax = (1 << (bits - 1)) - 1;
  IntQuantBlock out{CodeMatrix<std::int8_t>(x.rows, x.cols), 1.0, bits};
  const double amax = abs_max(x.data);
  if (amax == 0.0) return out;
  out.scale = amax / qmax;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double q = std::clamp(std::nearbyint(x.data[i] / out.scale), -double(qmax), double(qmax));
    out.codes.codes[i] = static_cast<std::int8_t>(q);
  }
  return out;
}

Fp8QuantBlock quantize_p_block(ConstMatrixView p, double p_r) {
  Fp8QuantBlock out{CodeMatrix<numerics::Fp8E4M3>(p.rows, p.cols), 1.0};
  const double amax = abs_max(p.data);
  if (amax == 0.0) return out;
  out.scale = amax / p_r;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    out.codes.codes[i] = numerics::e4m3_encode(p.data[i] / out.scale);
  }
  return out;
}

Fp8ChannelQuantBlock quantize_v_per_channel(ConstMatrixView v, double v_r) {
  Fp8ChannelQuantBlock out{CodeMatrix<numerics::Fp8E4M3>(v.rows, v.cols),
                           std::vector<double>(v.cols, 1.0)};
  for (std::size_t c = 0; c < v.cols; ++c) {
    double amax = 0.0;
    for (std::size_t r = 0; r < v.rows; ++r) amax = std::max(amax, std::fabs(v(r, c)));
    if (amax == 0.0) continue;
    out.scales[c] = amax / v_r;
    for (std::size_t r = 0; r < v.rows; ++r) {
      out.codes(r, c) = numerics::e4m3_encode(v(r, c) / out.scales[c]);
    }
  }
  return out;
}

Tensor dequantize(const IntQuantBlock& block) {
  Tensor out = Tensor::matrix(block.codes.rows, block.codes.cols);
  for (std::size_t i = 0; i < block.codes.codes.size(); ++i) {
    out.data()[i] = block.codes.codes[i] * block.scale;
  }
  return out;
}

Tensor dequantize(const Fp8QuantBlock& block) {
  Tensor out = Tensor::matrix(block.codes.rows, block.codes.cols);
  for (std::size_t i = 0; i < block.codes.codes.size(); ++i) {
    out.data()[i] = numerics::e4m3_decode(block.codes.codes[i]) * block.scale;
  }
  return out;
}

Tensor dequantize(const Fp8ChannelQuantBlock& block) {
  Tensor out = Tensor::matrix(block.codes.rows, block.codes.cols);
  for (std::size_t r = 0; r < block.codes.rows; ++r) {
    for (std::size_t c = 0; c < block.codes.cols; ++c) {
      out(r, c) = numerics::e4m3_decode(block.codes(r, c)) * block.scales[c];
    }
  }
  return out;
}

}  // namespace sagesim::quant
