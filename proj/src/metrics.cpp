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

#include "sagesim/metrics.hpp"

#include <cmath>

#include "sagesim/error.hpp"

namespace sagesim::metrics {

MetricsReport compare(std::span<const double> reference, std::span<const double> approx) {
  if (reference.size() != approx.size()) {
    throw Error(ErrorCode::kShapeMismatch, "metric operands differ in length");
  }
  if (reference.empty()) throw Error(ErrorCode::kDegenerate, "metric operands are empty");
  long double dot = 0, ref_sq = 0, approx_sq = 0, abs_diff = 0, abs_ref = 0, sq_diff = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const long double o = reference[i];
    const long double op = approx[i];
    const long double d = o - op;
    dot += o * op;
    ref_sq += o * o;
    approx_sq += op * op;
    abs_diff += std::fabs(d);
    abs_ref += std::fabs(o);
    sq_diff += d * d;
  }
  if (ref_sq == 0 || abs_ref == 0) {
    throw Error(ErrorCode::kDegenerate, "reference output is all zeros");
  }
  if (approx_sq == 0) throw Error(ErrorCode::kDegenerate, "approximate output is all zeros");
  MetricsReport m;
  m.cossim = static_cast<double>(dot / (std::sqrt(ref_sq) * std::sqrt(approx_sq)));
  m.l1 = static_cast<double>(abs_diff / abs_ref);
  m.rmse = static_cast<double>(std::sqrt(sq_diff / static_cast<long double>(reference.size())));
  return m;
}

MetricsReport compare(const Tensor& reference, const Tensor& approx) {
  if (reference.shape() != approx.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "metric operands differ in shape");
  }
  return compare(reference.data(), approx.data());
}

}  // namespace sagesim::metrics
