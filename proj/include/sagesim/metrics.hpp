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

#ifndef SAGESIM_METRICS_HPP_
#define SAGESIM_METRICS_HPP_

#include <span>

#include "sagesim/tensor.hpp"

namespace sagesim::metrics {

// Accuracy of an approximate attention output O' against the reference O,
// both flattened:
//   cossim = sum(O O') / (sqrt(sum O^2) sqrt(sum O'^2))
//   l1     = sum|O - O'| / sum|O|
//   rmse   = sqrt(sum (O - O')^2 / n)
struct MetricsReport {
  double cossim = 0.0;
  double l1 = 0.0;
  double rmse = 0.0;
};

// Throws kShapeMismatch on differing lengths and kDegenerate when O or O' is
// all zeros (a denominator vanishes).
MetricsReport compare(std::span<const double> reference, std::span<const double> approx);
MetricsReport compare(const Tensor& reference, const Tensor& approx);

}  // namespace sagesim::metrics

#endif  // SAGESIM_METRICS_HPP_
