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

#include "sagesim/tensor.hpp"

#include <functional>
#include <numeric>
#include <string>

#include "sagesim/error.hpp"

namespace sagesim {
namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(element_count(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor data has " + std::to_string(data_.size()) + " elements, shape needs " +
                    std::to_string(element_count(shape_)));
  }
}

std::size_t Tensor::num_matrices() const {
  if (shape_.size() < 2) throw Error(ErrorCode::kShapeMismatch, "tensor rank must be >= 2");
  return std::accumulate(shape_.begin(), shape_.end() - 2, std::size_t{1}, std::multiplies<>());
}

MatrixView Tensor::matrix_view(std::size_t index) {
  const std::size_t r = rows(), c = cols();
  if (index >= num_matrices()) throw Error(ErrorCode::kShapeMismatch, "matrix index out of range");
  return {std::span<double>(data_).subspan(index * r * c, r * c), r, c};
}

ConstMatrixView Tensor::matrix_view(std::size_t index) const {
  const std::size_t r = rows(), c = cols();
  if (index >= num_matrices()) throw Error(ErrorCode::kShapeMismatch, "matrix index out of range");
  return {std::span<const double>(data_).subspan(index * r * c, r * c), r, c};
}

Tensor to_tensor(ConstMatrixView m) {
  return Tensor({m.rows, m.cols}, std::vector<double>(m.data.begin(), m.data.end()));
}

}  // namespace sagesim
