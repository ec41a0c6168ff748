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

#ifndef SAGESIM_TENSOR_HPP_
#define SAGESIM_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace sagesim {

// Non-owning row-major matrix window.
template <typename T>
struct BasicMatrixView {
  std::span<T> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<T> row(std::size_t r) const { return data.subspan(r * cols, cols); }

  operator BasicMatrixView<const T>() const { return {data, rows, cols}; }
};

using MatrixView = BasicMatrixView<double>;
using ConstMatrixView = BasicMatrixView<const double>;

// Dense row-major tensor held in double precision. Rank 2 is a single
// (tokens x dim) matrix; higher ranks are stacks of such matrices, the
// trailing two dimensions being tokens and channels.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  // Rank-2 accessors.
  std::size_t rows() const { return shape_.at(shape_.size() - 2); }
  std::size_t cols() const { return shape_.back(); }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  // Number of trailing (rows x cols) matrices.
  std::size_t num_matrices() const;
  MatrixView matrix_view(std::size_t index);
  ConstMatrixView matrix_view(std::size_t index) const;
  MatrixView view() { return matrix_view(0); }
  ConstMatrixView view() const { return matrix_view(0); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

Tensor to_tensor(ConstMatrixView m);

}  // namespace sagesim

#endif  // SAGESIM_TENSOR_HPP_
