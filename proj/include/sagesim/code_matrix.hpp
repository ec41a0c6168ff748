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

#ifndef SAGESIM_CODE_MATRIX_HPP_
#define SAGESIM_CODE_MATRIX_HPP_

#include <cstddef>
#include <utility>
#include <vector>

namespace sagesim {

// Row-major matrix of quantized codes (INT8/INT4 widened to int8, or E4M3).
template <typename Code>
struct CodeMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Code> codes;

  CodeMatrix() = default;
  CodeMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), codes(r * c) {}
  // values.size() must equal r * c.
  CodeMatrix(std::size_t r, std::size_t c, std::vector<Code> values)
      : rows(r), cols(c), codes(std::move(values)) {}

  Code& operator()(std::size_t r, std::size_t c) { return codes[r * cols + c]; }
  const Code& operator()(std::size_t r, std::size_t c) const { return codes[r * cols + c]; }
};

}  // namespace sagesim

#endif  // SAGESIM_CODE_MATRIX_HPP_
