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

// Binary tensor files.
//
//   bytes 0..11   magic "SAGESIM-TNSR"
//   bytes 12..15  format version, little-endian uint32 (currently 1)
//   then          rank as little-endian uint64, then each dimension as uint64
//   then          row-major little-endian IEEE binary32 elements
//
// A JSON sidecar with the same stem and the extension ".meta.json" records
// how the tensor was produced.

#ifndef SAGESIM_TENSOR_IO_HPP_
#define SAGESIM_TENSOR_IO_HPP_

#include <cstdint>
#include <string>

#include "sagesim/tensor.hpp"

namespace sagesim::io {

inline constexpr char kTensorMagic[12] = {'S', 'A', 'G', 'E', 'S', 'I',
                                          'M', '-', 'T', 'N', 'S', 'R'};
inline constexpr std::uint32_t kTensorFormatVersion = 1;

// Elements are narrowed to binary32 on write.
void save_tensor(const std::string& path, const Tensor& tensor);
Tensor load_tensor(const std::string& path);

std::string sidecar_path(const std::string& tensor_path);
void write_sidecar(const std::string& tensor_path, const std::string& json_text);

}  // namespace sagesim::io

#endif  // SAGESIM_TENSOR_IO_HPP_
