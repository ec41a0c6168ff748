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

#include "sagesim/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

#include "sagesim/error.hpp"

namespace sagesim::io {
namespace {

template <typename U>
void put_le(std::vector<char>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename U>
U get_le(const std::vector<char>& in, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(U) > in.size()) throw Error(ErrorCode::kParse, path + ": truncated tensor file");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(U);
  return value;
}

}  // namespace

void save_tensor(const std::string& path, const Tensor& tensor) {
  std::vector<char> bytes(std::begin(kTensorMagic), std::end(kTensorMagic));
  put_le<std::uint32_t>(bytes, kTensorFormatVersion);
  put_le<std::uint64_t>(bytes, tensor.rank());
  for (std::size_t d : tensor.shape()) put_le<std::uint64_t>(bytes, d);
  bytes.reserve(bytes.size() + 4 * tensor.size());
  for (double x : tensor.data()) {
    put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  const std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kTensorMagic, sizeof(kTensorMagic)) != 0) {
    throw Error(ErrorCode::kParse, path + ": not a tensor file (bad magic)");
  }
  std::size_t pos = sizeof(kTensorMagic);
  const auto version = get_le<std::uint32_t>(bytes, pos, path);
  if (version != kTensorFormatVersion) {
    throw Error(ErrorCode::kParse, path + ": unsupported tensor format version " + std::to_string(version));
  }
  const auto rank = get_le<std::uint64_t>(bytes, pos, path);
  if (rank == 0 || rank > 8) throw Error(ErrorCode::kParse, path + ": unsupported rank");
  std::vector<std::size_t> shape(rank);
  std::uint64_t count = 1;
  for (auto& d : shape) {
    d = get_le<std::uint64_t>(bytes, pos, path);
    count *= d;
  }
  if (bytes.size() - pos != count * 4) {
    throw Error(ErrorCode::kParse, path + ": payload size does not match shape");
  }
  std::vector<double> data(count);
  for (auto& x : data) x = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos, path));
  return Tensor(std::move(shape), std::move(data));
}

std::string sidecar_path(const std::string& tensor_path) {
  std::filesystem::path p(tensor_path);
  p.replace_extension(".meta.json");
  return p.string();
}

void write_sidecar(const std::string& tensor_path, const std::string& json_text) {
  const std::string path = sidecar_path(tensor_path);
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  f << json_text << '\n';
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace sagesim::io
