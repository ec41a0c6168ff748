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

#include "sagesim/numerics.hpp"

#include <cmath>
#include <limits>

namespace sagesim::numerics {
namespace {

struct Fields {
  std::uint64_t sign;
  int exponent;            // unbiased
  std::uint64_t significand;  // with the implicit bit, 53 bits
  bool zero;
};

Fields split(double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const auto biased = static_cast<int>((bits >> 52) & 0x7ff);
  Fields f{};
  f.sign = bits >> 63;
  // Double subnormals are far below either target grid and round to zero.
  f.zero = biased == 0;
  f.exponent = biased - 1023;
  f.significand = (std::uint64_t{1} << 52) | (bits & ((std::uint64_t{1} << 52) - 1));
  return f;
}

// Shifts right by `shift` bits with round-to-nearest-even.
std::uint64_t shift_rne(std::uint64_t m, int shift) {
  if (shift >= 64) return 0;
  if (shift <= 0) return m << -shift;
  const std::uint64_t q = m >> shift;
  const std::uint64_t rem = m & ((std::uint64_t{1} << shift) - 1);
  const std::uint64_t half = std::uint64_t{1} << (shift - 1);
  return (rem > half || (rem == half && (q & 1))) ? q + 1 : q;
}

}  // namespace

std::optional<Fp16> fp16_encode(double x) noexcept {
  if (!std::isfinite(x)) return std::nullopt;
  const Fields f = split(x);
  const auto sign = static_cast<std::uint16_t>(f.sign << 15);
  if (f.zero) return Fp16{sign};
  if (f.exponent > 15) return std::nullopt;

  // 10 stored mantissa bits; below 2^-14 the grid is fixed at 2^-24.
  const int shift = 42 + (f.exponent < -14 ? -14 - f.exponent : 0);
  const std::uint64_t q = shift_rne(f.significand, shift);
  // q lands in [1024, 2048] for normals; the carry into the exponent field
  // is the correct result when q == 2048.
  const std::uint64_t code =
      f.exponent >= -14 ? ((static_cast<std::uint64_t>(f.exponent + 15) << 10) + q - 1024) : q;
  if (code >= 0x7C00) return std::nullopt;
  return Fp16{static_cast<std::uint16_t>(sign | code)};
}

double fp16_decode(Fp16 h) noexcept {
  const bool negative = (h.code & 0x8000) != 0;
  const int exp = (h.code >> 10) & 0x1f;
  const int mant = h.code & 0x3ff;
  double v;
  if (exp == 0) {
    v = std::ldexp(static_cast<double>(mant), -24);
  } else if (exp == 31) {
    v = mant == 0 ? std::numeric_limits<double>::infinity()
                  : std::numeric_limits<double>::quiet_NaN();
  } else {
    v = std::ldexp(static_cast<double>(1024 + mant), exp - 25);
  }
  return negative ? -v : v;
}

std::optional<Fp16> fp16_add(Fp16 a, Fp16 b) noexcept {
  // Any two binary16 values sum exactly in double.
  return fp16_encode(fp16_decode(a) + fp16_decode(b));
}

Fp8E4M3 e4m3_encode(double x) noexcept {
  if (std::isnan(x)) return kE4M3NaNCode;
  const Fields f = split(x);
  const auto sign = static_cast<std::uint8_t>(f.sign << 7);
  if (f.zero) return Fp8E4M3{sign};
  if (f.exponent > 8) return Fp8E4M3{static_cast<std::uint8_t>(sign | kE4M3MaxCode.code)};

  const int shift = 49 + (f.exponent < -6 ? -6 - f.exponent : 0);
  const std::uint64_t q = shift_rne(f.significand, shift);
  std::uint64_t code =
      f.exponent >= -6 ? ((static_cast<std::uint64_t>(f.exponent + 7) << 3) + q - 8) : q;
  if (code > kE4M3MaxCode.code) code = kE4M3MaxCode.code;
  return Fp8E4M3{static_cast<std::uint8_t>(sign | code)};
}

bool e4m3_is_nan(Fp8E4M3 c) noexcept { return (c.code & 0x7f) == 0x7f; }

double e4m3_decode(Fp8E4M3 c) noexcept {
  if (e4m3_is_nan(c)) return std::numeric_limits<double>::quiet_NaN();
  const bool negative = (c.code & 0x80) != 0;
  const int exp = (c.code >> 3) & 0xf;
  const int mant = c.code & 0x7;
  const double v = exp == 0 ? std::ldexp(static_cast<double>(mant), -9)
                            : std::ldexp(static_cast<double>(8 + mant), exp - 10);
  return negative ? -v : v;
}

double e4m3_ulp(double x) noexcept {
  const double mag = std::fabs(x);
  if (mag == 0.0 || !std::isfinite(mag)) return std::ldexp(1.0, -9);
  int e = std::ilogb(mag);
  if (e < -6) e = -6;
  return std::ldexp(1.0, e - 3);
}

}  // namespace sagesim::numerics
