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

// Bit-exact scalar emulation of IEEE binary16 and OFP8 E4M3.
//
// Both codecs round to nearest, ties to even. E4M3 encoding saturates at
// +/-448; binary16 encoding reports overflow (|rounded| > 65504) instead of
// producing infinity, because accumulator overflow has to stay observable.

#ifndef SAGESIM_NUMERICS_HPP_
#define SAGESIM_NUMERICS_HPP_

#include <bit>
#include <cstdint>
#include <optional>

namespace sagesim::numerics {

inline constexpr double kFp16Max = 65504.0;
inline constexpr double kE4M3Max = 448.0;

struct Fp16 {
  std::uint16_t code = 0;

  friend bool operator==(Fp16, Fp16) = default;
};

struct Fp8E4M3 {
  std::uint8_t code = 0;

  friend bool operator==(Fp8E4M3, Fp8E4M3) = default;
};

inline constexpr Fp8E4M3 kE4M3MaxCode{0x7E};
inline constexpr Fp8E4M3 kE4M3NaNCode{0x7F};
inline constexpr Fp16 kFp16MaxCode{0x7BFF};

// Overflow events observed while accumulating in binary16.
struct OverflowFlag {
  std::uint64_t count = 0;

  bool triggered() const noexcept { return count > 0; }
  void record(std::uint64_t events = 1) noexcept { count += events; }
  void merge(const OverflowFlag& other) noexcept { count += other.count; }
};

// Returns std::nullopt when the rounded magnitude exceeds 65504 (or x is not
// finite).
std::optional<Fp16> fp16_encode(double x) noexcept;
double fp16_decode(Fp16 h) noexcept;
std::optional<Fp16> fp16_add(Fp16 a, Fp16 b) noexcept;

Fp8E4M3 e4m3_encode(double x) noexcept;
// NaN codes (0x7F, 0xFF) decode to a quiet NaN.
double e4m3_decode(Fp8E4M3 c) noexcept;
bool e4m3_is_nan(Fp8E4M3 c) noexcept;
// Spacing of the E4M3 grid in the binade that contains |x|.
double e4m3_ulp(double x) noexcept;

// Rounds an exactly represented double onto the binary16 grid, RNE, with no
// range check: the result may exceed 65504 and the caller decides what an
// overflow means. Values agree with fp16_decode(fp16_encode(x)) whenever the
// latter exists. Used on the accumulation hot path.
inline double fp16_round(double x) noexcept {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  std::uint64_t biased = (bits >> 52) & 0x7ff;
  if (biased < 1009) biased = 1009;  // binary16 subnormal grid, 2^-24
  if (biased > 1100) biased = 1100;
  // 1.5 * 2^(ulp + 52) with ulp = exponent - 10.
  const double magic =
      std::bit_cast<double>(((biased + 42) << 52) | (std::uint64_t{1} << 51));
  return (x + magic) - magic;
}

}  // namespace sagesim::numerics

#endif  // SAGESIM_NUMERICS_HPP_
