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

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "oracles/float_oracles.hpp"
#include "sagesim/numerics.hpp"

namespace sagesim::numerics {
namespace {

TEST(E4M3Test, ExhaustiveRoundTrip) {
  for (int c = 0; c < 256; ++c) {
    const Fp8E4M3 code{static_cast<std::uint8_t>(c)};
    if (e4m3_is_nan(code)) {
      EXPECT_TRUE(std::isnan(e4m3_decode(code))) << c;
      continue;
    }
    const double value = e4m3_decode(code);
    const Fp8E4M3 back = e4m3_encode(value);
    if (value == 0.0) {
      EXPECT_EQ(back.code & 0x7F, 0) << c;
      EXPECT_EQ(std::signbit(e4m3_decode(back)), std::signbit(value)) << c;
    } else {
      EXPECT_EQ(back, code) << c;
    }
  }
}

TEST(E4M3Test, OnlyTwoNaNCodes) {
  int nan_codes = 0;
  for (int c = 0; c < 256; ++c) {
    nan_codes += e4m3_is_nan(Fp8E4M3{static_cast<std::uint8_t>(c)}) ? 1 : 0;
  }
  EXPECT_EQ(nan_codes, 2);
  EXPECT_TRUE(e4m3_is_nan(kE4M3NaNCode));
  EXPECT_TRUE(e4m3_is_nan(Fp8E4M3{0xFF}));
}

TEST(E4M3Test, MaxFiniteIs448) {
  EXPECT_EQ(e4m3_decode(kE4M3MaxCode), 448.0);
  EXPECT_EQ(e4m3_encode(448.0), kE4M3MaxCode);
  double largest = 0.0;
  for (int c = 0; c < 256; ++c) {
    const double v = e4m3_decode(Fp8E4M3{static_cast<std::uint8_t>(c)});
    if (!std::isnan(v)) largest = std::max(largest, std::fabs(v));
  }
  EXPECT_EQ(largest, 448.0);
}

TEST(E4M3Test, Saturates) {
  EXPECT_EQ(e4m3_encode(1000.0), kE4M3MaxCode);
  EXPECT_EQ(e4m3_decode(e4m3_encode(-1e30)), -448.0);
  EXPECT_EQ(e4m3_decode(e4m3_encode(464.0)), 448.0);
}

TEST(E4M3Test, ZeroAndSubnormals) {
  EXPECT_EQ(e4m3_encode(0.0).code, 0);
  EXPECT_EQ(e4m3_decode(Fp8E4M3{0x00}), 0.0);
  EXPECT_EQ(e4m3_decode(Fp8E4M3{0x01}), std::ldexp(1.0, -9));
  EXPECT_EQ(e4m3_decode(Fp8E4M3{0x08}), std::ldexp(1.0, -6));
  // Half the smallest subnormal ties to zero.
  EXPECT_EQ(e4m3_encode(std::ldexp(1.0, -10)).code, 0);
  EXPECT_EQ(e4m3_encode(std::ldexp(3.0, -11)).code, 0x01);
}

TEST(E4M3Test, TiesToEven) {
  // 1.0625 lies halfway between 1.0 (even mantissa) and 1.125.
  EXPECT_EQ(e4m3_decode(e4m3_encode(1.0625)), 1.0);
  EXPECT_EQ(e4m3_decode(e4m3_encode(1.1875)), 1.25);
  EXPECT_EQ(e4m3_decode(e4m3_encode(-1.0625)), -1.0);
}

TEST(E4M3Test, MatchesNearestCodeSearch) {
  std::mt19937_64 engine(1);
  std::uniform_real_distribution<double> exponent(-12.0, 9.5);
  std::uniform_int_distribution<int> sign(0, 1);
  for (int i = 0; i < 200000; ++i) {
    const double mag = std::exp2(exponent(engine));
    const double x = sign(engine) ? -mag : mag;
    ASSERT_EQ(e4m3_encode(x).code, oracle::e4m3_nearest_code(x)) << x;
  }
  // Every midpoint between adjacent codes.
  auto table = oracle::e4m3_table();
  std::vector<double> positives;
  for (const auto& e : table) {
    if (e.value >= 0.0 && !(e.value == 0.0 && e.code != 0)) positives.push_back(e.value);
  }
  std::sort(positives.begin(), positives.end());
  for (std::size_t i = 0; i + 1 < positives.size(); ++i) {
    const double mid = 0.5 * (positives[i] + positives[i + 1]);
    EXPECT_EQ(e4m3_encode(mid).code, oracle::e4m3_nearest_code(mid)) << mid;
    EXPECT_EQ(e4m3_encode(-mid).code, oracle::e4m3_nearest_code(-mid)) << -mid;
  }
}

TEST(E4M3Test, Monotone) {
  std::mt19937_64 engine(2);
  std::uniform_real_distribution<double> dist(-500.0, 500.0);
  for (int i = 0; i < 100000; ++i) {
    double x = dist(engine), y = dist(engine);
    if (x > y) std::swap(x, y);
    ASSERT_LE(e4m3_decode(e4m3_encode(x)), e4m3_decode(e4m3_encode(y)));
  }
}

TEST(E4M3Test, Ulp) {
  EXPECT_EQ(e4m3_ulp(1.0), 0.125);
  EXPECT_EQ(e4m3_ulp(448.0), 32.0);
  EXPECT_EQ(e4m3_ulp(4.5), 0.5);
  EXPECT_EQ(e4m3_ulp(0.001), std::ldexp(1.0, -9));
}

TEST(Fp16Test, Boundaries) {
  EXPECT_EQ(fp16_encode(65504.0), kFp16MaxCode);
  EXPECT_EQ(fp16_encode(65519.99).value(), kFp16MaxCode);
  EXPECT_FALSE(fp16_encode(65520.0).has_value());
  EXPECT_FALSE(fp16_encode(-65520.0).has_value());
  EXPECT_FALSE(fp16_encode(std::numeric_limits<double>::infinity()).has_value());
  EXPECT_FALSE(fp16_encode(std::numeric_limits<double>::quiet_NaN()).has_value());
  EXPECT_EQ(fp16_encode(std::ldexp(1.0, -24))->code, 0x0001);
  EXPECT_EQ(fp16_encode(std::ldexp(1.0, -25))->code, 0x0000);
  EXPECT_EQ(fp16_encode(std::ldexp(3.0, -26))->code, 0x0001);
  EXPECT_EQ(fp16_encode(std::ldexp(1.0, -14))->code, 0x0400);
  EXPECT_EQ(fp16_encode(std::ldexp(1023.0, -24))->code, 0x03FF);
  EXPECT_EQ(fp16_encode(-2.0)->code, 0xC000);
  EXPECT_EQ(fp16_decode(Fp16{0x3C00}), 1.0);
  EXPECT_EQ(fp16_decode(Fp16{0x7BFF}), 65504.0);
  EXPECT_EQ(fp16_decode(Fp16{0x0001}), std::ldexp(1.0, -24));
  EXPECT_TRUE(std::isinf(fp16_decode(Fp16{0x7C00})));
}

std::vector<float> fp16_test_samples() {
  std::vector<float> samples = {0.0f, -0.0f, 65504.0f, -65504.0f, 65519.996f, 65520.0f,
                                -65520.0f, 65536.0f, 1e-8f, std::ldexp(1.0f, -24),
                                std::ldexp(1.0f, -25), std::ldexp(3.0f, -26),
                                std::ldexp(1.0f, -14), std::ldexp(1023.0f, -24),
                                std::ldexp(2047.0f, -25), 1.0f, 1.0f + std::ldexp(1.0f, -11),
                                1.0f + std::ldexp(3.0f, -11), 2048.0f, 2049.0f, 2051.0f};
  std::mt19937_64 engine(3);
  std::uniform_int_distribution<std::uint32_t> mantissa(0, 0x7fffff);
  std::uniform_int_distribution<int> exponent(127 - 30, 127 + 16);
  std::uniform_int_distribution<int> sign(0, 1);
  while (samples.size() < 1200000) {
    const std::uint32_t bits = (static_cast<std::uint32_t>(sign(engine)) << 31) |
                               (static_cast<std::uint32_t>(exponent(engine)) << 23) |
                               mantissa(engine);
    samples.push_back(std::bit_cast<float>(bits));
  }
  // Exact ties in the normal and subnormal ranges.
  for (std::uint32_t h = 1; h < 0x7BFF; h += 7) {
    const double lo = oracle::f16_positive_values()[h];
    const double hi = oracle::f16_positive_values()[h + 1];
    samples.push_back(static_cast<float>(0.5 * (lo + hi)));
  }
  return samples;
}

TEST(Fp16Test, MatchesBitOracleOnMillionSamples) {
  const auto samples = fp16_test_samples();
  ASSERT_GE(samples.size(), 1000000u);
  std::size_t overflow = 0;
  for (float f : samples) {
    const auto expected = oracle::f32_to_f16_bits(f);
    const auto actual = fp16_encode(f);
    ASSERT_EQ(actual.has_value(), expected.has_value()) << f;
    if (!expected) {
      ++overflow;
      continue;
    }
    ASSERT_EQ(actual->code, *expected) << f;
  }
  EXPECT_GT(overflow, 0u);
}

TEST(Fp16Test, MatchesNearestValueSearch) {
  std::mt19937_64 engine(4);
  std::uniform_real_distribution<double> exponent(-27.0, 16.5);
  for (int i = 0; i < 200000; ++i) {
    const double x = std::exp2(exponent(engine)) * (i % 2 ? -1.0 : 1.0);
    const auto expected = oracle::f16_nearest(x);
    const auto actual = fp16_encode(x);
    ASSERT_EQ(actual.has_value(), expected.has_value()) << x;
    if (expected) {
      ASSERT_EQ(fp16_decode(*actual), *expected) << x;
    }
  }
}

TEST(Fp16Test, RoundMatchesEncodeDecode) {
  std::mt19937_64 engine(5);
  std::uniform_real_distribution<double> exponent(-30.0, 15.99);
  for (int i = 0; i < 200000; ++i) {
    const double x = std::exp2(exponent(engine)) * (i % 2 ? -1.0 : 1.0);
    ASSERT_EQ(fp16_round(x), fp16_decode(*fp16_encode(x))) << x;
  }
  EXPECT_EQ(fp16_round(65504.0), 65504.0);
  EXPECT_EQ(fp16_round(65520.0), 65536.0);
  EXPECT_EQ(fp16_round(0.0), 0.0);
}

TEST(Fp16Test, Monotone) {
  std::mt19937_64 engine(6);
  std::uniform_real_distribution<double> dist(-65000.0, 65000.0);
  for (int i = 0; i < 100000; ++i) {
    double x = dist(engine), y = dist(engine);
    if (x > y) std::swap(x, y);
    ASSERT_LE(fp16_decode(*fp16_encode(x)), fp16_decode(*fp16_encode(y)));
  }
}

TEST(Fp16Test, Add) {
  const Fp16 one = *fp16_encode(1.0);
  const Fp16 zero = *fp16_encode(0.0);
  EXPECT_EQ(fp16_decode(*fp16_add(one, zero)), 1.0);
  const Fp16 half_max = *fp16_encode(32752.0);
  EXPECT_EQ(fp16_decode(*fp16_add(half_max, half_max)), 65504.0);
  EXPECT_FALSE(fp16_add(kFp16MaxCode, kFp16MaxCode).has_value());
  // 2048 + 1 ties back to 2048.
  EXPECT_EQ(fp16_decode(*fp16_add(*fp16_encode(2048.0), one)), 2048.0);
  EXPECT_EQ(fp16_decode(*fp16_add(*fp16_encode(2050.0), one)), 2052.0);
}

TEST(Fp16Test, AddCommutesWithZeroIdentity) {
  std::mt19937_64 engine(7);
  std::uniform_int_distribution<int> code(0, 0x7BFF);
  for (int i = 0; i < 50000; ++i) {
    const Fp16 a{static_cast<std::uint16_t>(code(engine) | ((i & 1) << 15))};
    const Fp16 b{static_cast<std::uint16_t>(code(engine))};
    const auto ab = fp16_add(a, b), ba = fp16_add(b, a);
    ASSERT_EQ(ab.has_value(), ba.has_value());
    if (ab) {
      ASSERT_EQ(fp16_decode(*ab), fp16_decode(*ba));
    }
    ASSERT_EQ(fp16_decode(*fp16_add(a, Fp16{0})), fp16_decode(a));
  }
}

TEST(OverflowFlagTest, Counts) {
  OverflowFlag flag;
  EXPECT_FALSE(flag.triggered());
  flag.record();
  flag.record(3);
  OverflowFlag other;
  other.record(2);
  flag.merge(other);
  EXPECT_TRUE(flag.triggered());
  EXPECT_EQ(flag.count, 6u);
}

}  // namespace
}  // namespace sagesim::numerics
