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
#include <cmath>
#include <random>
#include <vector>

#include "oracles/float_oracles.hpp"
#include "sagesim/error.hpp"
#include "sagesim/quantization.hpp"

namespace sagesim::quant {
namespace {

using numerics::e4m3_decode;

Tensor random_matrix(std::mt19937_64& engine, std::size_t rows, std::size_t cols,
                     double stddev = 1.0, double mean = 0.0) {
  std::normal_distribution<double> dist(mean, stddev);
  Tensor t = Tensor::matrix(rows, cols);
  for (double& x : t.data()) x = dist(engine);
  return t;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double x : t.data()) m = std::max(m, std::fabs(x));
  return m;
}

TEST(QuantizeIntTest, Examples) {
  const auto a = quantize_int_block(Tensor({1, 2}, {127 * 0.5, -127 * 0.5}), 8);
  EXPECT_EQ(a.scale, 0.5);
  EXPECT_EQ(a.codes(0, 0), 127);
  EXPECT_EQ(a.codes(0, 1), -127);

  const auto zero = quantize_int_block(Tensor::matrix(3, 4), 8);
  EXPECT_EQ(zero.scale, 1.0);
  for (auto c : zero.codes.codes) EXPECT_EQ(c, 0);
  const Tensor back = dequantize(zero);
  for (double x : back.data()) EXPECT_EQ(x, 0.0);

  const auto four = quantize_int_block(Tensor({1, 2}, {7.0, -7.0}), 4);
  EXPECT_EQ(four.scale, 1.0);
  EXPECT_EQ(four.bits, 4);
  EXPECT_EQ(four.codes(0, 0), 7);
  EXPECT_EQ(four.codes(0, 1), -7);
}

TEST(QuantizeIntTest, DequantizeExample) {
  IntQuantBlock block{CodeMatrix<std::int8_t>{1, 1, {127}}, 0.5, 8};
  EXPECT_EQ(dequantize(block)(0, 0), 63.5);
}

TEST(QuantizeIntTest, RoundsHalfToEven) {
  // max 127 gives delta 1, so codes equal the rounded inputs.
  const auto block = quantize_int_block(Tensor({1, 5}, {127.0, 2.5, 3.5, -2.5, -0.5}), 8);
  EXPECT_EQ(block.codes(0, 1), 2);
  EXPECT_EQ(block.codes(0, 2), 4);
  EXPECT_EQ(block.codes(0, 3), -2);
  EXPECT_EQ(block.codes(0, 4), 0);
}

TEST(QuantizeIntTest, RoundTripWithinHalfDelta) {
  std::mt19937_64 engine(11);
  std::uniform_int_distribution<std::size_t> dim(1, 24);
  std::uniform_real_distribution<double> log_scale(-8.0, 8.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int bits = trial % 2 ? 4 : 8;
    const Tensor x = random_matrix(engine, dim(engine), dim(engine), std::exp2(log_scale(engine)));
    const auto block = quantize_int_block(x, bits);
    const int limit = bits == 8 ? 127 : 7;
    EXPECT_DOUBLE_EQ(block.scale, max_abs(x) / limit);
    const Tensor back = dequantize(block);
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_LE(std::abs(block.codes.codes[i]), limit);
      ASSERT_LE(std::fabs(back.data()[i] - x.data()[i]), block.scale / 2 * (1 + 1e-12));
    }
  }
}

TEST(QuantizeIntTest, ScaleInvariantCodes) {
  std::mt19937_64 engine(12);
  const double factors[] = {0.25, 2.0, 1024.0, 1.0 / 4096.0};
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor x = random_matrix(engine, 8, 16);
    for (int bits : {4, 8}) {
      const auto base = quantize_int_block(x, bits);
      for (double c : factors) {
        Tensor scaled = x;
        for (double& v : scaled.data()) v *= c;
        EXPECT_EQ(quantize_int_block(scaled, bits).codes.codes, base.codes.codes);
      }
    }
  }
}

TEST(QuantizePTest, Examples) {
  Tensor p({2, 2}, {1.0, 0.5, 0.25, 0.0});
  const auto b224 = quantize_p_block(p, 224.0);
  EXPECT_DOUBLE_EQ(b224.scale, 1.0 / 224.0);
  EXPECT_EQ(e4m3_decode(b224.codes(0, 0)), 224.0);
  EXPECT_EQ(e4m3_decode(b224.codes(0, 1)), 112.0);
  EXPECT_EQ(e4m3_decode(b224.codes(1, 1)), 0.0);

  const auto b448 = quantize_p_block(p, 448.0);
  EXPECT_DOUBLE_EQ(b448.scale, 1.0 / 448.0);
  EXPECT_EQ(b448.codes(0, 0), numerics::kE4M3MaxCode);

  Tensor constant({3, 3}, std::vector<double>(9, 0.37));
  for (double p_r : {448.0, 224.0, 112.0, 2.25}) {
    const auto b = quantize_p_block(constant, p_r);
    for (auto c : b.codes.codes) EXPECT_EQ(e4m3_decode(c), p_r);
  }
}

TEST(QuantizeVTest, Examples) {
  const auto one = quantize_v_per_channel(Tensor({2, 1}, {9.0, -9.0}), 4.5);
  EXPECT_EQ(one.scales[0], 2.0);
  EXPECT_EQ(e4m3_decode(one.codes(0, 0)), 4.5);
  EXPECT_EQ(e4m3_decode(one.codes(1, 0)), -4.5);

  Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const auto id = quantize_v_per_channel(eye, 4.5);
  for (double s : id.scales) EXPECT_DOUBLE_EQ(s, 1.0 / 4.5);

  const auto zero = quantize_v_per_channel(Tensor::matrix(4, 3), 4.5);
  for (double s : zero.scales) EXPECT_EQ(s, 1.0);
  for (auto c : zero.codes.codes) EXPECT_EQ(c.code, 0);
  const Tensor back = dequantize(zero);
  for (double x : back.data()) EXPECT_EQ(x, 0.0);
}

TEST(QuantizeFp8Test, MatchesNearestCodeSearch) {
  std::mt19937_64 engine(13);
  for (int trial = 0; trial < 2000; ++trial) {
    const double range = trial % 3 == 0 ? 448.0 : trial % 3 == 1 ? 4.5 : 2.25;
    const Tensor v = random_matrix(engine, 16, 8, 3.0);
    const auto vb = quantize_v_per_channel(v, range);
    for (std::size_t r = 0; r < v.rows(); ++r) {
      for (std::size_t c = 0; c < v.cols(); ++c) {
        const double scaled = v(r, c) / vb.scales[c];
        ASSERT_EQ(vb.codes(r, c).code, oracle::e4m3_nearest_code(scaled));
        const double err = std::fabs(e4m3_decode(vb.codes(r, c)) * vb.scales[c] - v(r, c));
        ASSERT_LE(err, vb.scales[c] * numerics::e4m3_ulp(std::fabs(scaled)) / 2 * (1 + 1e-12));
      }
    }
    Tensor p = random_matrix(engine, 8, 16);
    for (double& x : p.data()) x = std::exp(-std::fabs(x));
    const double p_r = trial % 2 ? 224.0 : 112.0;
    const auto pb = quantize_p_block(p, p_r);
    for (std::size_t i = 0; i < p.size(); ++i) {
      ASSERT_EQ(pb.codes.codes[i].code, oracle::e4m3_nearest_code(p.data()[i] / pb.scale));
      ASSERT_LE(e4m3_decode(pb.codes.codes[i]), p_r);
    }
  }
}

TEST(RangeConfigTest, AcceptsNarrowedPairs) {
  EXPECT_NO_THROW(RangeConfig::make(448.0, 2.25, 2));
  EXPECT_NO_THROW(RangeConfig::make(224.0, 4.5, 2));
  EXPECT_NO_THROW(RangeConfig::make(112.0, 9.0, 2));
  EXPECT_NO_THROW(RangeConfig::make(448.0, 4.5, 1));
  EXPECT_EQ(fp16_product_bound(1), 2047.0);
  EXPECT_EQ(fp16_product_bound(2), 1023.5);
}

TEST(RangeConfigTest, RejectsOutOfBound) {
  for (int depth : {1, 2}) {
    try {
      RangeConfig::make(448.0, 448.0, depth);
      FAIL() << "accepted (448, 448) at depth " << depth;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kRangeViolation);
    }
  }
  EXPECT_THROW(RangeConfig::make(224.0, 9.0, 2), Error);
  EXPECT_THROW(RangeConfig::make(448.0, 4.6, 1), Error);
  EXPECT_THROW(RangeConfig::make(224.0, 4.5, 3), Error);
  EXPECT_THROW(RangeConfig::make(0.0, 4.5, 2), Error);
  EXPECT_THROW(RangeConfig::make(500.0, 1.0, 2), Error);
  EXPECT_EQ(range_violation(224.0, 9.0, 2).value(), "p_r·v_r = 2016 > 1023.5");
  EXPECT_FALSE(range_violation(224.0, 4.5, 2).has_value());
}

TEST(RangeConfigTest, UncheckedAllowsBaseline) {
  const auto r = RangeConfig::unchecked(448.0, 448.0, 2);
  EXPECT_FALSE(r.within_fp16_bound());
  EXPECT_TRUE(RangeConfig::make(224.0, 4.5, 2).within_fp16_bound());
  EXPECT_THROW(RangeConfig::unchecked(449.0, 1.0, 1), Error);
  EXPECT_THROW(RangeConfig::unchecked(1.0, 1.0, 0), Error);
}

TEST(SmoothTest, Examples) {
  Tensor same({3, 2}, {1.5, -2.0, 1.5, -2.0, 1.5, -2.0});
  const auto s = smooth_k(same.view());
  for (double x : s.values.data()) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(s.mean, (std::vector<double>{1.5, -2.0}));

  Tensor centred({2, 2}, {1.0, -3.0, -1.0, 3.0});
  EXPECT_EQ(smooth_k(centred.view()).values, centred);

  const auto zq = smooth_q(Tensor::matrix(4, 3).view());
  for (double x : zq.values.data()) EXPECT_EQ(x, 0.0);
  for (double m : zq.mean) EXPECT_EQ(m, 0.0);

  Tensor single({1, 3}, {0.5, 2.0, -1.0});
  const auto sq = smooth_q(single.view());
  for (double x : sq.values.data()) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(sq.mean, (std::vector<double>{0.5, 2.0, -1.0}));

  std::mt19937_64 engine(14);
  const Tensor k = random_matrix(engine, 8, 4, 1.0, 3.0);
  const auto sk = smooth_k(k.view());
  for (std::size_t c = 0; c < 4; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < 8; ++r) mean += sk.values(r, c);
    EXPECT_LE(std::fabs(mean / 8), 1e-12);
  }
}

std::vector<double> softmax_row(const std::vector<double>& s) {
  const double m = *std::max_element(s.begin(), s.end());
  std::vector<double> p(s.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) sum += p[i] = std::exp(s[i] - m);
  for (double& x : p) x /= sum;
  return p;
}

TEST(SmoothTest, SoftmaxUnchanged) {
  std::mt19937_64 engine(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor q = random_matrix(engine, 12, 16, 1.0, 0.7);
    const Tensor k = random_matrix(engine, 20, 16, 1.0, -1.3);
    const auto sq = smooth_q(q.view());
    const auto sk = smooth_k(k.view());
    for (std::size_t i = 0; i < q.rows(); ++i) {
      std::vector<double> direct(k.rows()), smoothed(k.rows());
      for (std::size_t j = 0; j < k.rows(); ++j) {
        double d = 0.0, a = 0.0, comp = 0.0;
        for (std::size_t c = 0; c < 16; ++c) {
          d += q(i, c) * k(j, c);
          a += sq.values(i, c) * sk.values(j, c);
          comp += sq.mean[c] * sk.values(j, c);
        }
        direct[j] = d;
        smoothed[j] = a + comp;
      }
      const auto pd = softmax_row(direct), ps = softmax_row(smoothed);
      EXPECT_EQ(std::max_element(pd.begin(), pd.end()) - pd.begin(),
                std::max_element(ps.begin(), ps.end()) - ps.begin());
      for (std::size_t j = 0; j < pd.size(); ++j) {
        ASSERT_LE(std::fabs(pd[j] - ps[j]), 1e-12 * std::max(1.0, pd[j]));
      }
    }
  }
}

}  // namespace
}  // namespace sagesim::quant
