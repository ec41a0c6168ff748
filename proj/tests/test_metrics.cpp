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

#include "sagesim/error.hpp"
#include "sagesim/metrics.hpp"

namespace sagesim::metrics {
namespace {

void expect_rel(double actual, double expected, double tol = 1e-12) {
  EXPECT_LE(std::fabs(actual - expected), tol * std::fabs(expected))
      << actual << " vs " << expected;
}

TEST(MetricsTest, HandComputedCases) {
  const std::vector<double> o{3.0, 4.0}, o2{3.0, 0.0};
  const MetricsReport r = compare(o, o2);
  expect_rel(r.cossim, 0.6);
  expect_rel(r.l1, 4.0 / 7.0);
  expect_rel(r.rmse, 2.0 * std::sqrt(2.0));

  const std::vector<double> one{1.0}, minus{-1.0};
  const MetricsReport neg = compare(one, minus);
  EXPECT_EQ(neg.cossim, -1.0);
  EXPECT_EQ(neg.l1, 2.0);
  EXPECT_EQ(neg.rmse, 2.0);
}

TEST(MetricsTest, Identity) {
  const std::vector<double> o{0.5, -2.0, 7.25, 1e-3};
  const MetricsReport r = compare(o, o);
  expect_rel(r.cossim, 1.0);
  EXPECT_EQ(r.l1, 0.0);
  EXPECT_EQ(r.rmse, 0.0);
}

TEST(MetricsTest, TensorOverloadChecksShape) {
  const Tensor a({2, 2}, {1, 2, 3, 4}), b({4, 1}, {1, 2, 3, 4}), c({2, 3});
  EXPECT_EQ(compare(a, a).l1, 0.0);
  try {
    compare(a, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  EXPECT_THROW(compare(a, b), Error);
}

TEST(MetricsTest, DegenerateInputsThrow) {
  const std::vector<double> zero(3, 0.0), x{1.0, 2.0, 3.0};
  for (const auto& [ref, approx] : {std::pair{zero, x}, std::pair{x, zero}}) {
    try {
      compare(ref, approx);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
    }
  }
  EXPECT_THROW(compare(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(MetricsTest, ScaleProperty) {
  std::mt19937_64 engine(41);
  std::normal_distribution<double> dist;
  for (double c : {0.5, 1.0, 1.001, 3.0}) {
    std::vector<double> o(500), oc(500);
    long double sq = 0.0L;
    for (std::size_t i = 0; i < o.size(); ++i) {
      o[i] = dist(engine);
      oc[i] = c * o[i];
      sq += static_cast<long double>(o[i]) * o[i];
    }
    const MetricsReport r = compare(o, oc);
    expect_rel(r.cossim, 1.0);
    expect_rel(r.l1, std::fabs(1.0 - c), 1e-12);
    expect_rel(r.rmse, std::fabs(1.0 - c) * std::sqrt(static_cast<double>(sq / 500)), 1e-12);
  }
}

TEST(MetricsTest, PermutationInvariant) {
  std::mt19937_64 engine(42);
  std::normal_distribution<double> dist;
  std::vector<double> a(300), b(300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = dist(engine);
    b[i] = a[i] + 0.1 * dist(engine);
  }
  std::vector<std::size_t> perm(a.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), engine);
  std::vector<double> pa(a.size()), pb(b.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    pa[i] = a[perm[i]];
    pb[i] = b[perm[i]];
  }
  const MetricsReport r = compare(a, b), p = compare(pa, pb);
  expect_rel(p.cossim, r.cossim);
  expect_rel(p.l1, r.l1);
  expect_rel(p.rmse, r.rmse);
}

TEST(MetricsTest, MatchesWidePrecisionRecomputation) {
  std::mt19937_64 engine(43);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) * 97;
    std::vector<double> o(n), op(n);
    for (std::size_t i = 0; i < n; ++i) {
      o[i] = dist(engine);
      op[i] = o[i] * (1.0 + 0.01 * dist(engine));
    }
    // Pairwise summation in long double, independent of the library's loop.
    auto sum = [](auto&& term, std::size_t count) {
      std::vector<long double> parts(count);
      for (std::size_t i = 0; i < count; ++i) parts[i] = term(i);
      while (parts.size() > 1) {
        std::vector<long double> next((parts.size() + 1) / 2);
        for (std::size_t i = 0; i < next.size(); ++i) {
          next[i] = parts[2 * i] + (2 * i + 1 < parts.size() ? parts[2 * i + 1] : 0.0L);
        }
        parts.swap(next);
      }
      return parts[0];
    };
    auto L = [](double x) { return static_cast<long double>(x); };
    const long double dot = sum([&](std::size_t i) { return L(o[i]) * L(op[i]); }, n);
    const long double n1 = sum([&](std::size_t i) { return L(o[i]) * L(o[i]); }, n);
    const long double n2 = sum([&](std::size_t i) { return L(op[i]) * L(op[i]); }, n);
    const long double diff = sum([&](std::size_t i) { return std::fabs(L(o[i]) - L(op[i])); }, n);
    const long double abs = sum([&](std::size_t i) { return std::fabs(L(o[i])); }, n);
    const long double sq =
        sum([&](std::size_t i) { return (L(o[i]) - L(op[i])) * (L(o[i]) - L(op[i])); }, n);
    const MetricsReport r = compare(o, op);
    expect_rel(r.cossim, static_cast<double>(dot / (std::sqrt(n1) * std::sqrt(n2))));
    expect_rel(r.l1, static_cast<double>(diff / abs));
    expect_rel(r.rmse, static_cast<double>(std::sqrt(sq / n)));
  }
}

}  // namespace
}  // namespace sagesim::metrics
