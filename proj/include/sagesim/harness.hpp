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

// Batch front end shared by the C API and the CLI: deterministic tensor
// generation, single reference-vs-quantized runs and (p_r, v_r) sweeps.

#ifndef SAGESIM_HARNESS_HPP_
#define SAGESIM_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sagesim/attention.hpp"
#include "sagesim/metrics.hpp"
#include "sagesim/tensor.hpp"

namespace sagesim::harness {

// Random streams come from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Uniforms take the top 53 bits; normals use Box-Muller
// (both outputs of each pair). Every sample is rounded to binary32 so that a
// tensor survives a round trip through a tensor file unchanged.
inline constexpr const char* kGeneratorName = "mt19937_64";
inline constexpr const char* kSamplerName = "box-muller/binary32";

enum class Distribution { kGaussian, kUniform, kAdversarialMax };

struct DistributionSpec {
  Distribution kind = Distribution::kGaussian;
  double mean = 0.0;
  double stddev = 1.0;
  double low = 0.0;
  double high = 1.0;
  double magnitude = 1.0;
};

std::string distribution_name(Distribution d);
Distribution parse_distribution(const std::string& name);

Tensor generate_tensor(const std::vector<std::size_t>& shape, const DistributionSpec& dist,
                       std::mt19937_64& engine);
Tensor generate_tensor(const std::vector<std::size_t>& shape, const DistributionSpec& dist,
                       std::uint64_t seed);

// JSON text for the ".meta.json" sidecar of a generated tensor.
std::string generation_metadata(const std::vector<std::size_t>& shape,
                                const DistributionSpec& dist, std::uint64_t seed);

struct InputSpec {
  std::uint64_t seed = 0;
  std::size_t seq_len = 256;
  std::size_t head_dim = 128;
  std::size_t heads = 2;
  DistributionSpec dist;
};

struct Inputs {
  Tensor q, k, v;
};

// Q, K and V are drawn in that order from one engine seeded with spec.seed;
// shapes are (heads, seq_len, head_dim).
Inputs make_inputs(const InputSpec& spec);

struct ReportRow {
  attention::AttentionConfig config;
  std::size_t seq_len = 0;
  std::size_t head_dim = 0;
  std::size_t heads = 0;
  std::optional<std::uint64_t> seed;
  std::size_t repetition = 0;
  metrics::MetricsReport metrics;
  std::uint64_t overflow_events = 0;
  std::uint64_t conversions = 0;
  std::uint64_t mma_invocations = 0;
  attention::ScaleStats scales;
  double wall_time = 0.0;  // seconds, both paths
};

// Runs the reference and the quantized path on the same inputs. The
// quantized output is moved into *quantized_output when that is non-null.
ReportRow run_row(const Inputs& inputs, const attention::AttentionConfig& config,
                  Tensor* quantized_output = nullptr);

// One JSON object; `input_json` (if non-empty) is embedded under "input".
std::string row_to_json(const ReportRow& row, const std::string& input_json = "");

std::string csv_header();
std::string row_to_csv(const ReportRow& row);

struct SweepEntry {
  double p_r = 224.0;
  double v_r = 4.5;
  int depth = 2;
  mma::Accumulator accumulator = mma::Accumulator::kFp16;
  bool expect_overflow = false;
};

struct SweepRejection {
  SweepEntry entry;
  std::string reason;
};

struct SweepSpec {
  InputSpec input;
  attention::AttentionConfig base;  // tiling, bit width, flags
  std::vector<SweepEntry> entries;
  std::vector<SweepRejection> rejected;
  std::size_t repetitions = 1;
};

// The three narrowed (p_r, v_r) pairs at depth 2: (448, 2.25), (224, 4.5),
// (112, 9).
std::vector<SweepEntry> table2_preset();

// Parses the JSON sweep description. Grid points outside the binary16 bound
// land in `rejected`; explicit entries outside it are an error unless they
// set expect_overflow.
SweepSpec parse_sweep_spec(const std::string& json_text);

struct SweepResult {
  std::vector<ReportRow> rows;
  std::string csv;
  bool unexpected_overflow = false;
};

// Rows come out in entry order, repetitions innermost; repetition r uses
// seed + r.
SweepResult run_sweep(const SweepSpec& spec);

// 256 lines "0xNN,value" under the header "code,value"; NaN codes print "nan".
std::string codec_table_csv();

}  // namespace sagesim::harness

#endif  // SAGESIM_HARNESS_HPP_
