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

#include "sagesim/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "sagesim/error.hpp"
#include "sagesim/format.hpp"
#include "sagesim/numerics.hpp"

namespace sagesim::harness {
namespace {

using Json = nlohmann::ordered_json;

double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

const char* accumulator_name(mma::Accumulator a) {
  return a == mma::Accumulator::kFp16 ? "fp16" : "fp32";
}

mma::Accumulator parse_accumulator(const std::string& name) {
  if (name == "fp16") return mma::Accumulator::kFp16;
  if (name == "fp32") return mma::Accumulator::kFp32;
  throw Error(ErrorCode::kParse, "unknown accumulator '" + name + "' (expected fp16 or fp32)");
}

Json distribution_json(const DistributionSpec& d) {
  Json j;
  j["kind"] = distribution_name(d.kind);
  switch (d.kind) {
    case Distribution::kGaussian:
      j["mean"] = d.mean;
      j["stddev"] = d.stddev;
      break;
    case Distribution::kUniform:
      j["low"] = d.low;
      j["high"] = d.high;
      break;
    case Distribution::kAdversarialMax:
      j["magnitude"] = d.magnitude;
      break;
  }
  return j;
}

attention::AttentionConfig config_for(const attention::AttentionConfig& base, const SweepEntry& e) {
  attention::AttentionConfig c = base;
  c.pv_accumulator = e.accumulator;
  c.expect_overflow = e.expect_overflow;
  const bool enforce = e.accumulator == mma::Accumulator::kFp16 && !e.expect_overflow;
  c.range = enforce ? quant::RangeConfig::make(e.p_r, e.v_r, e.depth)
                    : quant::RangeConfig::unchecked(e.p_r, e.v_r, e.depth);
  return c;
}

SweepEntry parse_entry(const Json& j) {
  SweepEntry e;
  e.p_r = j.at("p_r").get<double>();
  e.v_r = j.at("v_r").get<double>();
  e.depth = j.value("depth", 2);
  e.accumulator = parse_accumulator(j.value("accumulator", std::string("fp16")));
  e.expect_overflow = j.value("expect_overflow", false);
  return e;
}

std::string entry_label(const SweepEntry& e) {
  return "p_r=" + format_real(e.p_r) + " v_r=" + format_real(e.v_r) +
         " depth=" + std::to_string(e.depth);
}

}  // namespace

std::string distribution_name(Distribution d) {
  switch (d) {
    case Distribution::kGaussian: return "gaussian";
    case Distribution::kUniform: return "uniform";
    case Distribution::kAdversarialMax: return "adversarial-max";
  }
  return "unknown";
}

Distribution parse_distribution(const std::string& name) {
  if (name == "gaussian") return Distribution::kGaussian;
  if (name == "uniform") return Distribution::kUniform;
  if (name == "adversarial-max") return Distribution::kAdversarialMax;
  throw Error(ErrorCode::kParse, "unknown distribution '" + name + "'");
}

Tensor generate_tensor(const std::vector<std::size_t>& shape, const DistributionSpec& dist,
                       std::mt19937_64& engine) {
  if (shape.empty()) throw Error(ErrorCode::kInvalidArgument, "shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw Error(ErrorCode::kInvalidArgument, "shape dimensions must be positive");
  }
  Tensor t{std::vector<std::size_t>(shape)};
  auto data = t.data();
  switch (dist.kind) {
    case Distribution::kGaussian:
      for (std::size_t i = 0; i < data.size(); i += 2) {
        const double u1 = 1.0 - uniform01(engine);  // (0, 1]
        const double u2 = uniform01(engine);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        data[i] = static_cast<float>(dist.mean + dist.stddev * radius * std::cos(angle));
        if (i + 1 < data.size()) {
          data[i + 1] = static_cast<float>(dist.mean + dist.stddev * radius * std::sin(angle));
        }
      }
      break;
    case Distribution::kUniform: {
      if (!(dist.low < dist.high)) throw Error(ErrorCode::kInvalidArgument, "uniform needs low < high");
      const auto low = static_cast<float>(dist.low);
      const auto high = static_cast<float>(dist.high);
      for (double& x : data) {
        float s = static_cast<float>(dist.low + (dist.high - dist.low) * uniform01(engine));
        // Narrowing may round up onto the open upper bound.
        if (s >= high) s = std::nextafter(high, low);
        x = s;
      }
      break;
    }
    case Distribution::kAdversarialMax:
      for (double& x : data) x = static_cast<float>(dist.magnitude);
      break;
  }
  return t;
}

Tensor generate_tensor(const std::vector<std::size_t>& shape, const DistributionSpec& dist,
                       std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  return generate_tensor(shape, dist, engine);
}

std::string generation_metadata(const std::vector<std::size_t>& shape,
                                const DistributionSpec& dist, std::uint64_t seed) {
  Json j;
  j["format"] = "sagesim-tensor";
  j["version"] = 1;
  j["shape"] = shape;
  j["dtype"] = "float32";
  j["distribution"] = distribution_json(dist);
  j["seed"] = seed;
  j["generator"] = kGeneratorName;
  j["sampler"] = kSamplerName;
  return j.dump(2);
}

Inputs make_inputs(const InputSpec& spec) {
  std::mt19937_64 engine(spec.seed);
  const std::vector<std::size_t> shape{spec.heads, spec.seq_len, spec.head_dim};
  Inputs in;
  in.q = generate_tensor(shape, spec.dist, engine);
  in.k = generate_tensor(shape, spec.dist, engine);
  in.v = generate_tensor(shape, spec.dist, engine);
  return in;
}

ReportRow run_row(const Inputs& inputs, const attention::AttentionConfig& config,
                  Tensor* quantized_output) {
  const auto start = std::chrono::steady_clock::now();
  const Tensor reference = attention::attention_reference(inputs.q, inputs.k, inputs.v, config);
  const attention::RunReport run = attention::attention_quantized(inputs.q, inputs.k, inputs.v, config);
  const auto stop = std::chrono::steady_clock::now();

  ReportRow row;
  row.config = config;
  row.seq_len = inputs.q.rows();
  row.head_dim = inputs.q.cols();
  row.heads = inputs.q.num_matrices();
  row.metrics = metrics::compare(reference, run.output);
  row.overflow_events = run.overflow_events;
  row.conversions = run.fp16_to_fp32_conversions;
  row.mma_invocations = run.mma_invocations;
  row.scales = run.scales;
  row.wall_time = std::chrono::duration<double>(stop - start).count();
  if (quantized_output) *quantized_output = run.output;
  return row;
}

std::string row_to_json(const ReportRow& row, const std::string& input_json) {
  const auto& c = row.config;
  Json cfg;
  cfg["seq_len"] = row.seq_len;
  cfg["head_dim"] = row.head_dim;
  cfg["heads"] = row.heads;
  cfg["block_q"] = c.block_q;
  cfg["block_k"] = c.block_k;
  cfg["qk_bits"] = c.qk_bits;
  cfg["p_r"] = c.range.p_r();
  cfg["v_r"] = c.range.v_r();
  cfg["depth"] = c.range.depth();
  cfg["accumulator"] = accumulator_name(c.pv_accumulator);
  cfg["causal"] = c.causal;
  cfg["smoothing"] = c.smoothing;
  cfg["softmax_scale"] = c.softmax_scale.value_or(1.0 / std::sqrt(static_cast<double>(row.head_dim)));
  cfg["expect_overflow"] = c.expect_overflow;

  Json j;
  j["config"] = cfg;
  if (!input_json.empty()) j["input"] = Json::parse(input_json);
  if (row.seed) j["seed"] = *row.seed;
  j["cossim"] = row.metrics.cossim;
  j["l1"] = row.metrics.l1;
  j["rmse"] = row.metrics.rmse;
  j["overflow_events"] = row.overflow_events;
  j["conversions"] = row.conversions;
  j["mma_invocations"] = row.mma_invocations;
  j["scales"] = {{"min_delta_p", row.scales.min_delta_p},
                 {"max_delta_p", row.scales.max_delta_p},
                 {"min_delta_v", row.scales.min_delta_v},
                 {"max_delta_v", row.scales.max_delta_v}};
  j["wall_time"] = row.wall_time;
  return j.dump();
}

std::string csv_header() {
  return "p_r,v_r,depth,accumulator,qk_bits,seq_len,head_dim,heads,block_q,block_k,causal,"
         "smoothing,seed,repetition,expect_overflow,cossim,l1,rmse,overflow_events,conversions,"
         "mma_invocations,wall_time";
}

std::string row_to_csv(const ReportRow& row) {
  const auto& c = row.config;
  std::ostringstream out;
  out << format_real(c.range.p_r()) << ',' << format_real(c.range.v_r()) << ','
      << c.range.depth() << ',' << accumulator_name(c.pv_accumulator) << ',' << c.qk_bits << ','
      << row.seq_len << ',' << row.head_dim << ',' << row.heads << ',' << c.block_q << ','
      << c.block_k << ',' << (c.causal ? 1 : 0) << ',' << (c.smoothing ? 1 : 0) << ','
      << (row.seed ? std::to_string(*row.seed) : std::string()) << ',' << row.repetition << ','
      << (c.expect_overflow ? 1 : 0) << ',' << format_real(row.metrics.cossim) << ','
      << format_real(row.metrics.l1) << ',' << format_real(row.metrics.rmse) << ','
      << row.overflow_events << ',' << row.conversions << ',' << row.mma_invocations << ','
      << format_real(row.wall_time);
  return out.str();
}

std::vector<SweepEntry> table2_preset() {
  return {SweepEntry{448.0, 2.25, 2}, SweepEntry{224.0, 4.5, 2}, SweepEntry{112.0, 9.0, 2}};
}

SweepSpec parse_sweep_spec(const std::string& json_text) {
  SweepSpec spec;
  try {
    const Json j = Json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::kParse, "sweep spec must be a JSON object");
    if (j.contains("input")) {
      const Json& in = j["input"];
      spec.input.seed = in.value("seed", spec.input.seed);
      spec.input.seq_len = in.value("seq_len", spec.input.seq_len);
      spec.input.head_dim = in.value("head_dim", spec.input.head_dim);
      spec.input.heads = in.value("heads", spec.input.heads);
      auto& d = spec.input.dist;
      d.kind = parse_distribution(in.value("distribution", std::string("gaussian")));
      d.mean = in.value("mean", d.mean);
      d.stddev = in.value("stddev", d.stddev);
      d.low = in.value("low", d.low);
      d.high = in.value("high", d.high);
      d.magnitude = in.value("magnitude", d.magnitude);
    }
    if (j.contains("attention")) {
      const Json& a = j["attention"];
      auto& b = spec.base;
      b.block_q = a.value("block_q", b.block_q);
      b.block_k = a.value("block_k", b.block_k);
      b.qk_bits = a.value("qk_bits", b.qk_bits);
      b.causal = a.value("causal", b.causal);
      b.smoothing = a.value("smoothing", b.smoothing);
      if (a.contains("softmax_scale")) b.softmax_scale = a["softmax_scale"].get<double>();
    }
    spec.repetitions = j.value("repetitions", std::size_t{1});
    if (j.contains("preset")) {
      const auto name = j["preset"].get<std::string>();
      if (name != "table2") throw Error(ErrorCode::kParse, "unknown preset '" + name + "'");
      spec.entries = table2_preset();
    }
    if (j.contains("configs")) {
      for (const Json& c : j["configs"]) {
        SweepEntry e = parse_entry(c);
        if (e.accumulator == mma::Accumulator::kFp16 && !e.expect_overflow) {
          if (auto reason = quant::range_violation(e.p_r, e.v_r, e.depth)) {
            throw Error(ErrorCode::kRangeViolation, entry_label(e) + ": " + *reason);
          }
        }
        spec.entries.push_back(e);
      }
    }
    if (j.contains("grid")) {
      const Json& g = j["grid"];
      const int depth = g.value("depth", 2);
      const auto acc = parse_accumulator(g.value("accumulator", std::string("fp16")));
      const bool waive = g.value("expect_overflow", false);
      for (double p_r : g.value("p_r", std::vector<double>{})) {
        for (double v_r : g.value("v_r", std::vector<double>{})) {
          SweepEntry e{p_r, v_r, depth, acc, waive};
          auto reason = quant::range_violation(p_r, v_r, depth);
          if (reason && (acc == mma::Accumulator::kFp32 || waive)) {
            // Only the basic validity checks apply without the binary16 bound.
            try {
              (void)quant::RangeConfig::unchecked(p_r, v_r, depth);
              reason.reset();
            } catch (const Error& err) {
              reason = err.what();
            }
          }
          if (reason) {
            spec.rejected.push_back({e, *reason});
          } else {
            spec.entries.push_back(e);
          }
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("sweep spec: ") + e.what());
  }
  if (spec.repetitions == 0) throw Error(ErrorCode::kParse, "repetitions must be positive");
  return spec;
}

SweepResult run_sweep(const SweepSpec& spec) {
  SweepResult result;
  std::ostringstream csv;
  csv << csv_header() << '\n';
  std::vector<Inputs> inputs;
  if (!spec.entries.empty()) {
    for (std::size_t r = 0; r < spec.repetitions; ++r) {
      InputSpec in = spec.input;
      in.seed = spec.input.seed + r;
      inputs.push_back(make_inputs(in));
    }
  }
  for (const SweepEntry& e : spec.entries) {
    const attention::AttentionConfig config = config_for(spec.base, e);
    for (std::size_t r = 0; r < spec.repetitions; ++r) {
      ReportRow row = run_row(inputs[r], config);
      row.seed = spec.input.seed + r;
      row.repetition = r;
      if (row.overflow_events > 0 && !e.expect_overflow) result.unexpected_overflow = true;
      csv << row_to_csv(row) << '\n';
      result.rows.push_back(std::move(row));
    }
  }
  result.csv = csv.str();
  return result;
}

std::string codec_table_csv() {
  std::ostringstream out;
  out << "code,value\n";
  for (int c = 0; c < 256; ++c) {
    const numerics::Fp8E4M3 code{static_cast<std::uint8_t>(c)};
    char hex[8];
    std::snprintf(hex, sizeof(hex), "0x%02X", c);
    out << hex << ',' << format_real(numerics::e4m3_decode(code)) << '\n';
  }
  return out.str();
}

}  // namespace sagesim::harness
