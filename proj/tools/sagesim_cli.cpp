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

// sagesim-cli: batch front end over the sagesim C API.
//
//   sagesim-cli gen --shape 2,256,128 --dist gaussian --seed 42 --out q.bin
//   sagesim-cli run --seed 7 [--p-r 224 --v-r 4.5 --depth 2 ...]
//   sagesim-cli sweep --preset table2 --seed 7 --out table2.csv
//   sagesim-cli codec-table --out e4m3.csv

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sagesim/sagesim.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitError = 1;
constexpr int kExitUnexpectedOverflow = 3;

struct InputFlags {
  std::uint64_t seed = 0;
  std::uint64_t seq_len = 256;
  std::uint64_t head_dim = 128;
  std::uint64_t heads = 2;
  std::string dist = "gaussian";
  double mean = 0.0;
  double stddev = 1.0;
  double low = 0.0;
  double high = 1.0;
  double magnitude = 1.0;
};

struct AttentionFlags {
  std::uint64_t block_q = 128;
  std::uint64_t block_k = 64;
  int qk_bits = 8;
  double p_r = 224.0;
  double v_r = 4.5;
  int depth = 2;
  std::string accumulator = "fp16";
  bool causal = false;
  bool no_smoothing = false;
  double softmax_scale = 0.0;
  bool expect_overflow = false;
};

const std::map<std::string, int> kDistributions{
    {"gaussian", SAGESIM_DIST_GAUSSIAN},
    {"uniform", SAGESIM_DIST_UNIFORM},
    {"adversarial-max", SAGESIM_DIST_ADVERSARIAL_MAX}};

void add_distribution_flags(CLI::App* cmd, InputFlags& f) {
  cmd->add_option("--dist", f.dist, "gaussian | uniform | adversarial-max")
      ->check(CLI::IsMember({"gaussian", "uniform", "adversarial-max"}));
  cmd->add_option("--mean", f.mean, "gaussian mean");
  cmd->add_option("--std", f.stddev, "gaussian standard deviation");
  cmd->add_option("--low", f.low, "uniform lower bound (inclusive)");
  cmd->add_option("--high", f.high, "uniform upper bound (exclusive)");
  cmd->add_option("--magnitude", f.magnitude, "adversarial-max fill value");
}

void add_input_flags(CLI::App* cmd, InputFlags& f) {
  cmd->add_option("--seed", f.seed, "seed for generated Q, K, V");
  cmd->add_option("--seq-len", f.seq_len, "tokens per head")->check(CLI::PositiveNumber);
  cmd->add_option("--head-dim", f.head_dim, "channels per head")->check(CLI::PositiveNumber);
  cmd->add_option("--heads", f.heads, "number of heads")->check(CLI::PositiveNumber);
  add_distribution_flags(cmd, f);
}

void add_tiling_flags(CLI::App* cmd, AttentionFlags& f) {
  cmd->add_option("--block-q", f.block_q, "query tile size")->check(CLI::PositiveNumber);
  cmd->add_option("--block-k", f.block_k, "key tile size")->check(CLI::PositiveNumber);
  cmd->add_option("--qk-bits", f.qk_bits, "Q/K integer width")->check(CLI::IsMember({4, 8}));
  cmd->add_flag("--causal", f.causal, "apply a causal mask");
  cmd->add_flag("--no-smoothing", f.no_smoothing, "disable Q/K smoothing");
  cmd->add_option("--softmax-scale", f.softmax_scale, "score scale (default 1/sqrt(head_dim))");
}

void add_range_flags(CLI::App* cmd, AttentionFlags& f) {
  cmd->add_option("--p-r", f.p_r, "quantization range of P~");
  cmd->add_option("--v-r", f.v_r, "quantization range of V");
  cmd->add_option("--depth", f.depth, "FP16 instructions per FP32 conversion")
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--accumulator", f.accumulator, "PV accumulator: fp16 | fp32")
      ->check(CLI::IsMember({"fp16", "fp32"}));
  cmd->add_flag("--expect-overflow", f.expect_overflow,
                "allow ranges beyond the FP16 accumulator bound");
}

sagesim_distribution to_distribution(const InputFlags& f) {
  sagesim_distribution d;
  sagesim_distribution_init(&d);
  d.kind = kDistributions.at(f.dist);
  d.mean = f.mean;
  d.stddev = f.stddev;
  d.low = f.low;
  d.high = f.high;
  d.magnitude = f.magnitude;
  return d;
}

Json distribution_json(const InputFlags& f) {
  Json j;
  j["distribution"] = f.dist;
  if (f.dist == "gaussian") {
    j["mean"] = f.mean;
    j["stddev"] = f.stddev;
  } else if (f.dist == "uniform") {
    j["low"] = f.low;
    j["high"] = f.high;
  } else {
    j["magnitude"] = f.magnitude;
  }
  return j;
}

std::vector<std::uint64_t> parse_shape(const std::string& text) {
  std::vector<std::uint64_t> shape;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const unsigned long long d = std::stoull(item, &used);
    if (used != item.size() || d == 0) throw std::invalid_argument("bad dimension '" + item + "'");
    shape.push_back(d);
  }
  if (shape.empty()) throw std::invalid_argument("empty shape");
  return shape;
}

int report_failure(sagesim_status status) {
  std::cerr << "error: " << sagesim_status_name(status) << ": " << sagesim_last_error() << '\n';
  return kExitError;
}

bool write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream f(path, std::ios::trunc);
  f << text;
  if (!f) {
    std::cerr << "error: cannot write " << path << '\n';
    return false;
  }
  return true;
}

class TensorHandle {
 public:
  TensorHandle() = default;
  TensorHandle(const TensorHandle&) = delete;
  TensorHandle& operator=(const TensorHandle&) = delete;
  ~TensorHandle() { sagesim_tensor_destroy(ptr_); }

  sagesim_tensor** out() { return &ptr_; }
  const sagesim_tensor* get() const { return ptr_; }

 private:
  sagesim_tensor* ptr_ = nullptr;
};

int cmd_gen(const std::string& shape_text, const InputFlags& input, const std::string& out) {
  std::vector<std::uint64_t> shape;
  try {
    shape = parse_shape(shape_text);
  } catch (const std::exception& e) {
    std::cerr << "error: invalid --shape: " << e.what() << '\n';
    return kExitError;
  }
  const sagesim_distribution dist = to_distribution(input);
  const sagesim_status st = sagesim_generate_file(shape.data(), shape.size(), &dist, input.seed,
                                                  out.c_str());
  return st == SAGESIM_OK ? 0 : report_failure(st);
}

sagesim_attention_config to_config(const AttentionFlags& f) {
  sagesim_attention_config c;
  sagesim_attention_config_init(&c);
  c.block_q = f.block_q;
  c.block_k = f.block_k;
  c.qk_bits = f.qk_bits;
  c.p_r = f.p_r;
  c.v_r = f.v_r;
  c.buffering_depth = f.depth;
  c.accumulator = f.accumulator == "fp32" ? SAGESIM_ACC_FP32 : SAGESIM_ACC_FP16;
  c.causal = f.causal ? 1 : 0;
  c.smoothing = f.no_smoothing ? 0 : 1;
  c.softmax_scale = f.softmax_scale;
  c.expect_overflow = f.expect_overflow ? 1 : 0;
  return c;
}

int cmd_run(const std::vector<std::string>& files, const InputFlags& input,
            const AttentionFlags& attn, const std::string& out) {
  TensorHandle q, k, v;
  Json input_echo;
  sagesim_status st = SAGESIM_OK;
  if (!files.empty()) {
    st = sagesim_tensor_load(files[0].c_str(), q.out());
    if (st == SAGESIM_OK) st = sagesim_tensor_load(files[1].c_str(), k.out());
    if (st == SAGESIM_OK) st = sagesim_tensor_load(files[2].c_str(), v.out());
    input_echo = {{"q", files[0]}, {"k", files[1]}, {"v", files[2]}};
  } else {
    const sagesim_distribution dist = to_distribution(input);
    st = sagesim_inputs_generate(input.seed, input.seq_len, input.head_dim, input.heads, &dist,
                                 q.out(), k.out(), v.out());
    input_echo = distribution_json(input);
    input_echo["seed"] = input.seed;
  }
  if (st != SAGESIM_OK) return report_failure(st);

  const sagesim_attention_config config = to_config(attn);
  sagesim_report* report = nullptr;
  st = sagesim_run(&config, q.get(), k.get(), v.get(), input_echo.dump().c_str(), &report);
  if (st != SAGESIM_OK) return report_failure(st);
  const std::string json = std::string(sagesim_report_json(report)) + "\n";
  const std::uint64_t overflows = sagesim_report_overflow_events(report);
  sagesim_report_destroy(report);
  if (!write_text(out, json)) return kExitError;
  if (overflows > 0 && !attn.expect_overflow) {
    std::cerr << "error: " << overflows << " unexpected FP16 accumulator overflow events\n";
    return kExitUnexpectedOverflow;
  }
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& preset, const InputFlags& input,
              const AttentionFlags& attn, std::size_t repetitions, const std::string& out) {
  std::string spec_text;
  if (!spec_path.empty()) {
    std::ifstream f(spec_path);
    if (!f) {
      std::cerr << "error: cannot open " << spec_path << '\n';
      return kExitError;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    spec_text = ss.str();
  } else {
    Json spec;
    Json in = distribution_json(input);
    in["seed"] = input.seed;
    in["seq_len"] = input.seq_len;
    in["head_dim"] = input.head_dim;
    in["heads"] = input.heads;
    spec["input"] = in;
    Json a = {{"block_q", attn.block_q}, {"block_k", attn.block_k}, {"qk_bits", attn.qk_bits},
              {"causal", attn.causal},   {"smoothing", !attn.no_smoothing}};
    if (attn.softmax_scale > 0.0) a["softmax_scale"] = attn.softmax_scale;
    spec["attention"] = a;
    spec["preset"] = preset;
    spec["repetitions"] = repetitions;
    spec_text = spec.dump();
  }

  sagesim_sweep_result* result = nullptr;
  const sagesim_status st = sagesim_sweep(spec_text.c_str(), &result);
  if (st != SAGESIM_OK) return report_failure(st);
  for (std::size_t i = 0; i < sagesim_sweep_rejected_count(result); ++i) {
    std::cerr << "rejected " << sagesim_sweep_rejected(result, i) << '\n';
  }
  const bool ok = write_text(out, sagesim_sweep_csv(result));
  const bool overflow = sagesim_sweep_unexpected_overflow(result) != 0;
  sagesim_sweep_destroy(result);
  if (!ok) return kExitError;
  if (overflow) {
    std::cerr << "error: unexpected FP16 accumulator overflow in sweep\n";
    return kExitUnexpectedOverflow;
  }
  return 0;
}

int cmd_codec_table(const std::string& out) {
  std::size_t length = 0;
  sagesim_status st = sagesim_codec_table_csv(nullptr, 0, &length);
  if (st != SAGESIM_OK) return report_failure(st);
  std::string csv(length + 1, '\0');
  st = sagesim_codec_table_csv(csv.data(), csv.size(), &length);
  if (st != SAGESIM_OK) return report_failure(st);
  csv.resize(length);
  return write_text(out, csv) ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Software simulator of FP8/FP16 quantized attention"};
  app.require_subcommand(1);

  InputFlags gen_input;
  std::string gen_shape, gen_out;
  auto* gen = app.add_subcommand("gen", "generate a deterministic tensor file");
  gen->add_option("--shape", gen_shape, "comma-separated dimensions, e.g. 2,256,128")->required();
  gen->add_option("--seed", gen_input.seed, "generator seed");
  add_distribution_flags(gen, gen_input);
  gen->add_option("--out", gen_out, "output tensor path")->required();

  InputFlags run_input;
  AttentionFlags run_attn;
  std::vector<std::string> run_files;
  std::string run_out;
  auto* run = app.add_subcommand("run", "compare quantized against full-precision attention");
  run->add_option("--qkv", run_files, "Q, K and V tensor files")->expected(3);
  add_input_flags(run, run_input);
  add_tiling_flags(run, run_attn);
  add_range_flags(run, run_attn);
  run->add_option("--out", run_out, "write the JSON report here instead of stdout");

  InputFlags sweep_input;
  AttentionFlags sweep_attn;
  std::string sweep_spec, sweep_preset, sweep_out;
  std::size_t sweep_reps = 1;
  auto* sweep = app.add_subcommand("sweep", "run a (p_r, v_r) sweep and write CSV");
  auto* spec_opt = sweep->add_option("--spec", sweep_spec, "JSON sweep description");
  auto* preset_opt = sweep->add_option("--preset", sweep_preset, "built-in sweep")
                         ->check(CLI::IsMember({"table2"}));
  spec_opt->excludes(preset_opt);
  add_input_flags(sweep, sweep_input);
  add_tiling_flags(sweep, sweep_attn);
  sweep->add_option("--repetitions", sweep_reps, "repetitions per configuration")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "output CSV (default stdout)");

  std::string codec_out;
  auto* codec = app.add_subcommand("codec-table", "dump all 256 E4M3 codes as CSV");
  codec->add_option("--out", codec_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) return cmd_gen(gen_shape, gen_input, gen_out);
  if (run->parsed()) return cmd_run(run_files, run_input, run_attn, run_out);
  if (sweep->parsed()) {
    if (sweep_spec.empty() && sweep_preset.empty()) {
      std::cerr << "error: sweep needs --spec or --preset\n";
      return kExitError;
    }
    return cmd_sweep(sweep_spec, sweep_preset, sweep_input, sweep_attn, sweep_reps, sweep_out);
  }
  return cmd_codec_table(codec_out);
}
