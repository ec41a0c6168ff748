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

#include "sagesim/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parallel.hpp"
#include "sagesim/error.hpp"

namespace sagesim::attention {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Layout {
  std::size_t heads = 0;
  std::size_t q_rows = 0;
  std::size_t kv_rows = 0;
  std::size_t dim = 0;
  std::size_t v_cols = 0;
  std::vector<std::size_t> out_shape;
};

Layout check_shapes(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (q.rank() < 2 || q.rank() != k.rank() || q.rank() != v.rank()) {
    throw Error(ErrorCode::kShapeMismatch, "Q, K, V must share a rank of at least 2");
  }
  for (std::size_t i = 0; i + 2 < q.rank(); ++i) {
    if (q.dim(i) != k.dim(i) || q.dim(i) != v.dim(i)) {
      throw Error(ErrorCode::kShapeMismatch, "Q, K, V leading dimensions differ");
    }
  }
  if (q.cols() != k.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "Q and K head dimensions differ: " +
                                               std::to_string(q.cols()) + " vs " +
                                               std::to_string(k.cols()));
  }
  if (k.rows() != v.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "K and V token counts differ");
  }
  if (q.rows() == 0 || k.rows() == 0 || q.cols() == 0 || v.cols() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "attention inputs must be non-empty");
  }
  Layout l;
  l.heads = q.num_matrices();
  l.q_rows = q.rows();
  l.kv_rows = k.rows();
  l.dim = q.cols();
  l.v_cols = v.cols();
  l.out_shape = q.shape();
  l.out_shape.back() = l.v_cols;
  return l;
}

void check_blocks(const AttentionConfig& config) {
  if (config.block_q == 0 || config.block_k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "block sizes must be positive");
  }
}

double resolve_scale(const AttentionConfig& config, std::size_t dim) {
  return config.softmax_scale.value_or(1.0 / std::sqrt(static_cast<double>(dim)));
}

ConstMatrixView row_block(ConstMatrixView m, std::size_t begin, std::size_t count) {
  return {m.data.subspan(begin * m.cols, count * m.cols), count, m.cols};
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::size_t round_up_group(std::size_t n) { return ceil_div(n, mma::kGroupK) * mma::kGroupK; }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Key block j lies entirely above the diagonal of query rows [q0, q0 + rows).
bool fully_masked(const AttentionConfig& config, std::size_t q0, std::size_t rows,
                  std::size_t k0) {
  return config.causal && k0 > q0 + rows - 1;
}

// Query-side smoothing for one block: the smoothed rows plus the full
// precision compensation (q_mean . K[c]) * scale for every key c.
struct QueryBlock {
  Tensor smoothed;
  std::vector<double> compensation;
};

QueryBlock prepare_query_block(ConstMatrixView qi, ConstMatrixView keys, double scale,
                               bool smoothing) {
  QueryBlock out;
  if (!smoothing) {
    out.smoothed = to_tensor(qi);
    out.compensation.assign(keys.rows, 0.0);
    return out;
  }
  quant::SmoothedMatrix sq = quant::smooth_q(qi);
  out.smoothed = std::move(sq.values);
  out.compensation.resize(keys.rows);
  for (std::size_t c = 0; c < keys.rows; ++c) {
    out.compensation[c] = dot(sq.mean, keys.row(c)) * scale;
  }
  return out;
}

void accumulate_pv(MatrixView out, ConstMatrixView p, ConstMatrixView v) {
  for (std::size_t r = 0; r < p.rows; ++r) {
    for (std::size_t c = 0; c < p.cols; ++c) {
      const double w = p(r, c);
      if (w == 0.0) continue;
      const auto vrow = v.row(c);
      for (std::size_t d = 0; d < v.cols; ++d) out(r, d) += w * vrow[d];
    }
  }
}

void write_rows(MatrixView dst, std::size_t begin, const Tensor& rows) {
  std::copy(rows.data().begin(), rows.data().end(), dst.data.begin() + begin * dst.cols);
}

}  // namespace

SoftmaxState make_softmax_state(std::size_t rows, std::size_t dim) {
  return {std::vector<double>(rows, kNegInf), std::vector<double>(rows, 0.0),
          Tensor::matrix(rows, dim)};
}

Tensor online_softmax_update(SoftmaxState& state, ConstMatrixView scores) {
  if (scores.rows != state.running_max.size()) {
    throw Error(ErrorCode::kShapeMismatch, "score block rows do not match softmax state");
  }
  Tensor p = Tensor::matrix(scores.rows, scores.cols);
  const std::size_t dim = state.output.cols();
  for (std::size_t r = 0; r < scores.rows; ++r) {
    const auto srow = scores.row(r);
    const double block_max = *std::max_element(srow.begin(), srow.end());
    const double m_old = state.running_max[r];
    const double m_new = std::max(m_old, block_max);
    if (m_new == kNegInf) continue;
    const double alpha = m_old == kNegInf ? 0.0 : std::exp(m_old - m_new);
    double row_sum = 0.0;
    for (std::size_t c = 0; c < scores.cols; ++c) {
      const double e = std::exp(srow[c] - m_new);
      p(r, c) = e;
      row_sum += e;
    }
    state.running_max[r] = m_new;
    state.running_sum[r] = state.running_sum[r] * alpha + row_sum;
    if (alpha != 1.0) {
      for (std::size_t d = 0; d < dim; ++d) state.output(r, d) *= alpha;
    }
  }
  return p;
}

Tensor finalize(const SoftmaxState& state) {
  Tensor out = state.output;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const double l = state.running_sum[r];
    for (std::size_t d = 0; d < out.cols(); ++d) out(r, d) = l > 0.0 ? out(r, d) / l : 0.0;
  }
  return out;
}

void apply_causal_mask(MatrixView scores, std::size_t query_offset, std::size_t key_offset) {
  for (std::size_t r = 0; r < scores.rows; ++r) {
    for (std::size_t c = 0; c < scores.cols; ++c) {
      if (key_offset + c > query_offset + r) scores(r, c) = kNegInf;
    }
  }
}

Tensor attention_reference(const Tensor& q, const Tensor& k, const Tensor& v,
                           const AttentionConfig& config) {
  const Layout l = check_shapes(q, k, v);
  check_blocks(config);
  const double scale = resolve_scale(config, l.dim);
  const std::size_t bq = std::min(config.block_q, l.q_rows);
  const std::size_t bk = std::min(config.block_k, l.kv_rows);
  const std::size_t q_blocks = ceil_div(l.q_rows, bq);
  const std::size_t k_blocks = ceil_div(l.kv_rows, bk);

  std::vector<Tensor> smoothed_keys(l.heads);
  for (std::size_t h = 0; h < l.heads; ++h) {
    smoothed_keys[h] = config.smoothing ? quant::smooth_k(k.matrix_view(h)).values
                                        : to_tensor(k.matrix_view(h));
  }

  Tensor out(l.out_shape);
  detail::parallel_for(l.heads * q_blocks, [&](std::size_t task) {
    const std::size_t h = task / q_blocks;
    const std::size_t q0 = (task % q_blocks) * bq;
    const std::size_t rows = std::min(bq, l.q_rows - q0);
    const ConstMatrixView keys = smoothed_keys[h].view();
    const ConstMatrixView values = v.matrix_view(h);
    const QueryBlock qb =
        prepare_query_block(row_block(q.matrix_view(h), q0, rows), keys, scale, config.smoothing);

    SoftmaxState state = make_softmax_state(rows, l.v_cols);
    for (std::size_t j = 0; j < k_blocks; ++j) {
      const std::size_t k0 = j * bk;
      const std::size_t cols = std::min(bk, l.kv_rows - k0);
      if (fully_masked(config, q0, rows, k0)) continue;
      Tensor s = Tensor::matrix(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          s(r, c) = dot(qb.smoothed.view().row(r), keys.row(k0 + c)) * scale +
                    qb.compensation[k0 + c];
        }
      }
      if (config.causal) apply_causal_mask(s.view(), q0, k0);
      const Tensor p = online_softmax_update(state, s.view());
      accumulate_pv(state.output.view(), p.view(), row_block(values, k0, cols));
    }
    write_rows(out.matrix_view(h), q0, finalize(state));
  });
  return out;
}

namespace {

struct KeyBlockCodes {
  quant::IntQuantBlock keys;                // scale only; codes live in keys_t
  CodeMatrix<std::int8_t> keys_t;           // dim x tokens
  quant::Fp8ChannelQuantBlock values;       // rows padded to a multiple of 32
};

KeyBlockCodes quantize_key_block(ConstMatrixView keys, ConstMatrixView values,
                                 const AttentionConfig& config) {
  KeyBlockCodes out;
  out.keys = quant::quantize_int_block(keys, config.qk_bits);
  out.keys_t = CodeMatrix<std::int8_t>(keys.cols, keys.rows);
  for (std::size_t r = 0; r < keys.rows; ++r) {
    for (std::size_t c = 0; c < keys.cols; ++c) out.keys_t(c, r) = out.keys.codes(r, c);
  }
  quant::Fp8ChannelQuantBlock vq = quant::quantize_v_per_channel(values, config.range.v_r());
  // Zero codes in the padding rows contribute exact zeros to every product.
  out.values.scales = std::move(vq.scales);
  out.values.codes = CodeMatrix<numerics::Fp8E4M3>(round_up_group(values.rows), values.cols);
  std::copy(vq.codes.codes.begin(), vq.codes.codes.end(), out.values.codes.codes.begin());
  return out;
}

struct TaskResult {
  mma::MmaCounters counters;
  double min_delta_p = std::numeric_limits<double>::infinity();
  double max_delta_p = 0.0;
};

}  // namespace

RunReport attention_quantized(const Tensor& q, const Tensor& k, const Tensor& v,
                              const AttentionConfig& config) {
  const Layout l = check_shapes(q, k, v);
  check_blocks(config);
  if (config.qk_bits != 4 && config.qk_bits != 8) {
    throw Error(ErrorCode::kInvalidArgument, "qk_bits must be 4 or 8");
  }
  if (config.pv_accumulator == mma::Accumulator::kFp16 && !config.expect_overflow) {
    const auto& r = config.range;
    if (auto reason = quant::range_violation(r.p_r(), r.v_r(), r.depth())) {
      throw Error(ErrorCode::kRangeViolation, *reason);
    }
  }
  const double scale = resolve_scale(config, l.dim);
  const std::size_t bq = std::min(config.block_q, l.q_rows);
  const std::size_t bk = std::min(config.block_k, l.kv_rows);
  const std::size_t q_blocks = ceil_div(l.q_rows, bq);
  const std::size_t k_blocks = ceil_div(l.kv_rows, bk);

  std::vector<Tensor> smoothed_keys(l.heads);
  std::vector<std::vector<KeyBlockCodes>> key_codes(l.heads);
  detail::parallel_for(l.heads, [&](std::size_t h) {
    smoothed_keys[h] = config.smoothing ? quant::smooth_k(k.matrix_view(h)).values
                                        : to_tensor(k.matrix_view(h));
    const ConstMatrixView keys = smoothed_keys[h].view();
    const ConstMatrixView values = v.matrix_view(h);
    key_codes[h].reserve(k_blocks);
    for (std::size_t j = 0; j < k_blocks; ++j) {
      const std::size_t k0 = j * bk;
      const std::size_t cols = std::min(bk, l.kv_rows - k0);
      key_codes[h].push_back(
          quantize_key_block(row_block(keys, k0, cols), row_block(values, k0, cols), config));
    }
  });

  RunReport report;
  report.output = Tensor(l.out_shape);
  std::vector<TaskResult> results(l.heads * q_blocks);
  detail::parallel_for(l.heads * q_blocks, [&](std::size_t task) {
    const std::size_t h = task / q_blocks;
    const std::size_t q0 = (task % q_blocks) * bq;
    const std::size_t rows = std::min(bq, l.q_rows - q0);
    TaskResult& result = results[task];
    const QueryBlock qb = prepare_query_block(row_block(q.matrix_view(h), q0, rows),
                                              smoothed_keys[h].view(), scale, config.smoothing);
    const quant::IntQuantBlock qq = quant::quantize_int_block(qb.smoothed, config.qk_bits);

    SoftmaxState state = make_softmax_state(rows, l.v_cols);
    for (std::size_t j = 0; j < k_blocks; ++j) {
      const std::size_t k0 = j * bk;
      const std::size_t cols = std::min(bk, l.kv_rows - k0);
      if (fully_masked(config, q0, rows, k0)) continue;
      const KeyBlockCodes& kb = key_codes[h][j];

      Tensor s = mma::gemm_emulated(qq.codes, kb.keys_t).values;
      const double s_scale = qq.scale * kb.keys.scale * scale;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          s(r, c) = s(r, c) * s_scale + qb.compensation[k0 + c];
        }
      }
      if (config.causal) apply_causal_mask(s.view(), q0, k0);
      const Tensor p = online_softmax_update(state, s.view());

      const quant::Fp8QuantBlock pq = quant::quantize_p_block(p, config.range.p_r());
      result.min_delta_p = std::min(result.min_delta_p, pq.scale);
      result.max_delta_p = std::max(result.max_delta_p, pq.scale);
      CodeMatrix<numerics::Fp8E4M3> p_codes(rows, kb.values.codes.rows);
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(pq.codes.codes.begin() + r * cols, cols, p_codes.codes.begin() + r * p_codes.cols);
      }
      const mma::GemmResult pv = mma::gemm_emulated(p_codes, kb.values.codes, config.pv_accumulator,
                                                    config.range.depth());
      result.counters.merge(pv.counters);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t d = 0; d < l.v_cols; ++d) {
          state.output(r, d) += pv.values(r, d) * pq.scale * kb.values.scales[d];
        }
      }
    }
    write_rows(report.output.matrix_view(h), q0, finalize(state));
  });

  mma::MmaCounters total;
  ScaleStats& stats = report.scales;
  stats.min_delta_p = std::numeric_limits<double>::infinity();
  for (const TaskResult& r : results) {
    total.merge(r.counters);
    stats.min_delta_p = std::min(stats.min_delta_p, r.min_delta_p);
    stats.max_delta_p = std::max(stats.max_delta_p, r.max_delta_p);
  }
  if (stats.min_delta_p > stats.max_delta_p) stats.min_delta_p = stats.max_delta_p;
  stats.min_delta_v = std::numeric_limits<double>::infinity();
  for (const auto& head : key_codes) {
    for (const KeyBlockCodes& kb : head) {
      for (double s : kb.values.scales) {
        stats.min_delta_v = std::min(stats.min_delta_v, s);
        stats.max_delta_v = std::max(stats.max_delta_v, s);
      }
    }
  }
  report.overflow_events = total.overflow.count;
  report.fp16_to_fp32_conversions = total.fp16_to_fp32_conversions;
  report.mma_invocations = total.mma_invocations;
  return report;
}

}  // namespace sagesim::attention
