// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "medvlm/util/error.hpp"

namespace medvlm::nn {

void RopeConfig::validate() const {
  if (head_dim <= 0 || head_dim % 2 != 0) {
    throw ConfigError("rope head_dim must be a positive even integer, got " + std::to_string(head_dim));
  }
  if (!(theta_base > 0.0)) throw ConfigError("rope theta_base must be positive");
  if (original_context <= 0) throw ConfigError("rope original_context must be positive");
  if (!(scale_factor >= 1.0)) throw ConfigError("rope scale_factor must be >= 1");
  if (!(beta_slow > 0.0) || !(beta_fast > beta_slow)) {
    throw ConfigError("rope betas must satisfy beta_fast > beta_slow > 0");
  }
}

std::int64_t RopeConfig::extended_context() const {
  return static_cast<std::int64_t>(std::llround(static_cast<double>(original_context) * scale_factor));
}

std::vector<double> rope_frequencies(const RopeConfig& cfg) {
  cfg.validate();
  const std::int64_t half = cfg.head_dim / 2;
  std::vector<double> inv(static_cast<std::size_t>(half));
  for (std::int64_t i = 0; i < half; ++i) {
    inv[static_cast<std::size_t>(i)] =
        std::pow(cfg.theta_base, -2.0 * static_cast<double>(i) / static_cast<double>(cfg.head_dim));
  }
  return inv;
}

namespace {

// Pair index at which a band completes `rotations` turns over the original context.
double correction_index(double rotations, const RopeConfig& cfg) {
  const double ctx = static_cast<double>(cfg.original_context);
  return static_cast<double>(cfg.head_dim) * std::log(ctx / (rotations * 2.0 * std::numbers::pi)) /
         (2.0 * std::log(cfg.theta_base));
}

}  // namespace

YarnScaling yarn_scale(const RopeConfig& cfg) {
  YarnScaling out;
  out.inv_freq = rope_frequencies(cfg);
  if (cfg.scale_factor == 1.0) {
    out.attention_temperature = 1.0;
    return out;
  }
  const double s = cfg.scale_factor;
  double low = std::floor(correction_index(cfg.beta_fast, cfg));
  double high = std::ceil(correction_index(cfg.beta_slow, cfg));
  low = std::max(low, 0.0);
  high = std::min(high, static_cast<double>(cfg.head_dim - 1));
  if (low == high) high += 0.001;
  for (std::size_t i = 0; i < out.inv_freq.size(); ++i) {
    const double ramp = std::clamp((static_cast<double>(i) - low) / (high - low), 0.0, 1.0);
    const double keep = 1.0 - ramp;  // weight of the unscaled frequency
    const double extrapolated = out.inv_freq[i];
    const double interpolated = extrapolated / s;
    out.inv_freq[i] = interpolated * (1.0 - keep) + extrapolated * keep;
  }
  out.attention_temperature = 0.1 * std::log(s) + 1.0;
  return out;
}

namespace {

void check_rope_shapes(const Tensor& x, std::span<const std::int64_t> positions,
                       std::span<const double> inv_freq) {
  if (x.rank() != 3) throw ShapeError("apply_rope expects [seq, heads, head_dim], got " + shape_str(x.shape()));
  if (x.dim(2) != 2 * static_cast<std::int64_t>(inv_freq.size())) {
    throw ShapeError("apply_rope: head_dim " + std::to_string(x.dim(2)) + " != 2 * " +
                     std::to_string(inv_freq.size()));
  }
  if (static_cast<std::int64_t>(positions.size()) != x.dim(0)) {
    throw ShapeError("apply_rope: " + std::to_string(positions.size()) + " positions for seq " +
                     std::to_string(x.dim(0)));
  }
  for (auto p : positions) {
    if (p < 0) throw ShapeError("apply_rope: negative position");
  }
}

Tensor rotate(const Tensor& x, std::span<const std::int64_t> positions, std::span<const double> inv_freq,
              double sign) {
  check_rope_shapes(x, positions, inv_freq);
  Tensor out = x;
  const std::int64_t seq = x.dim(0), heads = x.dim(1), hd = x.dim(2);
  const std::size_t half = inv_freq.size();
  std::vector<double> cs(half), sn(half);
  for (std::int64_t t = 0; t < seq; ++t) {
    for (std::size_t i = 0; i < half; ++i) {
      const double angle = static_cast<double>(positions[static_cast<std::size_t>(t)]) * inv_freq[i];
      cs[i] = std::cos(angle);
      sn[i] = sign * std::sin(angle);
    }
    for (std::int64_t h = 0; h < heads; ++h) {
      const std::size_t base = static_cast<std::size_t>((t * heads + h) * hd);
      for (std::size_t i = 0; i < half; ++i) {
        const double a = x[base + 2 * i], b = x[base + 2 * i + 1];
        out[base + 2 * i] = a * cs[i] - b * sn[i];
        out[base + 2 * i + 1] = a * sn[i] + b * cs[i];
      }
    }
  }
  return out;
}

}  // namespace

Tensor apply_rope(const Tensor& x, std::span<const std::int64_t> positions, std::span<const double> inv_freq) {
  return rotate(x, positions, inv_freq, 1.0);
}

Tensor apply_rope_backward(const Tensor& grad_out, std::span<const std::int64_t> positions,
                           std::span<const double> inv_freq) {
  return rotate(grad_out, positions, inv_freq, -1.0);
}

AttentionResult attention(const Tensor& q, const Tensor& k, const Tensor& v, bool causal, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("attention temperature must be positive");
  if (q.rank() != 3) throw ShapeError("attention expects [seq, heads, head_dim], got " + shape_str(q.shape()));
  require_same_shape(q, k, "attention q/k");
  require_same_shape(q, v, "attention q/v");
  const std::int64_t seq = q.dim(0), heads = q.dim(1), hd = q.dim(2);
  const double scale = temperature / std::sqrt(static_cast<double>(hd));
  AttentionResult res{Tensor(q.shape()), Tensor({heads, seq, seq})};
  std::vector<double> row(static_cast<std::size_t>(seq));
  for (std::int64_t h = 0; h < heads; ++h) {
    for (std::int64_t i = 0; i < seq; ++i) {
      const std::int64_t last = causal ? i : seq - 1;
      const double* qi = q.data() + (i * heads + h) * hd;
      double mx = -INFINITY;
      for (std::int64_t j = 0; j <= last; ++j) {
        const double* kj = k.data() + (j * heads + h) * hd;
        double dot = 0.0;
        for (std::int64_t d = 0; d < hd; ++d) dot += qi[d] * kj[d];
        row[static_cast<std::size_t>(j)] = dot * scale;
        mx = std::max(mx, row[static_cast<std::size_t>(j)]);
      }
      double sum = 0.0;
      for (std::int64_t j = 0; j <= last; ++j) {
        auto& r = row[static_cast<std::size_t>(j)];
        r = std::exp(r - mx);
        sum += r;
      }
      double* p = res.probs.data() + (h * seq + i) * seq;
      double* oi = res.output.data() + (i * heads + h) * hd;
      for (std::int64_t j = 0; j <= last; ++j) {
        const double pj = row[static_cast<std::size_t>(j)] / sum;
        p[j] = pj;
        const double* vj = v.data() + (j * heads + h) * hd;
        for (std::int64_t d = 0; d < hd; ++d) oi[d] += pj * vj[d];
      }
    }
  }
  return res;
}

AttentionGrads attention_backward(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& probs,
                                  const Tensor& grad_out, double temperature) {
  require_same_shape(q, grad_out, "attention_backward grad");
  const std::int64_t seq = q.dim(0), heads = q.dim(1), hd = q.dim(2);
  const double scale = temperature / std::sqrt(static_cast<double>(hd));
  AttentionGrads g{Tensor(q.shape()), Tensor(k.shape()), Tensor(v.shape())};
  std::vector<double> dp(static_cast<std::size_t>(seq));
  for (std::int64_t h = 0; h < heads; ++h) {
    for (std::int64_t i = 0; i < seq; ++i) {
      const double* p = probs.data() + (h * seq + i) * seq;
      const double* go = grad_out.data() + (i * heads + h) * hd;
      double weighted = 0.0;
      for (std::int64_t j = 0; j < seq; ++j) {
        if (p[j] == 0.0) {
          dp[static_cast<std::size_t>(j)] = 0.0;
          continue;
        }
        const double* vj = v.data() + (j * heads + h) * hd;
        double* dvj = g.dv.data() + (j * heads + h) * hd;
        double dot = 0.0;
        for (std::int64_t d = 0; d < hd; ++d) {
          dot += go[d] * vj[d];
          dvj[d] += p[j] * go[d];
        }
        dp[static_cast<std::size_t>(j)] = dot;
        weighted += p[j] * dot;
      }
      const double* qi = q.data() + (i * heads + h) * hd;
      double* dqi = g.dq.data() + (i * heads + h) * hd;
      for (std::int64_t j = 0; j < seq; ++j) {
        if (p[j] == 0.0) continue;
        const double ds = p[j] * (dp[static_cast<std::size_t>(j)] - weighted) * scale;
        const double* kj = k.data() + (j * heads + h) * hd;
        double* dkj = g.dk.data() + (j * heads + h) * hd;
        for (std::int64_t d = 0; d < hd; ++d) {
          dqi[d] += ds * kj[d];
          dkj[d] += ds * qi[d];
        }
      }
    }
  }
  return g;
}

std::int64_t count_targets(std::span<const std::int64_t> targets, std::int64_t ignore_index) {
  return static_cast<std::int64_t>(
      std::count_if(targets.begin(), targets.end(), [&](auto t) { return t != ignore_index; }));
}

namespace {

void check_ce(const Tensor& logits, std::span<const std::int64_t> targets, std::int64_t ignore_index) {
  if (logits.rank() != 2) throw ShapeError("cross_entropy expects [seq, vocab] logits");
  if (static_cast<std::int64_t>(targets.size()) != logits.dim(0)) {
    throw ShapeError("cross_entropy: target count does not match logits rows");
  }
  for (auto t : targets) {
    if (t != ignore_index && (t < 0 || t >= logits.dim(1))) {
      throw ValidationError("cross_entropy: target " + std::to_string(t) + " outside vocabulary");
    }
  }
  if (count_targets(targets, ignore_index) == 0) {
    throw ValidationError("cross_entropy: every position is ignored");
  }
}

double log_sum_exp(const double* row, std::int64_t n) {
  double mx = row[0];
  for (std::int64_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
  double s = 0.0;
  for (std::int64_t j = 0; j < n; ++j) s += std::exp(row[j] - mx);
  return mx + std::log(s);
}

}  // namespace

double cross_entropy(const Tensor& logits, std::span<const std::int64_t> targets, std::int64_t ignore_index) {
  check_ce(logits, targets, ignore_index);
  const std::int64_t vocab = logits.dim(1);
  double total = 0.0;
  std::int64_t n = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] == ignore_index) continue;
    const double* row = logits.data() + static_cast<std::int64_t>(t) * vocab;
    total += log_sum_exp(row, vocab) - row[targets[t]];
    ++n;
  }
  return total / static_cast<double>(n);
}

Tensor cross_entropy_backward(const Tensor& logits, std::span<const std::int64_t> targets,
                              std::int64_t ignore_index) {
  check_ce(logits, targets, ignore_index);
  const std::int64_t vocab = logits.dim(1);
  const double inv_n = 1.0 / static_cast<double>(count_targets(targets, ignore_index));
  Tensor grad(logits.shape());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] == ignore_index) continue;
    const double* row = logits.data() + static_cast<std::int64_t>(t) * vocab;
    double* g = grad.data() + static_cast<std::int64_t>(t) * vocab;
    const double lse = log_sum_exp(row, vocab);
    for (std::int64_t j = 0; j < vocab; ++j) g[j] = std::exp(row[j] - lse) * inv_n;
    g[targets[t]] -= inv_n;
  }
  return grad;
}

Tensor rms_norm(const Tensor& x, const Tensor& weight, double eps) {
  if (weight.size() != static_cast<std::size_t>(x.cols())) throw ShapeError("rms_norm weight width mismatch");
  Tensor out(x.shape());
  const std::int64_t n = x.cols();
  for (std::int64_t r = 0; r < x.rows(); ++r) {
    const double* xr = x.data() + r * n;
    double ss = 0.0;
    for (std::int64_t j = 0; j < n; ++j) ss += xr[j] * xr[j];
    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(n) + eps);
    double* o = out.data() + r * n;
    for (std::int64_t j = 0; j < n; ++j) o[j] = xr[j] * inv * weight[static_cast<std::size_t>(j)];
  }
  return out;
}

RmsNormGrads rms_norm_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out, double eps) {
  require_same_shape(x, grad_out, "rms_norm_backward");
  RmsNormGrads g{Tensor(x.shape()), Tensor(weight.shape())};
  const std::int64_t n = x.cols();
  for (std::int64_t r = 0; r < x.rows(); ++r) {
    const double* xr = x.data() + r * n;
    const double* gr = grad_out.data() + r * n;
    double ss = 0.0;
    for (std::int64_t j = 0; j < n; ++j) ss += xr[j] * xr[j];
    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(n) + eps);
    double dot = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      const double u = gr[j] * weight[static_cast<std::size_t>(j)];
      dot += u * xr[j];
      g.dweight[static_cast<std::size_t>(j)] += gr[j] * xr[j] * inv;
    }
    const double coef = dot * inv * inv * inv / static_cast<double>(n);
    double* dx = g.dx.data() + r * n;
    for (std::int64_t j = 0; j < n; ++j) {
      dx[j] = gr[j] * weight[static_cast<std::size_t>(j)] * inv - xr[j] * coef;
    }
  }
  return g;
}

Tensor gelu(const Tensor& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * std::numbers::sqrt2 / 2.0));
  }
  return out;
}

Tensor gelu_backward(const Tensor& x, const Tensor& grad_out) {
  require_same_shape(x, grad_out, "gelu_backward");
  Tensor dx(x.shape());
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 0.5 * (1.0 + std::erf(x[i] * std::numbers::sqrt2 / 2.0));
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x[i] * x[i]);
    dx[i] = grad_out[i] * (cdf + x[i] * pdf);
  }
  return dx;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (b.rank() != 2 || a.cols() != b.dim(0)) {
    throw ShapeError("matmul " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const std::int64_t m = a.rows(), kk = a.cols(), n = b.dim(1);
  Tensor out({m, n});
  for (std::int64_t i = 0; i < m; ++i) {
    double* o = out.data() + i * n;
    const double* ai = a.data() + i * kk;
    for (std::int64_t p = 0; p < kk; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b.data() + p * n;
      for (std::int64_t j = 0; j < n; ++j) o[j] += aip * bp[j];
    }
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor* bias) {
  Tensor out = matmul(x, weight);
  if (bias) {
    const std::int64_t n = weight.dim(1);
    if (static_cast<std::int64_t>(bias->size()) != n) throw ShapeError("linear bias width mismatch");
    for (std::int64_t r = 0; r < out.rows(); ++r) {
      for (std::int64_t j = 0; j < n; ++j) out.at(r, j) += (*bias)[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

LinearGrads linear_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out, bool has_bias) {
  const std::int64_t m = x.rows(), in = weight.dim(0), out_dim = weight.dim(1);
  if (x.cols() != in || grad_out.cols() != out_dim || grad_out.rows() != m) {
    throw ShapeError("linear_backward shapes " + shape_str(x.shape()) + " " + shape_str(weight.shape()) + " " +
                     shape_str(grad_out.shape()));
  }
  LinearGrads g{Tensor({m, in}), Tensor(weight.shape()), has_bias ? Tensor({out_dim}) : Tensor()};
  for (std::int64_t i = 0; i < m; ++i) {
    const double* go = grad_out.data() + i * out_dim;
    const double* xi = x.data() + i * in;
    double* dxi = g.dx.data() + i * in;
    for (std::int64_t p = 0; p < in; ++p) {
      const double* wp = weight.data() + p * out_dim;
      double* dwp = g.dweight.data() + p * out_dim;
      double acc = 0.0;
      const double xip = xi[p];
      for (std::int64_t j = 0; j < out_dim; ++j) {
        acc += go[j] * wp[j];
        dwp[j] += xip * go[j];
      }
      dxi[p] = acc;
    }
    if (has_bias) {
      for (std::int64_t j = 0; j < out_dim; ++j) g.dbias[static_cast<std::size_t>(j)] += go[j];
    }
  }
  g.dx = g.dx.reshaped(x.shape());
  return g;
}

}  // namespace medvlm::nn
