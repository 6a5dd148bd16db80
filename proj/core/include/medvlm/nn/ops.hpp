// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Numeric primitives of the decoder and vision encoder. Every forward has an
// analytic backward taking the upstream gradient; all are pure functions.

#include <cstdint>
#include <span>
#include <vector>

#include "medvlm/nn/tensor.hpp"

namespace medvlm::nn {

struct RopeConfig {
  std::int64_t head_dim = 16;
  double theta_base = 10000.0;
  std::int64_t original_context = 4096;
  double scale_factor = 1.0;
  double beta_fast = 32.0;
  double beta_slow = 1.0;

  /// Throws ConfigError on an odd head_dim, s < 1 or misordered betas.
  void validate() const;
  std::int64_t extended_context() const;
};

struct YarnScaling {
  std::vector<double> inv_freq;
  double attention_temperature = 1.0;
};

/// theta_base^(-2i/head_dim) for i in [0, head_dim/2).
std::vector<double> rope_frequencies(const RopeConfig& cfg);

/// Frequency-dependent interpolation: high-frequency bands (many rotations
/// inside the original context) are kept, low-frequency bands are divided by
/// the scale factor, and a linear ramp between beta_slow and beta_fast
/// rotations blends the two. Temperature is 0.1 ln(s) + 1.
YarnScaling yarn_scale(const RopeConfig& cfg);

/// x: [seq, heads, head_dim]. Rotates each (2i, 2i+1) pair by positions[t] * inv_freq[i].
Tensor apply_rope(const Tensor& x, std::span<const std::int64_t> positions,
                  std::span<const double> inv_freq);
/// The transpose of a rotation is the rotation by the negated angle.
Tensor apply_rope_backward(const Tensor& grad_out, std::span<const std::int64_t> positions,
                           std::span<const double> inv_freq);

struct AttentionResult {
  Tensor output;  // [seq, heads, head_dim]
  Tensor probs;   // [heads, seq, seq]
};

/// softmax(temperature * q k^T / sqrt(head_dim) + mask) v, per head.
AttentionResult attention(const Tensor& q, const Tensor& k, const Tensor& v, bool causal,
                          double temperature);

struct AttentionGrads {
  Tensor dq, dk, dv;
};

AttentionGrads attention_backward(const Tensor& q, const Tensor& k, const Tensor& v,
                                  const Tensor& probs, const Tensor& grad_out,
                                  double temperature);

/// Mean negative log-likelihood over positions whose target != ignore_index.
/// Throws ValidationError when every position is ignored.
double cross_entropy(const Tensor& logits, std::span<const std::int64_t> targets,
                     std::int64_t ignore_index);
Tensor cross_entropy_backward(const Tensor& logits, std::span<const std::int64_t> targets,
                              std::int64_t ignore_index);
/// Number of positions that contribute to the mean.
std::int64_t count_targets(std::span<const std::int64_t> targets, std::int64_t ignore_index);

/// Row-wise RMS normalization with a learned gain: x / rms(x) * w.
Tensor rms_norm(const Tensor& x, const Tensor& weight, double eps = 1e-6);
struct RmsNormGrads {
  Tensor dx, dweight;
};
RmsNormGrads rms_norm_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out,
                               double eps = 1e-6);

/// Exact (erf) Gaussian-error linear unit.
Tensor gelu(const Tensor& x);
Tensor gelu_backward(const Tensor& x, const Tensor& grad_out);

/// [n, in] x [in, out] (+ bias [out]).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor* bias = nullptr);
struct LinearGrads {
  Tensor dx, dweight, dbias;
};
LinearGrads linear_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out,
                            bool has_bias);

/// Plain a[m,k] * b[k,n].
Tensor matmul(const Tensor& a, const Tensor& b);

}  // namespace medvlm::nn
