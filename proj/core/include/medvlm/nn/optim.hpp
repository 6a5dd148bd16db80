// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "medvlm/nn/tensor.hpp"

namespace medvlm::nn {

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

/// Moments for one parameter tensor.
struct MomentPair {
  Tensor m;
  Tensor v;
};

/// First/second moments mirror the parameter list one-to-one.
struct OptimizerState {
  AdamWHyper hyper;
  std::vector<MomentPair> moments;
  std::int64_t step = 0;

  static OptimizerState for_params(const std::vector<const Tensor*>& params, AdamWHyper hyper = {});
};

/// One decoupled-weight-decay Adam update, in place. `lrs` holds one learning
/// rate per parameter (per-module rates); an entry of exactly 0 together with
/// `active[i] == false` leaves that parameter and its moments untouched.
void adamw_step(std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                OptimizerState& state, const std::vector<double>& lrs,
                const std::vector<bool>& active);

/// Single-rate convenience overload where every parameter is active.
void adamw_step(std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                OptimizerState& state, double lr);

struct LrSchedule {
  double base_lr = 1e-3;
  double min_lr = 0.0;
  std::int64_t total_steps = 100;
  double warmup_ratio = 0.03;

  std::int64_t warmup_steps() const;
  void validate() const;
};

/// Linear warmup 0 -> base_lr, then cosine decay to min_lr at total_steps.
double cosine_lr(std::int64_t step, const LrSchedule& schedule);

}  // namespace medvlm::nn
