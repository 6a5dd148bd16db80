// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/nn/optim.hpp"

#include <cmath>
#include <numbers>

#include "medvlm/util/error.hpp"

namespace medvlm::nn {

OptimizerState OptimizerState::for_params(const std::vector<const Tensor*>& params, AdamWHyper hyper) {
  OptimizerState st;
  st.hyper = hyper;
  st.moments.reserve(params.size());
  for (const Tensor* p : params) st.moments.push_back({Tensor::zeros_like(*p), Tensor::zeros_like(*p)});
  return st;
}

void adamw_step(std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads, OptimizerState& state,
                const std::vector<double>& lrs, const std::vector<bool>& active) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.moments.size() != n || lrs.size() != n || active.size() != n) {
    throw ShapeError("adamw_step: parameter, gradient, state and lr lists differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    require_same_shape(*params[i], *grads[i], "adamw_step grad");
    require_same_shape(*params[i], state.moments[i].m, "adamw_step state");
    if (lrs[i] < 0.0) throw ValidationError("adamw_step: negative learning rate");
  }
  state.step += 1;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(h.beta1, t);
  const double corr2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = state.moments[i].m;
    Tensor& v = state.moments[i].v;
    const double lr = lrs[i];
    const double decay = 1.0 - lr * h.weight_decay;
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = h.beta1 * m[j] + (1.0 - h.beta1) * g[j];
      v[j] = h.beta2 * v[j] + (1.0 - h.beta2) * g[j] * g[j];
      const double m_hat = m[j] / corr1;
      const double v_hat = v[j] / corr2;
      p[j] = p[j] * decay - lr * m_hat / (std::sqrt(v_hat) + h.eps);
    }
  }
}

void adamw_step(std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads, OptimizerState& state,
                double lr) {
  adamw_step(params, grads, state, std::vector<double>(params.size(), lr),
             std::vector<bool>(params.size(), true));
}

std::int64_t LrSchedule::warmup_steps() const {
  return static_cast<std::int64_t>(std::llround(warmup_ratio * static_cast<double>(total_steps)));
}

void LrSchedule::validate() const {
  if (!(base_lr > 0.0)) throw ConfigError("schedule base_lr must be positive");
  if (min_lr < 0.0 || min_lr > base_lr) throw ConfigError("schedule min_lr must lie in [0, base_lr]");
  if (total_steps <= 0) throw ConfigError("schedule total_steps must be positive");
  if (warmup_ratio < 0.0 || warmup_ratio >= 1.0) throw ConfigError("schedule warmup_ratio must lie in [0, 1)");
  if (warmup_steps() >= total_steps) throw ConfigError("schedule warmup must end before total_steps");
}

double cosine_lr(std::int64_t step, const LrSchedule& schedule) {
  schedule.validate();
  if (step < 0 || step > schedule.total_steps) {
    throw ValidationError("cosine_lr: step " + std::to_string(step) + " outside [0, " +
                          std::to_string(schedule.total_steps) + "]");
  }
  const std::int64_t warmup = schedule.warmup_steps();
  if (step < warmup) {
    return schedule.base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  if (step == warmup) return schedule.base_lr;
  if (step == schedule.total_steps) return schedule.min_lr;
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(schedule.total_steps - warmup);
  return schedule.min_lr +
         0.5 * (schedule.base_lr - schedule.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace medvlm::nn
