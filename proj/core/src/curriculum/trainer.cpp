// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/curriculum/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "medvlm/model/tiling.hpp"
#include "medvlm/model/tokenizer.hpp"
#include "medvlm/nn/optim.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/hash.hpp"
#include "medvlm/util/random.hpp"

namespace medvlm::curriculum {

using model::ByteTokenizer;

util::Json StepRecord::to_json() const {
  util::Json lrs = util::Json::object();
  for (const auto& [m, v] : lr) lrs[m] = v;
  return {{"stage", stage}, {"step", step}, {"lr", lrs}, {"loss", loss}};
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const auto& r : steps) {
    out += r.to_json().dump();
    out += '\n';
  }
  return out;
}

void TrainLog::append(const TrainLog& other) {
  steps.insert(steps.end(), other.steps.begin(), other.steps.end());
  for (const auto& [k, v] : other.wall_seconds) wall_seconds[k] += v;
  for (const auto& [k, v] : other.skipped_examples) skipped_examples[k] += v;
}

namespace {

std::vector<double> stage_losses(const TrainLog& log, const std::string& stage) {
  std::vector<double> out;
  for (const auto& r : log.steps) {
    if (r.stage == stage) out.push_back(r.loss);
  }
  if (out.empty()) throw ValidationError("no log records for stage '" + stage + "'");
  return out;
}

double mean(std::vector<double>::const_iterator b, std::vector<double>::const_iterator e) {
  return std::accumulate(b, e, 0.0) / static_cast<double>(std::distance(b, e));
}

}  // namespace

double TrainLog::smoothed_start(const std::string& stage, std::int64_t window) const {
  const auto l = stage_losses(*this, stage);
  const auto w = std::min<std::size_t>(l.size(), static_cast<std::size_t>(std::max<std::int64_t>(window, 1)));
  return mean(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(w));
}

double TrainLog::smoothed_end(const std::string& stage, std::int64_t window) const {
  const auto l = stage_losses(*this, stage);
  const auto w = std::min<std::size_t>(l.size(), static_cast<std::size_t>(std::max<std::int64_t>(window, 1)));
  return mean(l.end() - static_cast<std::ptrdiff_t>(w), l.end());
}

std::int64_t assembled_length(const model::Example& ex, const model::ModelConfig& cfg) {
  std::int64_t len = 0;
  for (const auto& img : ex.images) {
    len += model::vision_token_count(model::plan_tiling(img.width, img.height, cfg.vision), cfg.vision);
  }
  for (auto id : ex.text.ids) {
    if (id != ByteTokenizer::kImage) ++len;
  }
  return len;
}

std::optional<model::Example> fit_to_length(const model::Example& ex, const model::ModelConfig& cfg,
                                            std::int64_t max_len) {
  const std::int64_t len = assembled_length(ex, cfg);
  model::Example out = ex;
  if (len > max_len) {
    std::int64_t excess = len - max_len;
    std::int64_t text_tokens = 0;
    for (auto id : ex.text.ids) text_tokens += id != ByteTokenizer::kImage ? 1 : 0;
    if (excess > text_tokens) return std::nullopt;
    out.text.ids.clear();
    out.text.supervised.clear();
    for (std::size_t i = 0; i < ex.text.ids.size(); ++i) {
      if (excess > 0 && ex.text.ids[i] != ByteTokenizer::kImage) {
        --excess;
        continue;
      }
      out.text.ids.push_back(ex.text.ids[i]);
      out.text.supervised.push_back(i < ex.text.supervised.size() && ex.text.supervised[i]);
    }
  }
  if (model::supervised_targets(out) == 0) return std::nullopt;
  return out;
}

std::uint64_t stage_seed(std::uint64_t seed, const std::string& stage_name) {
  return util::mix64(seed ^ util::fnv1a64(stage_name));
}

TrainLog run_stage(Model& model, const StageConfig& stage, const Dataset& data, std::uint64_t seed,
                   nn::AdamWHyper hyper) {
  stage.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainLog log;
  const std::int64_t max_len = std::min(stage.max_seq_len, model.config.lm.max_seq_len);
  Dataset prepared;
  for (const auto& ex : data) {
    if (auto fitted = fit_to_length(ex, model.config, max_len)) prepared.push_back(std::move(*fitted));
  }
  log.skipped_examples[stage.name] = static_cast<std::int64_t>(data.size() - prepared.size());
  if (prepared.empty()) throw ValidationError("stage '" + stage.name + "' has no usable training examples");

  const auto mask = freeze_mask(model.params, stage);
  model::ParamStore grads;
  std::vector<nn::Tensor*> param_ptrs;
  std::vector<const nn::Tensor*> grad_ptrs;
  std::vector<bool> active;
  std::vector<std::string> modules;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const auto& path = model.params.path(i);
    modules.push_back(model::module_of(path));
    active.push_back(mask.at(path));
  }
  grads = model.params.zeros_like();
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    param_ptrs.push_back(&model.params.tensor(i));
    grad_ptrs.push_back(&grads.tensor(i));
  }
  std::vector<const nn::Tensor*> const_params(param_ptrs.begin(), param_ptrs.end());
  auto opt = nn::OptimizerState::for_params(const_params, hyper);

  const auto per_step = static_cast<std::size_t>(stage.batch_size * stage.grad_accum);
  const auto n = prepared.size();
  const auto steps_per_epoch = static_cast<std::int64_t>((n + per_step - 1) / per_step);
  const std::int64_t total = stage.max_steps > 0 ? stage.max_steps : stage.epochs * steps_per_epoch;

  std::map<std::string, nn::LrSchedule> schedules;
  for (const auto& [m, lr] : stage.lr_map) {
    schedules[m] = nn::LrSchedule{lr, stage.min_lr, total, stage.warmup_ratio};
    schedules[m].validate();
  }

  // Seeded permutation per epoch; steps draw consecutively across epochs.
  std::vector<std::size_t> order;
  std::int64_t epoch = 0;
  std::size_t cursor = 0;
  auto refill = [&] {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    util::Rng rng(util::mix64(seed ^ static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    ++epoch;
    cursor = 0;
  };
  refill();

  std::vector<double> lrs(model.params.size(), 0.0);
  for (std::int64_t step = 1; step <= total; ++step) {
    std::vector<const model::Example*> batch;
    for (std::size_t i = 0; i < std::min(per_step, n); ++i) {
      if (cursor == n) refill();
      batch.push_back(&prepared[order[cursor++]]);
    }
    std::int64_t tokens = 0;
    for (const auto* ex : batch) tokens += model::supervised_targets(*ex);
    grads.zero();
    double loss = 0.0;
    for (const auto* ex : batch) {
      const double w = static_cast<double>(model::supervised_targets(*ex)) / static_cast<double>(tokens);
      loss += w * model::example_loss(*ex, model.params, model.config, &grads, w);
    }

    StepRecord rec;
    rec.stage = stage.name;
    rec.step = step;
    rec.loss = loss;
    for (const auto& [m, sched] : schedules) rec.lr[m] = nn::cosine_lr(step, sched);
    if (!std::isfinite(loss)) throw NumericError(rec.to_json().dump());
    for (std::size_t i = 0; i < lrs.size(); ++i) lrs[i] = active[i] ? rec.lr.at(modules[i]) : 0.0;
    nn::adamw_step(param_ptrs, grad_ptrs, opt, lrs, active);
    log.steps.push_back(std::move(rec));
  }
  log.wall_seconds[stage.name] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

CurriculumResult train_curriculum(Model model, const std::vector<StageConfig>& stages,
                                  const std::map<std::string, Dataset>& datasets, std::uint64_t seed,
                                  const CurriculumOptions& options) {
  for (const auto& st : stages) {
    st.validate();
    if (!datasets.contains(st.data_source)) {
      throw ConfigError("stage '" + st.name + "' references missing dataset '" + st.data_source + "'");
    }
  }
  CurriculumResult result{std::move(model), {}, {}};
  for (const auto& st : stages) {
    result.log.append(
        run_stage(result.model, st, datasets.at(st.data_source), stage_seed(seed, st.name), options.hyper));
    std::filesystem::path ckpt_path;
    if (options.checkpoint_dir) {
      ckpt_path = *options.checkpoint_dir / (st.name + ".ckpt");
      model::Checkpoint ckpt{result.model.config, result.model.params, {{"stage", st.name}, {"seed", seed}}};
      model::save_checkpoint(ckpt_path, ckpt);
      result.checkpoints.push_back(ckpt_path);
    }
    if (options.on_stage_end) options.on_stage_end(st, ckpt_path);
  }
  return result;
}

}  // namespace medvlm::curriculum
