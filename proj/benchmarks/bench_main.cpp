// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "medvlm/bench/instance.hpp"
#include "medvlm/eval/extract.hpp"
#include "medvlm/metrics/entity.hpp"
#include "medvlm/metrics/scores.hpp"
#include "medvlm/model/config.hpp"
#include "medvlm/model/params.hpp"
#include "medvlm/model/tiling.hpp"
#include "medvlm/model/vlm.hpp"
#include "medvlm/nn/ops.hpp"

namespace medvlm {
namespace {

nn::Tensor random_tensor(nn::Shape shape, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  nn::Tensor t(std::move(shape));
  for (auto& v : t.values()) v = dist(gen);
  return t;
}

void BM_PlanTiling(benchmark::State& state) {
  const auto cfg = model::VisionConfig::full_scale();
  std::int64_t w = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::plan_tiling(1 + w % 4000, 1 + (w * 7) % 4000, cfg));
    ++w;
  }
}
BENCHMARK(BM_PlanTiling);

void BM_Attention(benchmark::State& state) {
  const auto n = state.range(0);
  const auto q = random_tensor({n, 4, 16}, 1), k = random_tensor({n, 4, 16}, 2), v = random_tensor({n, 4, 16}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::attention(q, k, v, true, 1.0));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Attention)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_Forward(benchmark::State& state) {
  model::ModelConfig cfg;
  cfg.lm.d_model = 32;
  cfg.lm.heads = 4;
  cfg.lm.layers = 2;
  cfg.lm.max_seq_len = 256;
  cfg.lm.rope.head_dim = 8;
  const auto params = model::init_params(cfg, 0);
  const auto embedded = random_tensor({state.range(0), cfg.lm.d_model}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(model::forward(embedded, params, cfg));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128);

void BM_RadGraphF1(benchmark::State& state) {
  const std::vector<std::string> texts{"effusion", "edema", "opacity", "lung", "heart", "pneumothorax"};
  std::mt19937_64 gen(5);
  std::vector<metrics::Entity> pred, ref;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    pred.push_back(metrics::Entity::make(texts[gen() % texts.size()], "observation",
                                         gen() % 2 ? metrics::Polarity::positive : metrics::Polarity::negative));
    ref.push_back(metrics::Entity::make(texts[gen() % texts.size()], "observation",
                                        gen() % 2 ? metrics::Polarity::positive : metrics::Polarity::negative));
  }
  const metrics::EntityGraph p{pred, {}}, r{ref, {}};
  for (auto _ : state) benchmark::DoNotOptimize(metrics::radgraph_partial_f1(p, r));
}
BENCHMARK(BM_RadGraphF1)->Arg(4)->Arg(8)->Arg(12)->Arg(40);

void BM_Bleu(benchmark::State& state) {
  const std::string pred = "Small left pleural effusion with adjacent atelectasis. No pneumothorax.";
  const std::string ref = "Small left pleural effusion. Adjacent basilar atelectasis. No pneumothorax seen.";
  for (auto _ : state) benchmark::DoNotOptimize(metrics::bleu4(pred, ref));
}
BENCHMARK(BM_Bleu);

void BM_ExtractOption(benchmark::State& state) {
  const std::vector<bench::Option> options{{"A", "mitral"}, {"B", "aortic"}, {"C", "tricuspid"}, {"D", "pulmonary"}};
  const std::string reply = "Let me think step by step about the valves. The answer is (C).";
  for (auto _ : state) benchmark::DoNotOptimize(eval::extract_option(reply, options));
}
BENCHMARK(BM_ExtractOption);

}  // namespace
}  // namespace medvlm

BENCHMARK_MAIN();
