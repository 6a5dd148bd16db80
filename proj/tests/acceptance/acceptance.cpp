// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and time limits are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "medvlm/bench/adapters.hpp"
#include "medvlm/bench/builders.hpp"
#include "medvlm/bench/instance.hpp"
#include "medvlm/bench/overlap.hpp"
#include "medvlm/curriculum/run_config.hpp"
#include "medvlm/curriculum/stage.hpp"
#include "medvlm/curriculum/synthetic.hpp"
#include "medvlm/curriculum/trainer.hpp"
#include "medvlm/eval/harness.hpp"
#include "medvlm/metrics/entity.hpp"
#include "medvlm/metrics/scores.hpp"
#include "medvlm/model/tiling.hpp"
#include "medvlm/nn/ops.hpp"
#include "test_support.hpp"
#ifdef MEDVLM_HAVE_CLI
#include "pipeline.hpp"
#endif

namespace medvlm {
namespace {

constexpr double kGradTolerance = 1e-4;
constexpr int kGradSeeds = 20;
constexpr double kGradSeconds = 60.0;
constexpr double kTemperatureTolerance = 1e-9;
constexpr double kTilingSeconds = 10.0;
constexpr double kLossRatio = 0.7;
constexpr double kToySeconds = 600.0;
constexpr double kOverlapSeconds = 30.0;
constexpr double kMetricTolerance = 1e-6;

// Collects failure reasons for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    if (count_ > failures_.size()) s += "; ... " + std::to_string(count_) + " total";
    return s;
  }
  std::string note;

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---- 1 ----

void gradients(Check& c) {
  std::size_t checks = 0;
  double worst = 0.0;
  for (int seed = 0; seed < kGradSeeds; ++seed) {
    const auto s = static_cast<std::uint64_t>(seed);
    for (const auto& suite : {testing::op_gradient_errors(s), testing::graph_gradient_errors(s),
                              testing::model_gradient_errors(s)}) {
      for (const auto& g : suite) {
        ++checks;
        worst = std::max(worst, g.relative_error);
        c.expect(g.relative_error < kGradTolerance,
                 g.what + " seed " + std::to_string(seed) + " rel err " + fmt(g.relative_error));
        c.expect(g.magnitude > 0.0, g.what + " seed " + std::to_string(seed) + " has zero gradient");
      }
    }
  }
  c.note = std::to_string(checks) + " checks over " + std::to_string(kGradSeeds) + " seeds, worst rel err " +
           fmt(worst);
}

// ---- 2 ----

void yarn(Check& c) {
  const nn::RopeConfig one{.head_dim = 64, .theta_base = 150000.0, .original_context = 4096, .scale_factor = 1.0};
  const auto y1 = nn::yarn_scale(one);
  c.expect(y1.inv_freq == nn::rope_frequencies(one), "s=1 frequencies differ from vanilla");
  c.expect(y1.attention_temperature == 1.0, "s=1 temperature is not 1");

  const nn::RopeConfig full{.head_dim = 64, .theta_base = 150000.0, .original_context = 4096, .scale_factor = 32.0};
  const double t = nn::yarn_scale(full).attention_temperature;
  c.expect(std::abs(t - (0.1 * std::log(32.0) + 1.0)) <= kTemperatureTolerance, "temperature(32) = " + fmt(t));
  try {
    full.validate();
  } catch (const std::exception& e) {
    c.expect(false, std::string("full config rejected: ") + e.what());
  }
  c.expect(full.extended_context() == 131072, "extended context " + std::to_string(full.extended_context()));
  c.note = "temperature(32) = " + fmt(t);
}

// ---- 3 ----

void tiling(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = model::VisionConfig::full_scale();
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::int64_t> side(1, 4000);
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t w = side(gen), h = side(gen);
    c.expect(model::plan_tiling(w, h, cfg) == testing::brute_force_tiling(w, h, cfg),
             "plan differs at " + std::to_string(w) + "x" + std::to_string(h));
  }
  std::int64_t widest = 0;
  for (std::int64_t w : {336, 4032, 20000, 100000}) {
    for (std::int64_t h : {1, 336, 5000, 100000}) widest = std::max(widest, model::plan_tiling(w, h, cfg).tile_count());
  }
  c.expect(widest == 12, "largest tile count " + std::to_string(widest));
  c.expect(cfg.tile_size == 336 && cfg.patch_size == 14, "full tile geometry");
  c.expect(cfg.tokens_per_tile() == 144, "tokens per tile " + std::to_string(cfg.tokens_per_tile()));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < kTilingSeconds, "took " + fmt(secs) + " s");
  c.note = "1000 sizes, cap " + std::to_string(widest) + ", " + std::to_string(cfg.tokens_per_tile()) + " tokens/tile";
}

// ---- 4 ----

model::ModelConfig tiny_model() {
  model::ModelConfig cfg;
  cfg.vision.tile_size = 16;
  cfg.vision.patch_size = 4;
  cfg.vision.width = 8;
  cfg.vision.mlp_ratio = 2;
  cfg.lm.d_model = 8;
  cfg.lm.layers = 1;
  cfg.lm.mlp_ratio = 2;
  cfg.lm.max_seq_len = 160;
  cfg.lm.rope.head_dim = 4;
  return cfg;
}

void freeze(Check& c) {
  const auto cfg = tiny_model();
  curriculum::Model m{cfg, model::init_params(cfg, 4)};
  const auto before = m.params;
  auto stage = curriculum::default_stages()[0];
  stage.batch_size = 4;
  stage.max_steps = 12;
  curriculum::run_stage(m, stage, curriculum::synthetic_captions(50, 9, 16), 1);
  bool projector_moved = false;
  std::size_t lm_tensors = 0;
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    const auto& path = m.params.path(i);
    if (path.starts_with("projector.")) {
      projector_moved = projector_moved || !(m.params.tensor(i) == before.tensor(i));
    } else {
      if (path.starts_with("lm.")) ++lm_tensors;
      c.expect(m.params.tensor(i) == before.tensor(i), path + " changed in stage 0");
    }
  }
  c.expect(projector_moved, "projector did not train");

  auto stages = curriculum::default_stages();
  for (auto& s : stages) {
    s.batch_size = 2;
    s.max_steps = 100;  // warm-up ends at step 3
  }
  const std::map<std::string, curriculum::Dataset> data{{"pretrain-pairs", curriculum::synthetic_captions(8, 1, 16)},
                                                        {"midtrain-pairs", curriculum::synthetic_reports(8, 2, 16)},
                                                        {"instruct-mix", curriculum::synthetic_vqa(8, 3, 16)}};
  const auto result = curriculum::train_curriculum({cfg, model::init_params(cfg, 5)}, stages, data, 3);
  std::map<std::string, std::map<std::string, double>> seen;
  for (const auto& r : result.log.steps) {
    if (r.step == 3) seen[r.stage] = r.lr;
  }
  const std::map<std::string, std::map<std::string, double>> expected{
      {"pretrain", {{"projector", 1e-3}}},
      {"midtrain", {{"lm", 2e-5}, {"projector", 2e-5}}},
      {"instruct", {{"lm", 8e-5}, {"projector", 8e-5}, {"vision", 8e-5}}}};
  c.expect(seen == expected, "learning rates at warm-up end differ");
  c.note = std::to_string(lm_tensors) + " LM tensors unchanged; lr 1e-3 / 2e-5 / 8e-5";
}

// ---- 5 ----

void toy(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = curriculum::load_run_config(testing::source_dir() / "configs/toy.yaml");
  const auto first = testing::run_config(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto second = testing::run_config(cfg);
  std::string ratios;
  for (const char* stage : {"pretrain", "midtrain", "instruct"}) {
    const double r = testing::stage_loss_ratio(first.log, stage);
    c.expect(r <= kLossRatio, std::string(stage) + " loss ratio " + fmt(r));
    ratios += std::string(ratios.empty() ? "" : ", ") + stage + " " + fmt(r);
  }
  c.expect(secs < kToySeconds, "run took " + fmt(secs) + " s");
  c.expect(first.model.params == second.model.params, "parameters differ between runs");
  c.expect(first.log.to_jsonl() == second.log.to_jsonl(), "logs differ between runs");
  c.note = "loss ratios " + ratios + "; " + fmt(secs) + " s per run";
}

// ---- 6 ----

void harness(Check& c) {
  const auto oracle = testing::harness_oracle(200);
  c.expect(oracle.expected_correct == 125, "oracle table gives " + std::to_string(oracle.expected_correct));
  testing::TempDir one, eight;
  testing::ScriptedDecoder d1(oracle.sheet), d8(oracle.sheet);
  const auto s1 = eval::run_eval(oracle.benchmark, d1, one.path(), {.concurrency = 1});
  eval::run_eval(oracle.benchmark, d8, eight.path(), {.concurrency = 8});
  c.expect(s1.score.overall.total == 200, "total " + std::to_string(s1.score.overall.total));
  c.expect(s1.score.overall.correct == oracle.expected_correct,
           "correct " + std::to_string(s1.score.overall.correct));
  c.expect(s1.score.overall.accuracy() == "62.50", "accuracy " + s1.score.overall.accuracy());
  c.expect(s1.score.null_extractions == oracle.expected_null, "null extractions");
  c.expect(s1.score.failures.contains("transport_error") &&
               s1.score.failures.at("transport_error") == oracle.expected_transport,
           "transport failures");
  for (const char* file : {"results.jsonl", "summary.json", "summary.txt"}) {
    c.expect(testing::read_bytes(one / file) == testing::read_bytes(eight / file),
             std::string(file) + " differs between concurrency 1 and 8");
  }
  c.note = std::to_string(s1.score.overall.correct) + "/200 = " + s1.score.overall.accuracy() +
           " with " + std::to_string(oracle.expected_null) + " null and " +
           std::to_string(oracle.expected_transport) + " transport failures";
}

// ---- 7 ----

void builders(Check& c) {
  const auto dir = testing::fixture_dir() / "trials";
  const auto qrels = bench::read_qrels(dir / "qrels.txt");
  const auto notes = bench::read_notes(dir / "notes.jsonl");
  const auto trials = bench::read_trials(dir / "trials.jsonl");
  const auto r = bench::build_patient_trial_bench(notes, trials, qrels, 17);
  c.expect(qrels.size() == 20, "fixture has " + std::to_string(qrels.size()) + " qrels");
  c.expect(r.instances.size() == 17, std::to_string(r.instances.size()) + " instances");
  c.expect(r.report.size() == 3, std::to_string(r.report.size()) + " report entries");
  for (const auto& inst : r.instances) {
    const int grade = std::stoi(inst.meta.at("grade"));
    c.expect(inst.option(inst.answer_key)->text == bench::map_qrel_to_label(grade), inst.id + " label");
  }
  c.expect(bench::map_qrel_to_label(2) == "eligible" && bench::map_qrel_to_label(1) == "partially eligible" &&
               bench::map_qrel_to_label(0) == "not eligible",
           "qrel mapping");

  // Frozen golden permutation for seed 17 and id "x1".
  const std::vector<bench::Option> four{{"A", "alpha"}, {"B", "beta"}, {"C", "gamma"}, {"D", "delta"}};
  const auto s = bench::shuffle_options(four, "B", "x1", 17);
  c.expect(s.options == std::vector<bench::Option>{{"A", "alpha"}, {"B", "gamma"}, {"C", "beta"}, {"D", "delta"}} &&
               s.answer_key == "C",
           "shuffle golden changed");

  const auto idir = testing::fixture_dir() / "impression";
  const auto studies = bench::read_studies(idir / "studies.csv");
  const auto reports = bench::read_reports(idir / "reports.csv");
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (const auto& inst : bench::build_impression_bench(studies, reports, 1, seed, idir).instances) {
      ++checked;
      c.expect(inst.shots.size() == 1 && inst.shots[0].id != inst.id, inst.id + " references itself");
    }
  }
  c.note = std::to_string(r.instances.size()) + " instances + " + std::to_string(r.report.size()) +
           " report entries; " + std::to_string(checked) + " one-shot items without self-reference";
}

// ---- 8 ----

bench::BenchmarkInstance question_item(const std::string& id, const std::string& question) {
  bench::BenchmarkInstance b;
  b.id = id;
  b.dataset = "mmlu";
  b.subject = "anatomy";
  b.question = question;
  b.options = {{"A", "one"}, {"B", "two"}};
  b.answer_key = "A";
  return b;
}

void overlap(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<bench::BenchmarkInstance> eval;
  for (int i = 0; i < 6; ++i) {
    eval.push_back(question_item("e" + std::to_string(i),
                                 "Which artery supplies region number " + std::to_string(i) + " of the heart?"));
  }
  const std::vector<bench::TrainItem> planted{{"Unrelated sentence.", {}},
                                             {eval[1].question, {}},
                                             {"  WHICH artery supplies REGION number 3\tof the heart  ", {}},
                                             {"which artery supplies region number 5 of the heart", {}}};
  const auto hits = bench::check_overlap(planted, eval).ids();
  c.expect(hits == std::vector<std::string>{"e1", "e3", "e5"}, "planted duplicates detected: " +
                                                                   std::to_string(hits.size()) + " of 3");

  std::vector<bench::TrainItem> train;
  std::vector<bench::BenchmarkInstance> disjoint;
  for (int i = 0; i < 10000; ++i) {
    train.push_back({"training passage " + std::to_string(i) + " about lungs", {}});
    disjoint.push_back(question_item("d" + std::to_string(i), "evaluation question " + std::to_string(i) + " about lungs"));
  }
  const auto clean = bench::check_overlap(train, disjoint);
  c.expect(clean.clean(), std::to_string(clean.hits.size()) + " false positives");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < kOverlapSeconds, "took " + fmt(secs) + " s");
  c.note = "3/3 planted found, " + std::to_string(clean.hits.size()) + " false positives in 10000; " + fmt(secs) + " s";
}

// ---- 9 ----

void metrics_check(Check& c) {
  using metrics::Entity;
  using P = metrics::Polarity;
  auto G = [](std::vector<Entity> es) { return metrics::EntityGraph{std::move(es), {}}; };
  const std::vector<std::string> texts{"effusion", "edema", "opacity", "lung"};
  const std::vector<std::string> labels{"observation", "anatomy"};
  std::mt19937_64 gen(2024);
  auto random_side = [&] {
    std::vector<Entity> es;
    const auto n = gen() % 9;
    for (std::size_t i = 0; i < n; ++i) {
      es.push_back(Entity::make(texts[gen() % texts.size()], labels[gen() % labels.size()],
                                gen() % 2 ? P::positive : P::negative));
    }
    return es;
  };
  for (int trial = 0; trial < 10000; ++trial) {
    const auto pred = random_side();
    const auto ref = random_side();
    const double best = testing::exhaustive_credit(pred, ref);
    const double np = static_cast<double>(pred.size()), nr = static_cast<double>(ref.size());
    double expected = 0.0;
    if (pred.empty() && ref.empty()) {
      expected = 1.0;
    } else if (best > 0.0) {
      const double p = best / np, r = best / nr;
      expected = 2.0 * p * r / (p + r);
    }
    const double got = metrics::radgraph_partial_f1(G(pred), G(ref)).f1;
    c.expect(std::abs(got - expected) <= 1e-12, "trial " + std::to_string(trial) + ": " + fmt(got) + " vs " +
                                                    fmt(expected));
  }

  const auto two = G({Entity::make("effusion", "observation", P::positive),
                      Entity::make("edema", "observation", P::positive)});
  const auto flipped = G({Entity::make("effusion", "observation", P::positive),
                          Entity::make("edema", "observation", P::negative)});
  const double flip = metrics::radgraph_partial_f1(flipped, two).f1;
  c.expect(std::abs(flip - 0.75) <= kMetricTolerance, "polarity flip F1 " + fmt(flip));
  const double bleu = metrics::bleu4("a b c d", "a b c d e");
  c.expect(std::abs(bleu - 0.7788007830714049) <= kMetricTolerance, "brevity BLEU " + fmt(bleu));
  const double rm = metrics::reciprocal_mean(std::vector<double>{1.0, 3.0});
  c.expect(std::abs(rm - 0.5) <= kMetricTolerance, "reciprocal_mean " + fmt(rm));
  c.note = "10000 oracle trials; F1 " + fmt(flip) + ", BLEU " + fmt(bleu) + ", reciprocal mean " + fmt(rm);
}

// ---- 10 ----

void end_to_end(Check& c) {
#ifdef MEDVLM_HAVE_CLI
  testing::TempDir a, b;
  const auto config = testing::source_dir() / "configs/toy.yaml";
  const auto first = testing::run_pipeline(a.path(), config);
  const auto second = testing::run_pipeline(b.path(), config);
  c.expect(!first.contains("error"), first.contains("error") ? first.at("error") : "");
  c.expect(!second.contains("error"), second.contains("error") ? second.at("error") : "");
  c.expect(first.size() == 4, "expected four manifests");
  c.expect(first == second, "manifest digests differ");
  for (const char* file : {"run/instruct.ckpt", "bench/shapes.jsonl", "eval/results.jsonl", "score/score.json"}) {
    c.expect(testing::read_bytes(a / file) == testing::read_bytes(b / file), std::string(file) + " differs");
  }
  c.note = "train, build-bench, eval and score digests equal across two runs";
#else
  c.expect(false, "built without the command-line tool");
#endif
}

}  // namespace
}  // namespace medvlm

int main() {
  using medvlm::Check;
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"gradient suite", medvlm::gradients},
      {"yarn identity and values", medvlm::yarn},
      {"tiling oracle", medvlm::tiling},
      {"curriculum freeze invariance", medvlm::freeze},
      {"toy training signal", medvlm::toy},
      {"harness oracle", medvlm::harness},
      {"benchmark builders", medvlm::builders},
      {"overlap checker", medvlm::overlap},
      {"metrics", medvlm::metrics_check},
      {"end-to-end reproducibility", medvlm::end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // The gradient time limit covers the whole criterion.
    if (i == 0) c.expect(secs < medvlm::kGradSeconds, "took " + medvlm::fmt(secs) + " s");
    if (!c.ok()) ++failed;
    std::cout << (c.ok() ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << " ("
              << medvlm::fmt(secs) << " s): " << (c.ok() ? c.note : c.summary()) << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
