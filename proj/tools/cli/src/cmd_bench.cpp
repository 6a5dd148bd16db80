// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <memory>
#include <ostream>

#include "commands.hpp"
#include "medvlm/bench/adapters.hpp"
#include "medvlm/bench/builders.hpp"
#include "medvlm/bench/overlap.hpp"
#include "medvlm/cli/manifest.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::cli {
namespace {

struct BuildOptions {
  std::string task;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::filesystem::path input;
  std::string allowlist = "mmlu-med";
  std::string dataset;
  bool shuffle = false;
  std::filesystem::path qrels, trials, notes;
  std::filesystem::path studies, reports;
  std::optional<std::filesystem::path> image_root;
  int shots = 0;
};

void require(const std::filesystem::path& p, const char* flag, const std::string& task) {
  if (p.empty()) throw ConfigError(std::string("--task ") + task + " needs " + flag);
}

std::vector<std::string> parse_allowlist(const std::string& spec) {
  if (spec == "mmlu-med") return bench::kMmluMedSubjects;
  if (spec == "mmmu-med") return bench::kMmmuMedSubjects;
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    if (comma > pos) out.push_back(spec.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

int cmd_build_bench(const BuildOptions& opt, Context& ctx) {
  auto manifest = start_manifest("build-bench", tool_version());
  util::Json config{{"task", opt.task}, {"seed", opt.seed}};
  bench::BuildResult result;
  std::string name;

  if (opt.task == "subjects") {
    require(opt.input, "--input", opt.task);
    auto records = bench::read_benchmark(opt.input);
    result = bench::aggregate_subjects(records, parse_allowlist(opt.allowlist));
    if (opt.shuffle) {
      for (auto& inst : result.instances) {
        if (!inst.is_multiple_choice()) continue;
        auto s = bench::shuffle_options(inst.options, inst.answer_key, inst.id, opt.seed);
        inst.options = std::move(s.options);
        inst.answer_key = std::move(s.answer_key);
      }
    }
    name = !opt.dataset.empty() ? opt.dataset : (opt.allowlist.find(',') == std::string::npos ? opt.allowlist : "subjects");
    config["allowlist"] = parse_allowlist(opt.allowlist);
    config["shuffle_options"] = opt.shuffle;
    manifest.inputs.push_back(digest_file("input", opt.input));
  } else if (opt.task == "patient-trial") {
    require(opt.qrels, "--qrels", opt.task);
    require(opt.trials, "--trials", opt.task);
    require(opt.notes, "--notes", opt.task);
    result = bench::build_patient_trial_bench(bench::read_notes(opt.notes), bench::read_trials(opt.trials),
                                              bench::read_qrels(opt.qrels), opt.seed);
    name = opt.dataset.empty() ? "patient-trial" : opt.dataset;
    manifest.inputs.push_back(digest_file("qrels", opt.qrels));
    manifest.inputs.push_back(digest_file("trials", opt.trials));
    manifest.inputs.push_back(digest_file("notes", opt.notes));
  } else if (opt.task == "impression") {
    require(opt.studies, "--studies", opt.task);
    require(opt.reports, "--reports", opt.task);
    const auto root = opt.image_root ? *opt.image_root : opt.studies.parent_path();
    result = bench::build_impression_bench(bench::read_studies(opt.studies), bench::read_reports(opt.reports),
                                           opt.shots, opt.seed, root);
    // Image references are rewritten relative to the output directory.
    std::filesystem::create_directories(opt.out);
    auto rebase = [&](bench::BenchmarkInstance& inst) {
      for (auto& img : inst.images) {
        img = std::filesystem::proximate(std::filesystem::absolute(root / img),
                                         std::filesystem::absolute(opt.out)).generic_string();
      }
    };
    for (auto& inst : result.instances) {
      rebase(inst);
      for (auto& shot : inst.shots) rebase(shot);
    }
    name = opt.dataset.empty() ? "impression" : opt.dataset;
    config["shots"] = opt.shots;
    manifest.inputs.push_back(digest_file("studies", opt.studies));
    manifest.inputs.push_back(digest_file("reports", opt.reports));
  } else {
    throw ConfigError("--task must be subjects, patient-trial or impression");
  }

  std::filesystem::create_directories(opt.out);
  util::DirectoryLock lock(opt.out);
  const auto bench_file = name + ".jsonl";
  bench::write_benchmark(opt.out / bench_file, result.instances);
  util::Json report{{"task", opt.task}, {"instances", result.instances.size()}, {"skipped", util::Json::array()},
                    {"warnings", result.warnings}};
  for (const auto& e : result.report) report["skipped"].push_back(e.to_json());
  util::write_file_atomic(opt.out / "build_report.json", report.dump(2) + "\n");

  for (const auto& w : result.warnings) ctx.err << "warning: " << w << "\n";
  ctx.out << bench_file << ": " << result.instances.size() << " instances, " << result.report.size() << " skipped\n";

  manifest.config_sha256 = util::sha256_hex(config.dump());
  manifest.seed = opt.seed;
  manifest.outputs.push_back(digest_file(bench_file, opt.out / bench_file));
  manifest.outputs.push_back(digest_file("build_report.json", opt.out / "build_report.json"));
  write_manifest(opt.out / "manifest.json", manifest);
  return kExitOk;
}

struct OverlapOptions {
  std::filesystem::path train;
  std::filesystem::path bench;
  std::optional<std::filesystem::path> image_root;
  std::filesystem::path out;
};

int cmd_check_overlap(const OverlapOptions& opt, Context& ctx) {
  auto manifest = start_manifest("check-overlap", tool_version());
  const auto train = bench::read_train_corpus(opt.train);
  const auto eval = bench::read_benchmark(opt.bench);
  const auto root = opt.image_root ? *opt.image_root : opt.bench.parent_path();
  const auto report = bench::check_overlap(train, eval, root);
  if (!opt.out.parent_path().empty()) std::filesystem::create_directories(opt.out.parent_path());
  util::write_file_atomic(opt.out, report.to_json().dump(2) + "\n");

  const auto ids = report.ids();
  ctx.out << ids.size() << " of " << eval.size() << " eval instances overlap the training corpus\n";
  for (const auto& id : ids) ctx.out << "  " << id << "\n";

  manifest.config_sha256 = util::sha256_hex(util::Json{{"normalization", "lower,strip-punct,collapse-ws"}}.dump());
  manifest.inputs.push_back(digest_file("train", opt.train));
  manifest.inputs.push_back(digest_file("bench", opt.bench));
  manifest.outputs.push_back(digest_file(opt.out.filename().string(), opt.out));
  write_manifest(manifest_for(opt.out), manifest);
  return report.clean() ? kExitOk : kExitOverlap;
}

}  // namespace

void register_build_bench(CLI::App& app, Context& ctx, Action& action) {
  auto opt = std::make_shared<BuildOptions>();
  auto* sub = app.add_subcommand("build-bench", "Build a standardized benchmark file");
  sub->add_option("--task", opt->task, "subjects | patient-trial | impression")
      ->required()
      ->check(CLI::IsMember({"subjects", "patient-trial", "impression"}));
  sub->add_option("--seed", opt->seed, "Seed for option shuffles and exemplar draws")->required();
  sub->add_option("--out", opt->out, "Output directory")->required();
  sub->add_option("--dataset", opt->dataset, "Output benchmark name (file <name>.jsonl)");
  sub->add_option("--input", opt->input, "subjects: records in the benchmark schema with subject tags")
      ->check(CLI::ExistingFile);
  sub->add_option("--allowlist", opt->allowlist, "subjects: mmlu-med, mmmu-med or a comma-separated subject list");
  sub->add_flag("--shuffle-options", opt->shuffle, "subjects: reorder options per instance under --seed");
  sub->add_option("--qrels", opt->qrels, "patient-trial: delimited qrels file")->check(CLI::ExistingFile);
  sub->add_option("--trials", opt->trials, "patient-trial: trial documents (JSONL)")->check(CLI::ExistingFile);
  sub->add_option("--notes", opt->notes, "patient-trial: patient notes (JSONL)")->check(CLI::ExistingFile);
  sub->add_option("--studies", opt->studies, "impression: study table (CSV: study_id,image)")->check(CLI::ExistingFile);
  sub->add_option("--reports", opt->reports, "impression: report table (CSV: study_id,impression)")
      ->check(CLI::ExistingFile);
  sub->add_option("--image-root", opt->image_root, "impression: directory image paths are relative to");
  sub->add_option("--shots", opt->shots, "impression: in-context exemplars, 0 or 1")->check(CLI::Range(0, 1));
  sub->callback([opt, &ctx, &action] { action = [opt, &ctx] { return cmd_build_bench(*opt, ctx); }; });
}

void register_check_overlap(CLI::App& app, Context& ctx, Action& action) {
  auto opt = std::make_shared<OverlapOptions>();
  auto* sub = app.add_subcommand("check-overlap", "Report eval instances whose question or images occur in training data");
  sub->add_option("--train", opt->train, "Training corpus (JSONL with text/prompt/question/target and images)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--bench", opt->bench, "Benchmark file")->required()->check(CLI::ExistingFile);
  sub->add_option("--image-root", opt->image_root, "Directory benchmark image paths are relative to");
  sub->add_option("--out", opt->out, "Overlap report (JSON)")->required();
  sub->callback([opt, &ctx, &action] { action = [opt, &ctx] { return cmd_check_overlap(*opt, ctx); }; });
}

}  // namespace medvlm::cli
