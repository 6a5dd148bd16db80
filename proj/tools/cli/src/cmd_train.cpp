// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <memory>
#include <ostream>
#include <set>

#include "commands.hpp"
#include "medvlm/cli/manifest.hpp"
#include "medvlm/curriculum/run_config.hpp"
#include "medvlm/model/checkpoint.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::cli {
namespace {

struct TrainOptions {
  std::filesystem::path config;
  std::vector<std::string> stages;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> resume_from;
  bool skip_warmup = false;
};

std::vector<std::string> split_commas(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::size_t pos = 0;
    while (pos <= item.size()) {
      auto comma = item.find(',', pos);
      if (comma == std::string::npos) comma = item.size();
      if (comma > pos) out.push_back(item.substr(pos, comma - pos));
      pos = comma + 1;
    }
  }
  return out;
}

int cmd_train(const TrainOptions& opt, Context& ctx) {
  auto manifest = start_manifest("train", tool_version());
  auto cfg = curriculum::load_run_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.output_dir) cfg.output_dir = *opt.output_dir;

  if (!opt.stages.empty()) {
    const auto wanted = split_commas(opt.stages);
    for (const auto& name : wanted) {
      const bool known = std::any_of(cfg.stages.begin(), cfg.stages.end(), [&](const auto& s) { return s.name == name; });
      if (!known) throw ConfigError("--stages: stage '" + name + "' is not in the run config");
    }
    std::erase_if(cfg.stages, [&](const auto& s) {
      return std::find(wanted.begin(), wanted.end(), s.name) == wanted.end();
    });
  }

  std::optional<model::Checkpoint> resumed;
  if (opt.resume_from) resumed = model::load_checkpoint(*opt.resume_from);
  const bool warmup = cfg.backbone_warmup && !resumed && !opt.skip_warmup;

  std::vector<curriculum::StageConfig> stages;
  if (warmup) stages.push_back(*cfg.backbone_warmup);
  stages.insert(stages.end(), cfg.stages.begin(), cfg.stages.end());

  std::map<std::string, curriculum::Dataset> datasets;
  for (const auto& s : stages) {
    const auto it = cfg.datasets.find(s.data_source);
    if (it == cfg.datasets.end()) {
      throw ConfigError("stage '" + s.name + "' reads dataset '" + s.data_source + "', which is not defined");
    }
    if (!datasets.contains(s.data_source)) {
      datasets[s.data_source] = curriculum::load_dataset(it->first, it->second, cfg.seed);
    }
  }

  const auto& out_dir = cfg.output_dir;
  std::filesystem::create_directories(out_dir);
  util::DirectoryLock lock(out_dir);

  curriculum::Model model = resumed ? curriculum::Model{resumed->config, resumed->params}
                                    : curriculum::Model{cfg.model, model::init_params(cfg.model, cfg.seed)};
  curriculum::CurriculumOptions copts;
  copts.checkpoint_dir = out_dir;
  copts.on_stage_end = [&](const curriculum::StageConfig& s, const std::filesystem::path& p) {
    ctx.out << "stage " << s.name << " done: " << p.filename().string() << "\n";
  };
  auto result = curriculum::train_curriculum(std::move(model), stages, datasets, cfg.seed, copts);

  auto snapshot = cfg.snapshot();
  snapshot["executed_stages"] = util::Json::array();
  for (const auto& s : stages) snapshot["executed_stages"].push_back(s.name);
  snapshot["resumed_from_sha256"] = opt.resume_from ? util::Json(util::sha256_file(*opt.resume_from)) : util::Json(nullptr);
  const auto snapshot_text = snapshot.dump(2) + "\n";
  util::write_file_atomic(out_dir / "config.json", snapshot_text);
  util::write_file_atomic(out_dir / "train_log.jsonl", result.log.to_jsonl());

  util::Json summary{{"stages", util::Json::array()}};
  for (const auto& s : stages) {
    const auto steps = std::count_if(result.log.steps.begin(), result.log.steps.end(),
                                     [&](const auto& r) { return r.stage == s.name; });
    const std::int64_t window = std::max<std::int64_t>(1, std::min<std::int64_t>(10, steps / 4));
    const double start = result.log.smoothed_start(s.name, window);
    const double end = result.log.smoothed_end(s.name, window);
    summary["stages"].push_back({{"name", s.name},
                                 {"steps", steps},
                                 {"smoothing_window", window},
                                 {"loss_start", start},
                                 {"loss_end", end},
                                 {"loss_ratio", end / start},
                                 {"skipped_examples", result.log.skipped_examples[s.name]}});
    ctx.out << s.name << ": " << steps << " steps, smoothed loss " << start << " -> " << end << "\n";
  }
  util::write_file_atomic(out_dir / "train_summary.json", summary.dump(2) + "\n");
  util::Json timings = util::Json::object();
  for (const auto& [name, secs] : result.log.wall_seconds) timings[name] = secs;
  util::write_file_atomic(out_dir / "timings.json", timings.dump(2) + "\n");

  manifest.config_sha256 = util::sha256_hex(snapshot_text);
  manifest.seed = cfg.seed;
  manifest.inputs.push_back(digest_file("config", opt.config));
  if (opt.resume_from) manifest.inputs.push_back(digest_file("resume_from", *opt.resume_from));
  for (const auto& ckpt : result.checkpoints) {
    manifest.outputs.push_back(digest_file(ckpt.filename().string(), ckpt));
  }
  for (const char* name : {"config.json", "train_log.jsonl", "train_summary.json"}) {
    manifest.outputs.push_back(digest_file(name, out_dir / name));
  }
  manifest.volatile_outputs = {"timings.json"};
  write_manifest(out_dir / "manifest.json", manifest);
  return kExitOk;
}

}  // namespace

void register_train(CLI::App& app, Context& ctx, Action& action) {
  auto opt = std::make_shared<TrainOptions>();
  auto* sub = app.add_subcommand("train", "Run the staged training curriculum from a YAML run config");
  sub->add_option("--config", opt->config, "Run config (YAML)")->required()->check(CLI::ExistingFile);
  sub->add_option("--stages", opt->stages, "Comma-separated subset of configured stages to run, in config order");
  sub->add_option("--output-dir", opt->output_dir, "Overrides output_dir from the config");
  sub->add_option("--seed", opt->seed, "Overrides seed from the config");
  sub->add_option("--resume-from", opt->resume_from, "Start from this checkpoint instead of a fresh model")
      ->check(CLI::ExistingFile);
  sub->add_flag("--skip-warmup", opt->skip_warmup, "Do not run the configured backbone warm-up");
  sub->callback([opt, &ctx, &action] { action = [opt, &ctx] { return cmd_train(*opt, ctx); }; });
}

}  // namespace medvlm::cli
