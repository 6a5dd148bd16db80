// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <memory>
#include <ostream>
#include <set>

#include "commands.hpp"
#include "medvlm/bench/instance.hpp"
#include "medvlm/cli/manifest.hpp"
#include "medvlm/eval/harness.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::cli {
namespace {

struct EvalOptions {
  std::filesystem::path bench;
  std::string endpoint;
  std::string template_id = "medvlm-chat-v1";
  std::filesystem::path out;
  int concurrency = 1;
  std::string model;
  double timeout = 120.0;
  int retries = 3;
  std::int64_t max_new_tokens = 2048;
  std::vector<std::string> stop;
  std::optional<std::filesystem::path> image_root;
  bool no_resume = false;
};

int cmd_eval(const EvalOptions& opt, Context& ctx) {
  auto manifest = start_manifest("eval", tool_version());
  const auto benchmark = bench::read_benchmark(opt.bench);
  eval::EndpointConfig endpoint;
  endpoint.model = opt.model;
  endpoint.timeout_seconds = opt.timeout;
  endpoint.max_retries = opt.retries;
  endpoint.max_concurrency = opt.concurrency;
  endpoint.decode.max_new_tokens = opt.max_new_tokens;
  endpoint.decode.stop = opt.stop;
  if (const char* key = std::getenv("MEDVLM_API_KEY")) endpoint.api_key = key;
  endpoint.validate();
  eval::find_template(opt.template_id);

  const auto root = opt.image_root ? *opt.image_root : opt.bench.parent_path();
  auto decoder = eval::make_decoder(opt.endpoint, endpoint, root);
  eval::RunOptions run;
  run.template_id = opt.template_id;
  run.concurrency = opt.concurrency;
  run.resume = !opt.no_resume;
  const auto bench_sha = util::sha256_file(opt.bench);
  run.extra_config = {{"benchmark_sha256", bench_sha}};
  const auto summary = eval::run_eval(benchmark, *decoder, opt.out, run);

  ctx.out << summary.score.to_table();
  manifest.config_sha256 = summary.config_sha256;
  manifest.inputs.push_back({"bench", bench_sha});
  if (opt.endpoint.starts_with("local:")) manifest.inputs.push_back(digest_file("checkpoint", opt.endpoint.substr(6)));
  for (const char* name : {"results.jsonl", "summary.json", "summary.txt"}) {
    manifest.outputs.push_back(digest_file(name, opt.out / name));
  }
  manifest.volatile_outputs = {"timings.jsonl"};
  write_manifest(opt.out / "manifest.json", manifest);

  std::int64_t failed = 0;
  for (const auto& [status, n] : summary.score.failures) failed += n;
  if (failed > 0) {
    ctx.err << "error: " << failed << " instance(s) failed to decode; they are scored incorrect\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct ScoreOptions {
  std::filesystem::path results;
  std::optional<std::filesystem::path> bench;
  std::filesystem::path out;
};

int cmd_score(const ScoreOptions& opt, Context& ctx) {
  auto manifest = start_manifest("score", tool_version());
  const auto records = eval::read_records(opt.results);
  if (opt.bench) {
    const auto benchmark = bench::read_benchmark(*opt.bench);
    std::set<std::string> expected;
    for (const auto& inst : benchmark) expected.insert(inst.id);
    std::set<std::string> got;
    for (const auto& r : records) {
      if (!expected.contains(r.id)) throw ValidationError("record '" + r.id + "' is not in the benchmark");
      got.insert(r.id);
    }
    if (got.size() != expected.size() || records.size() != benchmark.size()) {
      throw ValidationError("results do not cover every benchmark instance exactly once");
    }
    manifest.inputs.push_back(digest_file("bench", *opt.bench));
  }
  const auto report = eval::score(records);
  if (!opt.out.parent_path().empty()) std::filesystem::create_directories(opt.out.parent_path());
  util::write_file_atomic(opt.out, report.to_json().dump(2) + "\n");
  ctx.out << report.to_table();

  manifest.config_sha256 = util::sha256_hex(util::Json{{"protocol", "exact-match"}}.dump());
  manifest.inputs.push_back(digest_file("results", opt.results));
  manifest.outputs.push_back(digest_file(opt.out.filename().string(), opt.out));
  write_manifest(manifest_for(opt.out), manifest);
  return kExitOk;
}

}  // namespace

void register_eval(CLI::App& app, Context& ctx, Action& action) {
  auto opt = std::make_shared<EvalOptions>();
  auto* sub = app.add_subcommand("eval", "Decode every benchmark instance once and record extracted answers");
  sub->add_option("--bench", opt->bench, "Benchmark file")->required()->check(CLI::ExistingFile);
  sub->add_option("--endpoint", opt->endpoint, "Chat-completions base URL, or local:CHECKPOINT")->required();
  sub->add_option("--template", opt->template_id, "Prompt template id")->capture_default_str();
  sub->add_option("--out", opt->out, "Output directory")->required();
  sub->add_option("--concurrency", opt->concurrency, "Maximum requests in flight")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--model", opt->model, "Model name sent to the endpoint");
  sub->add_option("--timeout", opt->timeout, "Per-request timeout in seconds")->capture_default_str();
  sub->add_option("--retries", opt->retries, "Retries on transport failure")->capture_default_str();
  sub->add_option("--max-new-tokens", opt->max_new_tokens, "Generation budget")->capture_default_str();
  sub->add_option("--stop", opt->stop, "Stop sequence (repeatable)");
  sub->add_option("--image-root", opt->image_root, "Directory image paths are relative to (default: bench dir)");
  sub->add_flag("--no-resume", opt->no_resume, "Ignore results already present in --out");
  sub->callback([opt, &ctx, &action] { action = [opt, &ctx] { return cmd_eval(*opt, ctx); }; });
}

void register_score(CLI::App& app, Context& ctx, Action& action) {
  auto opt = std::make_shared<ScoreOptions>();
  auto* sub = app.add_subcommand("score", "Exact-match accuracy with per-dataset and per-subject breakdowns");
  sub->add_option("--results", opt->results, "results.jsonl from eval")->required()->check(CLI::ExistingFile);
  sub->add_option("--bench", opt->bench, "Benchmark file; checks one record per instance")->check(CLI::ExistingFile);
  sub->add_option("--out", opt->out, "Score report (JSON)")->required();
  sub->callback([opt, &ctx, &action] { action = [opt, &ctx] { return cmd_score(*opt, ctx); }; });
}

}  // namespace medvlm::cli
