// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/eval/harness.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "medvlm/eval/extract.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::eval {
namespace {

void tally(Tally& t, bool correct) {
  ++t.total;
  if (correct) ++t.correct;
}

// Leading records of `path` that line up with the benchmark prefix.
std::vector<EvalRecord> load_prefix(const std::filesystem::path& path,
                                    const std::vector<bench::BenchmarkInstance>& benchmark) {
  std::vector<EvalRecord> out;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return out;
  std::istringstream in(util::read_file(path));
  std::string line;
  while (std::getline(in, line) && out.size() < benchmark.size()) {
    if (line.empty()) continue;
    EvalRecord r;
    try {
      r = EvalRecord::from_json(util::Json::parse(line));
    } catch (const std::exception&) {
      break;  // a torn final line from an interrupted run
    }
    if (r.id != benchmark[out.size()].id) {
      throw ValidationError(path.string() + ": record '" + r.id + "' does not match benchmark order; refusing to resume");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

util::Json EvalRecord::to_json() const {
  return {{"id", id},
          {"dataset", dataset},
          {"subject", subject ? util::Json(*subject) : util::Json(nullptr)},
          {"status", status},
          {"raw_output", raw_output},
          {"extracted", extracted ? util::Json(*extracted) : util::Json(nullptr)},
          {"gold", gold},
          {"correct", correct}};
}

EvalRecord EvalRecord::from_json(const util::Json& j) {
  EvalRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.dataset = j.value("dataset", std::string());
    if (j.contains("subject") && !j["subject"].is_null()) r.subject = j["subject"].get<std::string>();
    r.status = j.value("status", std::string("ok"));
    r.raw_output = j.value("raw_output", std::string());
    if (j.contains("extracted") && !j["extracted"].is_null()) r.extracted = j["extracted"].get<std::string>();
    r.gold = j.value("gold", std::string());
    r.correct = j.value("correct", false);
  } catch (const util::Json::exception& e) {
    throw ValidationError(std::string("malformed eval record: ") + e.what());
  }
  if (r.correct != (r.extracted.has_value() && !r.gold.empty() && *r.extracted == r.gold)) {
    throw ValidationError("eval record '" + r.id + "': correct flag disagrees with extracted/gold");
  }
  return r;
}

EvalRecord make_record(const bench::BenchmarkInstance& instance, const DecodeResult& result) {
  EvalRecord r;
  r.id = instance.id;
  r.dataset = instance.dataset;
  r.subject = instance.subject;
  r.status = to_string(result.status);
  r.raw_output = result.text;
  r.gold = instance.answer_key;
  if (result.status == DecodeStatus::ok && instance.is_multiple_choice()) {
    r.extracted = extract_option(result.text, instance.options);
  }
  r.correct = r.extracted.has_value() && !r.gold.empty() && *r.extracted == r.gold;
  return r;
}

std::string Tally::accuracy() const {
  if (total == 0) return "0.00";
  // Basis points, rounded half up.
  const std::int64_t bp = (correct * 20000 + total) / (2 * total);
  const auto frac = bp % 100;
  return std::to_string(bp / 100) + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
}

util::Json Tally::to_json() const {
  return {{"total", total}, {"correct", correct}, {"accuracy", util::Json::parse(accuracy())}};
}

util::Json ScoreReport::to_json() const {
  util::Json j{{"overall", overall.to_json()}};
  j["by_dataset"] = util::Json::object();
  for (const auto& [k, t] : by_dataset) j["by_dataset"][k] = t.to_json();
  j["by_subject"] = util::Json::object();
  for (const auto& [k, t] : by_subject) j["by_subject"][k] = t.to_json();
  j["null_extractions"] = null_extractions;
  j["failures"] = util::Json::object();
  for (const auto& [k, n] : failures) j["failures"][k] = n;
  j["generation_items"] = generation_items;
  return j;
}

std::string ScoreReport::to_table() const {
  std::ostringstream out;
  auto row = [&](const std::string& name, const Tally& t) {
    out << name;
    for (std::size_t i = name.size(); i < 40; ++i) out << ' ';
    out << t.correct << "/" << t.total << "  " << t.accuracy() << "\n";
  };
  row("overall", overall);
  for (const auto& [k, t] : by_dataset) row("dataset:" + k, t);
  for (const auto& [k, t] : by_subject) row("subject:" + k, t);
  out << "null extractions: " << null_extractions << "\n";
  for (const auto& [k, n] : failures) out << "failed (" << k << "): " << n << "\n";
  if (generation_items > 0) out << "generation items (unscored): " << generation_items << "\n";
  return out.str();
}

ScoreReport score(const std::vector<EvalRecord>& records) {
  ScoreReport report;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) throw ValidationError("duplicate record for instance '" + r.id + "'");
    if (r.status != "ok") ++report.failures[r.status];
    if (r.gold.empty()) {
      ++report.generation_items;
      continue;
    }
    const bool correct = r.extracted.has_value() && *r.extracted == r.gold;
    if (r.status == "ok" && !r.extracted) ++report.null_extractions;
    tally(report.overall, correct);
    tally(report.by_dataset[r.dataset], correct);
    if (r.subject) tally(report.by_subject[*r.subject], correct);
  }
  return report;
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::vector<EvalRecord> out;
  for (const auto& j : util::read_jsonl(path)) out.push_back(EvalRecord::from_json(j));
  return out;
}

util::Json RunSummary::to_json() const {
  return {{"instances", instances}, {"config_sha256", config_sha256}, {"score", score.to_json()}};
}

RunSummary run_eval(const std::vector<bench::BenchmarkInstance>& benchmark, Decoder& decoder,
                    const std::filesystem::path& out_dir, const RunOptions& options) {
  if (options.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  find_template(options.template_id);
  std::filesystem::create_directories(out_dir);
  util::DirectoryLock lock(out_dir);

  const auto results_path = out_dir / "results.jsonl";
  const auto partial_path = out_dir / "results.jsonl.partial";

  std::vector<EvalRecord> done;
  if (options.resume) {
    done = load_prefix(results_path, benchmark);
    if (done.size() < benchmark.size()) {
      auto partial = load_prefix(partial_path, benchmark);
      if (partial.size() > done.size()) done = std::move(partial);
    }
  }
  const std::size_t first = done.size();
  const std::size_t n = benchmark.size();

  // The partial file is rewritten with the resumed prefix, then appended in order.
  {
    std::ofstream out(partial_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + partial_path.string());
    for (const auto& r : done) out << r.to_json().dump() << "\n";
  }
  std::ofstream partial(partial_path, std::ios::binary | std::ios::app);
  if (!partial) throw IoError("cannot append to " + partial_path.string());

  std::vector<std::optional<DecodeResult>> slots(n);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{first};
  std::atomic<bool> stop{false};
  std::exception_ptr worker_error;

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      DecodeResult res;
      try {
        res = decoder.decode(format_prompt(benchmark[i], options.template_id));
      } catch (...) {
        std::lock_guard lk(mutex);
        if (!worker_error) worker_error = std::current_exception();
        stop = true;
        ready.notify_all();
        return;
      }
      std::lock_guard lk(mutex);
      slots[i] = std::move(res);
      ready.notify_all();
    }
  };

  const auto workers = static_cast<std::size_t>(options.concurrency);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n - first); ++w) pool.emplace_back(worker);

  std::vector<util::Json> timings;
  std::exception_ptr commit_error;
  for (std::size_t i = first; i < n; ++i) {
    DecodeResult res;
    {
      std::unique_lock lk(mutex);
      ready.wait(lk, [&] { return slots[i].has_value() || worker_error; });
      if (!slots[i]) break;
      res = std::move(*slots[i]);
      slots[i].reset();
    }
    auto record = make_record(benchmark[i], res);
    partial << record.to_json().dump() << "\n";
    partial.flush();
    if (!partial) {
      commit_error = std::make_exception_ptr(IoError("write failed: " + partial_path.string()));
      stop = true;
      break;
    }
    timings.push_back({{"id", record.id}, {"latency_ms", res.latency_ms}, {"attempts", res.attempts},
                       {"error", res.error}});
    done.push_back(std::move(record));
  }
  for (auto& t : pool) t.join();
  partial.close();
  if (commit_error) std::rethrow_exception(commit_error);
  if (worker_error) std::rethrow_exception(worker_error);

  std::filesystem::rename(partial_path, results_path);
  util::write_file_atomic(out_dir / "timings.jsonl", util::to_jsonl(timings));

  RunSummary summary;
  summary.instances = static_cast<std::int64_t>(n);
  summary.requested = static_cast<std::int64_t>(n - first);
  util::Json config{{"decoder", decoder.describe()}, {"template", options.template_id},
                    {"extra", options.extra_config}};
  summary.config_sha256 = util::sha256_hex(config.dump());
  summary.score = score(done);
  auto summary_json = summary.to_json();
  summary_json["config"] = config;
  util::write_file_atomic(out_dir / "summary.json", summary_json.dump(2) + "\n");
  util::write_file_atomic(out_dir / "summary.txt",
                          "config sha256: " + summary.config_sha256 + "\n" + summary.score.to_table());
  return summary;
}

}  // namespace medvlm::eval
