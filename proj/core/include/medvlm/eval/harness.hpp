// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medvlm/bench/instance.hpp"
#include "medvlm/eval/decoder.hpp"
#include "medvlm/util/jsonl.hpp"

namespace medvlm::eval {

/// One scored response. Latency and attempt counts are kept out of this
/// record so results files stay byte-reproducible; they go to timings.jsonl.
struct EvalRecord {
  std::string id;
  std::string dataset;
  std::optional<std::string> subject;
  std::string status = "ok";
  std::string raw_output;
  std::optional<std::string> extracted;
  std::string gold;  // empty for generation items
  bool correct = false;

  util::Json to_json() const;
  static EvalRecord from_json(const util::Json& j);
  bool operator==(const EvalRecord&) const = default;
};

/// Builds the record for one decode: extraction runs only on successful
/// decodes of multiple-choice items, and correct means extracted == gold.
EvalRecord make_record(const bench::BenchmarkInstance& instance, const DecodeResult& result);

struct Tally {
  std::int64_t total = 0;
  std::int64_t correct = 0;
  /// Percentage rounded half-up to two decimals, computed in integers.
  std::string accuracy() const;
  util::Json to_json() const;
};

struct ScoreReport {
  Tally overall;
  std::map<std::string, Tally> by_dataset;
  std::map<std::string, Tally> by_subject;
  std::int64_t null_extractions = 0;
  std::map<std::string, std::int64_t> failures;  // non-ok status -> count
  std::int64_t generation_items = 0;            // not part of accuracy

  util::Json to_json() const;
  std::string to_table() const;
};

/// Multiple-choice accuracy with breakdowns. Throws ValidationError on a
/// repeated id.
ScoreReport score(const std::vector<EvalRecord>& records);

std::vector<EvalRecord> read_records(const std::filesystem::path& path);

struct RunOptions {
  std::string template_id = "medvlm-chat-v1";
  int concurrency = 1;
  bool resume = true;
  /// Part of the summary's config snapshot, e.g. the benchmark file digest.
  util::Json extra_config = util::Json::object();
};

struct RunSummary {
  std::int64_t instances = 0;
  std::int64_t requested = 0;  // decoded in this run (not resumed)
  std::string config_sha256;
  ScoreReport score;
  util::Json to_json() const;
};

/// Decodes every instance with bounded concurrency and writes, in benchmark
/// order, results.jsonl, timings.jsonl, summary.json and summary.txt under
/// `out_dir`. Records are committed in order to results.jsonl.partial as
/// they become available; with `resume` an existing partial or complete
/// results file supplies records that are not requested again. An I/O
/// failure leaves the .partial file in place. The directory is locked.
RunSummary run_eval(const std::vector<bench::BenchmarkInstance>& benchmark, Decoder& decoder,
                    const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace medvlm::eval
