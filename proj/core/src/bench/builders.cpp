// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/bench/builders.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "medvlm/bench/text.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/random.hpp"

namespace medvlm::bench {
namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string or_missing(const std::string& s) {
  const auto c = collapse_whitespace(s);
  return c.empty() ? "Not provided" : c;
}

std::string criteria_block(const std::string& label, const std::string& raw) {
  const auto lines = clean_criteria(raw);
  if (lines.empty()) return label + ": Not provided";
  std::string out = label + ":";
  for (const auto& l : lines) out += "\n- " + l;
  return out;
}

}  // namespace

BuildResult aggregate_subjects(const std::vector<BenchmarkInstance>& records,
                               const std::vector<std::string>& allowlist) {
  const std::set<std::string> allowed(allowlist.begin(), allowlist.end());
  BuildResult result;
  for (const auto& r : records) {
    if (!r.subject) throw ValidationError("record '" + r.id + "' has no subject tag");
    if (allowed.contains(*r.subject)) result.instances.push_back(r);
  }
  if (result.instances.empty()) result.warnings.push_back("no records matched the subject allowlist");
  return result;
}

std::string map_qrel_to_label(int grade) {
  switch (grade) {
    case 2:
      return "eligible";
    case 1:
      return "partially eligible";
    case 0:
      return "not eligible";
    default:
      throw ValidationError("qrel grade " + std::to_string(grade) + " is outside {0, 1, 2}");
  }
}

const std::vector<std::string>& eligibility_options() {
  static const std::vector<std::string> options{"eligible", "partially eligible", "not eligible",
                                                "not enough information"};
  return options;
}

std::string build_trial_prompt(const TrialDoc& trial) {
  std::string out;
  out += "Title: " + or_missing(trial.title) + "\n";
  out += "Diseases: " + or_missing(join(trial.diseases, "; ")) + "\n";
  out += "Interventions: " + or_missing(join(trial.interventions, "; ")) + "\n";
  out += "Summary: " + or_missing(trial.summary) + "\n";
  out += criteria_block("Inclusion criteria", trial.inclusion) + "\n";
  out += criteria_block("Exclusion criteria", trial.exclusion);
  return out;
}

ShuffledOptions shuffle_options(const std::vector<Option>& options, const std::string& answer_key,
                                const std::string& instance_id, std::uint64_t seed) {
  const auto gold = std::find_if(options.begin(), options.end(), [&](const Option& o) { return o.key == answer_key; });
  if (gold == options.end()) {
    throw ValidationError("instance '" + instance_id + "': answer key '" + answer_key + "' not among options");
  }
  std::vector<std::size_t> order(options.size());
  std::iota(order.begin(), order.end(), 0);
  util::CounterRng rng(seed, instance_id);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  const auto keys = option_keys(options.size());
  ShuffledOptions out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& src = options[order[i]];
    out.options.push_back({keys[i], src.text});
    if (order[i] == static_cast<std::size_t>(gold - options.begin())) out.answer_key = keys[i];
  }
  return out;
}

BuildResult build_patient_trial_bench(const std::map<std::string, std::string>& notes,
                                      const std::map<std::string, TrialDoc>& trials,
                                      const std::vector<QrelRecord>& qrels, std::uint64_t seed) {
  BuildResult result;
  std::set<std::string> seen;
  const auto& labels = eligibility_options();
  const auto keys = option_keys(labels.size());
  for (std::size_t n = 0; n < qrels.size(); ++n) {
    const auto& q = qrels[n];
    const std::string pair = q.patient_id + "::" + q.trial_id;
    const std::string item = "qrel " + std::to_string(n + 1) + " (" + pair + ")";
    std::string label;
    try {
      label = map_qrel_to_label(q.grade);
    } catch (const ValidationError& e) {
      result.report.push_back({item, e.what()});
      continue;
    }
    const auto note = notes.find(q.patient_id);
    if (note == notes.end()) {
      result.report.push_back({item, "unknown patient '" + q.patient_id + "'"});
      continue;
    }
    const auto trial = trials.find(q.trial_id);
    if (trial == trials.end()) {
      result.report.push_back({item, "unknown trial '" + q.trial_id + "'"});
      continue;
    }
    if (!seen.insert(pair).second) {
      result.report.push_back({item, "duplicate judgment for this pair"});
      continue;
    }
    std::vector<Option> options;
    std::string gold;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      options.push_back({keys[i], labels[i]});
      if (labels[i] == label) gold = keys[i];
    }
    auto shuffled = shuffle_options(options, gold, pair, seed);

    std::string question = "Patient note:\n";
    for (const auto& s : segment_sentences(note->second)) question += s.id + ": " + s.text + "\n";
    question += "\nClinical trial:\n" + build_trial_prompt(trial->second) + "\n\n";
    question += "Given the patient note and the trial criteria, what is the patient's eligibility for this trial?";

    BenchmarkInstance inst;
    inst.id = pair;
    inst.dataset = "patient-trial";
    inst.question = std::move(question);
    inst.options = std::move(shuffled.options);
    inst.answer_key = std::move(shuffled.answer_key);
    inst.meta = {{"patient_id", q.patient_id}, {"trial_id", q.trial_id}, {"grade", std::to_string(q.grade)},
                 {"label", label}};
    result.instances.push_back(std::move(inst));
  }
  return result;
}

BuildResult build_impression_bench(const std::vector<StudyRecord>& studies, const std::vector<ReportRecord>& reports,
                                   int shots, std::uint64_t seed, const std::filesystem::path& image_root) {
  if (shots != 0 && shots != 1) throw ConfigError("impression shots must be 0 or 1");
  std::map<std::string, std::string> impressions;
  for (const auto& r : reports) impressions.emplace(r.study_id, r.impression);

  BuildResult result;
  std::set<std::string> seen;
  for (const auto& s : studies) {
    const std::string item = "study " + s.study_id;
    if (!seen.insert(s.study_id).second) {
      result.report.push_back({item, "duplicate study id"});
      continue;
    }
    const auto it = impressions.find(s.study_id);
    const auto impression = it == impressions.end() ? std::string() : collapse_whitespace(it->second);
    if (impression.empty()) {
      result.report.push_back({item, "missing impression"});
      continue;
    }
    if (s.images.empty()) {
      result.report.push_back({item, "no image files"});
      continue;
    }
    const auto missing = std::find_if(s.images.begin(), s.images.end(), [&](const std::string& img) {
      std::error_code ec;
      return !std::filesystem::is_regular_file(image_root / img, ec);
    });
    if (missing != s.images.end()) {
      result.report.push_back({item, "image file unavailable: " + *missing});
      continue;
    }
    BenchmarkInstance inst;
    inst.id = s.study_id;
    inst.dataset = "impression";
    inst.question = kImpressionQuestion;
    inst.images = s.images;
    inst.meta = {{"reference", impression}};
    result.instances.push_back(std::move(inst));
  }

  if (shots == 1) {
    const auto pool = result.instances;
    if (pool.size() < 2 && !pool.empty()) {
      throw ValidationError("1-shot impression benchmark needs at least two included studies");
    }
    for (std::size_t i = 0; i < result.instances.size(); ++i) {
      util::CounterRng rng(seed, pool[i].id);
      auto j = static_cast<std::size_t>(rng.below(pool.size() - 1));
      if (j >= i) ++j;
      auto& inst = result.instances[i];
      inst.shots = {pool[j]};
      inst.meta["shot_id"] = pool[j].id;
    }
  }
  return result;
}

}  // namespace medvlm::bench
