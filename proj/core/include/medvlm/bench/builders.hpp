// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "medvlm/bench/instance.hpp"
#include "medvlm/util/jsonl.hpp"

namespace medvlm::bench {

inline const std::vector<std::string> kMmluMedSubjects{
    "anatomy",           "clinical_knowledge", "college_biology",      "college_medicine",
    "medical_genetics",  "nutrition",          "professional_medicine"};
inline const std::vector<std::string> kMmmuMedSubjects{
    "Basic_Medical_Science", "Clinical_Medicine", "Diagnostics_and_Laboratory_Medicine", "Pharmacy", "Public_Health"};

/// A skipped input row and why.
struct ReportEntry {
  std::string item;
  std::string reason;

  util::Json to_json() const { return {{"item", item}, {"reason", reason}}; }
  bool operator==(const ReportEntry&) const = default;
};

struct BuildResult {
  std::vector<BenchmarkInstance> instances;
  std::vector<ReportEntry> report;
  std::vector<std::string> warnings;
};

/// Keeps records whose subject is allowlisted, in input order. An empty
/// result adds a warning.
BuildResult aggregate_subjects(const std::vector<BenchmarkInstance>& records,
                               const std::vector<std::string>& allowlist);

/// 2 -> "eligible", 1 -> "partially eligible", 0 -> "not eligible".
std::string map_qrel_to_label(int grade);

struct QrelRecord {
  std::string patient_id;
  std::string trial_id;
  int grade = 0;
};

struct TrialDoc {
  std::string trial_id;
  std::string title;
  std::vector<std::string> diseases;
  std::vector<std::string> interventions;
  std::string summary;
  std::string inclusion;  // raw text
  std::string exclusion;  // raw text
};

/// Title, Diseases, Interventions, Summary, Inclusion criteria, Exclusion
/// criteria in that order; empty fields read "Not provided".
std::string build_trial_prompt(const TrialDoc& trial);

struct ShuffledOptions {
  std::vector<Option> options;
  std::string answer_key;
};

/// Fisher-Yates under CounterRng(seed, instance_id), re-keyed A.. in the new order.
ShuffledOptions shuffle_options(const std::vector<Option>& options, const std::string& answer_key,
                                const std::string& instance_id, std::uint64_t seed);

/// The four fixed eligibility options in canonical order. The last one is a
/// distractor that no grade maps to.
const std::vector<std::string>& eligibility_options();

/// One instance per valid qrel whose patient and trial resolve, in qrel order.
/// Invalid grades, unresolvable references and repeated pairs go to the report.
BuildResult build_patient_trial_bench(const std::map<std::string, std::string>& notes,
                                      const std::map<std::string, TrialDoc>& trials,
                                      const std::vector<QrelRecord>& qrels, std::uint64_t seed);

struct StudyRecord {
  std::string study_id;
  std::vector<std::string> images;  // relative to the image root
};

struct ReportRecord {
  std::string study_id;
  std::string impression;
};

/// Inner join on study id in study order. Studies without an impression or
/// with an unreadable image are reported and skipped. With shots = 1 each
/// instance gets one exemplar drawn from the other included studies.
BuildResult build_impression_bench(const std::vector<StudyRecord>& studies, const std::vector<ReportRecord>& reports,
                                   int shots, std::uint64_t seed, const std::filesystem::path& image_root);

inline constexpr const char* kImpressionQuestion =
    "Write the Impression section of the radiology report for this study.";

}  // namespace medvlm::bench
