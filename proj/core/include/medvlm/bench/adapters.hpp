// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Readers for the raw inputs of the benchmark builders.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "medvlm/bench/builders.hpp"

namespace medvlm::bench {

/// Delimited qrels, one judgment per line: "patient trial grade" or the
/// four-column "patient iteration trial grade". Tabs, commas and spaces all
/// delimit. A leading header line is skipped. Grades are not range-checked
/// here; that is the builder's job.
std::vector<QrelRecord> read_qrels(const std::filesystem::path& path);

/// JSONL {trial_id, title, diseases[], interventions[], summary, inclusion, exclusion}.
std::map<std::string, TrialDoc> read_trials(const std::filesystem::path& path);

/// JSONL {patient_id, note}.
std::map<std::string, std::string> read_notes(const std::filesystem::path& path);

/// CSV with columns study_id and image; one row per image, rows of a study
/// grouped in first-appearance order.
std::vector<StudyRecord> read_studies(const std::filesystem::path& path);

/// CSV with columns study_id and impression.
std::vector<ReportRecord> read_reports(const std::filesystem::path& path);

}  // namespace medvlm::bench
