// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/bench/adapters.hpp"

#include <charconv>
#include <optional>
#include <sstream>

#include "medvlm/util/csv.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/jsonl.hpp"

namespace medvlm::bench {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t' || c == ',' || c == ' ' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<int> parse_int(const std::string& s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> string_list(const util::Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  if (j[key].is_string()) return {j[key].get<std::string>()};
  return j[key].get<std::vector<std::string>>();
}

}  // namespace

std::vector<QrelRecord> read_qrels(const std::filesystem::path& path) {
  std::istringstream in(util::read_file(path));
  std::vector<QrelRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f.size() != 3 && f.size() != 4) {
      throw ValidationError(path.string() + ":" + std::to_string(n) + ": expected 3 or 4 fields");
    }
    const auto grade = parse_int(f.back());
    if (!grade) {
      if (out.empty() && n == 1) continue;  // header
      throw ValidationError(path.string() + ":" + std::to_string(n) + ": grade '" + f.back() + "' is not an integer");
    }
    out.push_back({f[0], f.size() == 4 ? f[2] : f[1], *grade});
  }
  return out;
}

std::map<std::string, TrialDoc> read_trials(const std::filesystem::path& path) {
  std::map<std::string, TrialDoc> out;
  for (const auto& j : util::read_jsonl(path)) {
    TrialDoc t;
    try {
      t.trial_id = j.at("trial_id").get<std::string>();
      t.title = j.value("title", std::string());
      t.diseases = string_list(j, "diseases");
      t.interventions = string_list(j, "interventions");
      t.summary = j.value("summary", std::string());
      t.inclusion = j.value("inclusion", std::string());
      t.exclusion = j.value("exclusion", std::string());
    } catch (const util::Json::exception& e) {
      throw ValidationError(path.string() + ": malformed trial: " + e.what());
    }
    if (t.trial_id.empty()) throw ValidationError(path.string() + ": trial with empty trial_id");
    if (!out.emplace(t.trial_id, t).second) {
      throw ValidationError(path.string() + ": duplicate trial '" + t.trial_id + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> read_notes(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& j : util::read_jsonl(path)) {
    try {
      const auto id = j.at("patient_id").get<std::string>();
      if (!out.emplace(id, j.at("note").get<std::string>()).second) {
        throw ValidationError(path.string() + ": duplicate patient '" + id + "'");
      }
    } catch (const util::Json::exception& e) {
      throw ValidationError(path.string() + ": malformed note: " + e.what());
    }
  }
  return out;
}

std::vector<StudyRecord> read_studies(const std::filesystem::path& path) {
  const auto table = util::read_csv_table(path);
  const auto id_col = table.column("study_id");
  const auto img_col = table.column("image");
  std::vector<StudyRecord> out;
  std::map<std::string, std::size_t> index;
  for (const auto& row : table.rows) {
    const auto& id = row[id_col];
    auto [it, fresh] = index.emplace(id, out.size());
    if (fresh) out.push_back({id, {}});
    if (!row[img_col].empty()) out[it->second].images.push_back(row[img_col]);
  }
  return out;
}

std::vector<ReportRecord> read_reports(const std::filesystem::path& path) {
  const auto table = util::read_csv_table(path);
  const auto id_col = table.column("study_id");
  const auto imp_col = table.column("impression");
  std::vector<ReportRecord> out;
  for (const auto& row : table.rows) out.push_back({row[id_col], row[imp_col]});
  return out;
}

}  // namespace medvlm::bench
