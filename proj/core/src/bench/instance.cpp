// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/bench/instance.hpp"

#include <set>

#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"

namespace medvlm::bench {

std::vector<std::string> option_keys(std::size_t count) {
  if (count < 1 || count > 10) throw ValidationError("option count must be within 1..10");
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < count; ++i) keys.emplace_back(1, static_cast<char>('A' + i));
  return keys;
}

const Option* BenchmarkInstance::option(const std::string& key) const {
  for (const auto& o : options) {
    if (o.key == key) return &o;
  }
  return nullptr;
}

void BenchmarkInstance::validate() const {
  if (id.empty()) throw ValidationError("instance with empty id");
  if (!options.empty()) {
    const auto keys = option_keys(options.size());
    for (std::size_t i = 0; i < options.size(); ++i) {
      if (options[i].key != keys[i]) {
        throw ValidationError("instance '" + id + "': option keys must run A.. contiguously");
      }
    }
  }
  if (!answer_key.empty() && option(answer_key) == nullptr) {
    throw ValidationError("instance '" + id + "': answer key '" + answer_key + "' is not an option");
  }
  for (const auto& shot : shots) {
    if (shot.id == id) throw ValidationError("instance '" + id + "' lists itself as a shot");
    shot.validate();
  }
}

util::Json BenchmarkInstance::to_json() const {
  util::Json j;
  j["id"] = id;
  j["dataset"] = dataset;
  j["subject"] = subject ? util::Json(*subject) : util::Json(nullptr);
  j["question"] = question;
  auto opts = util::Json::array();
  for (const auto& o : options) opts.push_back({{"key", o.key}, {"text", o.text}});
  j["options"] = opts;
  j["answer_key"] = answer_key;
  j["images"] = images;
  auto shot_json = util::Json::array();
  for (const auto& s : shots) shot_json.push_back(s.to_json());
  j["shots"] = shot_json;
  j["meta"] = util::Json::object();
  for (const auto& [k, v] : meta) j["meta"][k] = v;
  return j;
}

BenchmarkInstance BenchmarkInstance::from_json(const util::Json& j) {
  BenchmarkInstance inst;
  try {
    inst.id = j.at("id").get<std::string>();
    inst.dataset = j.value("dataset", std::string());
    if (j.contains("subject") && !j["subject"].is_null()) inst.subject = j["subject"].get<std::string>();
    inst.question = j.at("question").get<std::string>();
    for (const auto& o : j.value("options", util::Json::array())) {
      inst.options.push_back({o.at("key").get<std::string>(), o.at("text").get<std::string>()});
    }
    inst.answer_key = j.value("answer_key", std::string());
    inst.images = j.value("images", std::vector<std::string>{});
    for (const auto& s : j.value("shots", util::Json::array())) inst.shots.push_back(from_json(s));
    const util::Json meta = j.value("meta", util::Json::object());
    for (const auto& [k, v] : meta.items()) inst.meta[k] = v.get<std::string>();
  } catch (const util::Json::exception& e) {
    throw ValidationError(std::string("malformed benchmark instance: ") + e.what());
  }
  inst.validate();
  return inst;
}

std::string serialize_benchmark(const std::vector<BenchmarkInstance>& instances) {
  std::vector<util::Json> rows;
  rows.reserve(instances.size());
  for (const auto& inst : instances) rows.push_back(inst.to_json());
  return util::to_jsonl(rows);
}

std::vector<BenchmarkInstance> parse_benchmark(const std::string& text, const std::string& source) {
  std::vector<BenchmarkInstance> out;
  std::set<std::string> seen;
  std::size_t n = 0;
  for (const auto& row : util::parse_jsonl(text, source)) {
    ++n;
    try {
      out.push_back(BenchmarkInstance::from_json(row));
    } catch (const ValidationError& e) {
      throw ValidationError(source + ": record " + std::to_string(n) + ": " + e.what());
    }
    if (!seen.insert(out.back().id).second) {
      throw ValidationError(source + ": duplicate instance id '" + out.back().id + "'");
    }
  }
  return out;
}

std::vector<BenchmarkInstance> read_benchmark(const std::filesystem::path& path) {
  return parse_benchmark(util::read_file(path), path.string());
}

void write_benchmark(const std::filesystem::path& path, const std::vector<BenchmarkInstance>& instances) {
  util::write_file_atomic(path, serialize_benchmark(instances));
}

}  // namespace medvlm::bench
