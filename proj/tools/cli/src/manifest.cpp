// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/cli/manifest.hpp"

#include <chrono>
#include <ctime>

#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::cli {

FileDigest digest_file(std::string name, const std::filesystem::path& path) {
  return {std::move(name), util::sha256_file(path)};
}

util::Json RunManifest::content() const {
  auto files = [](const std::vector<FileDigest>& v) {
    auto arr = util::Json::array();
    for (const auto& f : v) arr.push_back({{"name", f.name}, {"sha256", f.sha256}});
    return arr;
  };
  return {{"command", command},
          {"tool_version", tool_version},
          {"config_sha256", config_sha256},
          {"seed", seed ? util::Json(*seed) : util::Json(nullptr)},
          {"inputs", files(inputs)},
          {"outputs", files(outputs)},
          {"volatile_outputs", volatile_outputs}};
}

std::string RunManifest::digest() const { return util::sha256_hex(content().dump()); }

util::Json RunManifest::to_json() const {
  auto j = content();
  j["digest"] = digest();
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  return j;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest start_manifest(std::string command, std::string tool_version) {
  RunManifest m;
  m.command = std::move(command);
  m.tool_version = std::move(tool_version);
  m.started_at = utc_now();
  return m;
}

void write_manifest(const std::filesystem::path& path, RunManifest& manifest) {
  manifest.finished_at = utc_now();
  util::write_file_atomic(path, manifest.to_json().dump(2) + "\n");
}

}  // namespace medvlm::cli
