// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "medvlm/util/jsonl.hpp"

namespace medvlm::cli {

struct FileDigest {
  std::string name;  // role for inputs, path relative to the output location for outputs
  std::string sha256;
};

FileDigest digest_file(std::string name, const std::filesystem::path& path);

/// Provenance for one subcommand run. The digest covers everything except
/// the timestamps, so identical runs have identical digests.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string config_sha256;
  std::optional<std::uint64_t> seed;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  /// Written but not reproducible (wall times, latencies); names only.
  std::vector<std::string> volatile_outputs;
  std::string started_at;
  std::string finished_at;

  util::Json content() const;
  std::string digest() const;
  util::Json to_json() const;
};

/// UTC, ISO 8601 with seconds.
std::string utc_now();

/// A manifest with command, version and started_at filled in.
RunManifest start_manifest(std::string command, std::string tool_version);

/// Stamps finished_at and writes atomically.
void write_manifest(const std::filesystem::path& path, RunManifest& manifest);

}  // namespace medvlm::cli
