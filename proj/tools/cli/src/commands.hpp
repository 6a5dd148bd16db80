// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>

#include "medvlm/cli/cli.hpp"

namespace medvlm::cli {

struct Context {
  std::ostream& out;
  std::ostream& err;
};

/// Set by the parsed subcommand's callback; run after parsing succeeds.
using Action = std::function<int()>;

void register_train(CLI::App& app, Context& ctx, Action& action);
void register_build_bench(CLI::App& app, Context& ctx, Action& action);
void register_check_overlap(CLI::App& app, Context& ctx, Action& action);
void register_eval(CLI::App& app, Context& ctx, Action& action);
void register_score(CLI::App& app, Context& ctx, Action& action);
void register_metrics(CLI::App& app, Context& ctx, Action& action);

/// Manifest path for commands that write a single file.
inline std::filesystem::path manifest_for(const std::filesystem::path& out_file) {
  return out_file.parent_path() / (out_file.filename().string() + ".manifest.json");
}

inline const char* tool_version() { return MEDVLM_VERSION; }

}  // namespace medvlm::cli
