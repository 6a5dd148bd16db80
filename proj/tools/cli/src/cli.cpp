// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/cli/cli.hpp"

#include <algorithm>
#include <iostream>

#include "commands.hpp"
#include "medvlm/util/error.hpp"

namespace medvlm::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"medvlm: train, build benchmarks for, evaluate and score a miniature medical VLM", "medvlm"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  Action action;
  register_train(app, ctx, action);
  register_build_bench(app, ctx, action);
  register_eval(app, ctx, action);
  register_score(app, ctx, action);
  register_metrics(app, ctx, action);
  register_check_overlap(app, ctx, action);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (!action) return kExitConfig;
  try {
    return action();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace medvlm::cli
