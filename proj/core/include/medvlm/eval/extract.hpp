// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medvlm/bench/instance.hpp"

namespace medvlm::eval {

/// First applicable rule wins:
///  1. the last "answer[ is][:|=|-] [(]X[)]" marker, "answer" matched
///     case-insensitively and X an upper-case valid key not followed by a
///     letter or digit;
///  2. the output stripped of whitespace and punctuation is one valid key
///     (either case);
///  3. the trimmed output equals exactly one option text, ignoring case.
/// Otherwise nullopt.
std::optional<std::string> extract_option(std::string_view raw, const std::vector<bench::Option>& options);

}  // namespace medvlm::eval
