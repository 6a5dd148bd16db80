// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace medvlm::util {

/// RFC 4180 records: quoted fields may hold delimiters, quotes ("") and
/// newlines. CRLF and LF line ends are both accepted; blank lines are skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, char delimiter = ',');

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column. Throws ValidationError when absent.
  std::size_t column(std::string_view name) const;
};

/// First record is the header; every row must have the header's width.
CsvTable read_csv_table(const std::filesystem::path& path, char delimiter = ',');

}  // namespace medvlm::util
