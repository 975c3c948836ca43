// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rxonset::csv {

/// Whole file contents. Throws DependencyError when the file is missing.
std::string read_file(const std::filesystem::path& path);

/// Writes `contents` atomically enough for a batch tool: temp file + rename.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Splits one line on commas. No quoting: none of the schemas need it.
/// Fields are views into `line`.
void split_fields(std::string_view line, std::vector<std::string_view>& fields);

/// Iterates physical lines of a buffer, stripping a trailing '\r'.
class LineReader {
 public:
  explicit LineReader(std::string_view buffer) : rest_(buffer) {}

  bool next(std::string_view& line);
  std::size_t line_number() const noexcept { return line_number_; }

 private:
  std::string_view rest_;
  std::size_t line_number_ = 0;
};

/// Maps header names to column positions; throws DataError naming any
/// required column that is absent.
std::vector<std::size_t> resolve_columns(std::string_view header,
                                         const std::vector<std::string>& required,
                                         const std::filesystem::path& path);

}  // namespace rxonset::csv
