// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/csv.hpp"

#include <fstream>

#include "rxonset/errors.hpp"

namespace rxonset::csv {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("required input file not found: " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::string data;
  data.resize(static_cast<std::size_t>(size));
  in.read(data.data(), size);
  if (!in) throw DataError("failed to read " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

void split_fields(std::string_view line, std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool LineReader::next(std::string_view& line) {
  if (rest_.empty()) return false;
  const auto nl = rest_.find('\n');
  if (nl == std::string_view::npos) {
    line = rest_;
    rest_ = {};
  } else {
    line = rest_.substr(0, nl);
    rest_.remove_prefix(nl + 1);
  }
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  ++line_number_;
  return true;
}

std::vector<std::size_t> resolve_columns(std::string_view header,
                                         const std::vector<std::string>& required,
                                         const std::filesystem::path& path) {
  std::vector<std::string_view> names;
  split_fields(header, names);
  std::vector<std::size_t> positions;
  positions.reserve(required.size());
  for (const auto& want : required) {
    std::size_t i = 0;
    while (i < names.size() && names[i] != want) ++i;
    if (i == names.size()) {
      throw DataError(path.string() + ": missing column '" + want + "' in header");
    }
    positions.push_back(i);
  }
  return positions;
}

}  // namespace rxonset::csv
