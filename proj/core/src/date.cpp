// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxonset/date.hpp"

#include <charconv>
#include <chrono>

#include "rxonset/errors.hpp"

namespace rxonset {
namespace {

namespace chr = std::chrono;

bool parse_fixed(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

void append_padded(std::string& out, int value, int width) {
  char buf[8];
  int n = width;
  while (n-- > 0) {
    buf[n] = static_cast<char>('0' + value % 10);
    value /= 10;
  }
  out.append(buf, static_cast<std::size_t>(width));
}

}  // namespace

std::optional<Day> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_fixed(text.substr(0, 4), y) || !parse_fixed(text.substr(5, 2), m) ||
      !parse_fixed(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Day(static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count()));
}

Day iso_date(std::string_view text) {
  auto d = parse_iso_date(text);
  if (!d) throw DataError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  return *d;
}

void append_iso_date(std::string& out, Day day) {
  const chr::year_month_day ymd{chr::sys_days{chr::days{day.count()}}};
  append_padded(out, static_cast<int>(ymd.year()), 4);
  out.push_back('-');
  append_padded(out, static_cast<int>(static_cast<unsigned>(ymd.month())), 2);
  out.push_back('-');
  append_padded(out, static_cast<int>(static_cast<unsigned>(ymd.day())), 2);
}

std::string format_iso_date(Day day) {
  std::string out;
  out.reserve(10);
  append_iso_date(out, day);
  return out;
}

int calendar_year(Day day) {
  const chr::year_month_day ymd{chr::sys_days{chr::days{day.count()}}};
  return static_cast<int>(ymd.year());
}

Day year_start(int year) {
  const chr::year_month_day ymd{chr::year{year}, chr::January, chr::day{1}};
  return Day(static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count()));
}

}  // namespace rxonset
