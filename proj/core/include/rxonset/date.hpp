// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rxonset {

/// Calendar day stored as a whole number of days since 1970-01-01.
class Day {
 public:
  constexpr Day() = default;
  constexpr explicit Day(std::int32_t days_since_epoch)
      : days_(days_since_epoch) {}

  constexpr std::int32_t count() const noexcept { return days_; }

  friend constexpr auto operator<=>(Day, Day) = default;

  friend constexpr std::int32_t operator-(Day a, Day b) {
    return a.days_ - b.days_;
  }
  friend constexpr Day operator+(Day d, std::int32_t n) {
    return Day(d.days_ + n);
  }
  friend constexpr Day operator-(Day d, std::int32_t n) {
    return Day(d.days_ - n);
  }

 private:
  std::int32_t days_ = 0;
};

/// Parses YYYY-MM-DD. Returns nullopt for malformed text or impossible
/// calendar dates such as 2017-13-40.
std::optional<Day> parse_iso_date(std::string_view text);

/// Same as parse_iso_date but throws DataError.
Day iso_date(std::string_view text);

std::string format_iso_date(Day day);

/// Appends the YYYY-MM-DD form of `day` to `out` without allocating a
/// temporary string.
void append_iso_date(std::string& out, Day day);

int calendar_year(Day day);

/// First day of the given calendar year.
Day year_start(int year);

}  // namespace rxonset
