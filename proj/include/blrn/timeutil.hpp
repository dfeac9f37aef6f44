// Copyright 2026 The blrn Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BLRN_TIMEUTIL_HPP_
#define BLRN_TIMEUTIL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace blrn {

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
};

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(std::int64_t days);

/// Day of week with Monday = 0 .. Sunday = 6.
int weekday_monday0(std::int64_t days);

/// Parses RFC3339 timestamps ("2016-11-03T08:15:00Z", offsets and fractional
/// seconds accepted, fraction truncated). Returns seconds since the epoch.
std::optional<std::int64_t> parse_rfc3339(std::string_view s);
std::string format_rfc3339(std::int64_t epoch_s);

/// Civil timezone for hour-of-day / hour-of-week binning. Supports "UTC",
/// fixed offsets ("+01:00", "-05:30") and "Europe/London" (GMT/BST with the
/// post-1996 last-Sunday-of-March/October rule), which keeps binning
/// deterministic without a system tz database.
class Timezone {
 public:
  static Timezone utc() { return Timezone(Kind::kUtc, 0); }
  static std::optional<Timezone> parse(std::string_view name);

  int offset_s_at(std::int64_t utc_epoch_s) const;
  const std::string& name() const { return name_; }

 private:
  enum class Kind { kUtc, kFixed, kLondon };
  Timezone(Kind kind, int fixed_offset_s) : kind_(kind), fixed_offset_s_(fixed_offset_s) {
    name_ = kind == Kind::kUtc ? "UTC" : (kind == Kind::kLondon ? "Europe/London" : "");
  }
  Kind kind_;
  int fixed_offset_s_;
  std::string name_;
};

/// Local hour of day, 0..23.
int hour_of_day(std::int64_t utc_epoch_s, const Timezone& tz);
/// Local hour of week, Monday 00:00 = 0 .. 167.
int hour_of_week(std::int64_t utc_epoch_s, const Timezone& tz);

/// "YYYY-MM" in UTC, for coverage accounting.
std::string month_key_utc(std::int64_t epoch_s);

}  // namespace blrn

#endif  // BLRN_TIMEUTIL_HPP_
