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

#include "blrn/timeutil.hpp"

#include <cstdio>

namespace blrn {

std::int64_t days_from_civil(int y, int m, int d) {
  // Howard Hinnant's algorithm.
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int weekday_monday0(std::int64_t days) {
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

std::optional<std::int64_t> parse_rfc3339(std::string_view s) {
  int y, mo, d, h, mi, se;
  int n = 0;
  if (std::sscanf(std::string(s).c_str(), "%d-%d-%dT%d:%d:%d%n", &y, &mo, &d, &h, &mi, &se, &n) != 6)
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 || se > 60)
    return std::nullopt;
  std::string_view rest = s.substr(static_cast<std::size_t>(n));
  // Optional fractional seconds, truncated.
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
  }
  int offset_s = 0;
  if (rest == "Z" || rest == "z") {
    // UTC
  } else if (!rest.empty() && (rest.front() == '+' || rest.front() == '-')) {
    int oh, om;
    if (std::sscanf(std::string(rest).c_str(), "%d:%d", &oh, &om) != 2) return std::nullopt;
    if (om < 0 || om > 59) return std::nullopt;
    offset_s = oh * 3600 + (oh < 0 ? -om : om) * 60;
  } else {
    return std::nullopt;
  }
  const std::int64_t days = days_from_civil(y, mo, d);
  return days * 86400 + h * 3600 + mi * 60 + se - offset_s;
}

std::string format_rfc3339(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  const CivilDate cd = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", cd.year, cd.month, cd.day,
                static_cast<long long>(sod / 3600), static_cast<long long>((sod % 3600) / 60),
                static_cast<long long>(sod % 60));
  return buf;
}

namespace {

// Epoch second of the last Sunday of the given month at 01:00 UTC.
std::int64_t last_sunday_0100_utc(int year, int month) {
  const int last_day = [&] {
    static const int md[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && ((year % 4 == 0 && year % 100 != 0) || year % 400 == 0)) return 29;
    return md[month - 1];
  }();
  std::int64_t days = days_from_civil(year, month, last_day);
  const int wd = weekday_monday0(days);  // Sunday = 6
  days -= (wd == 6) ? 0 : (wd + 1);
  return days * 86400 + 3600;
}

}  // namespace

std::optional<Timezone> Timezone::parse(std::string_view name) {
  if (name == "UTC" || name == "utc" || name.empty()) return Timezone(Kind::kUtc, 0);
  if (name == "Europe/London") return Timezone(Kind::kLondon, 0);
  if (name.front() == '+' || name.front() == '-') {
    int oh, om;
    if (std::sscanf(std::string(name).c_str(), "%d:%d", &oh, &om) != 2) return std::nullopt;
    if (om < 0 || om > 59 || oh < -14 || oh > 14) return std::nullopt;
    Timezone tz(Kind::kFixed, oh * 3600 + (oh < 0 ? -om : om) * 60);
    tz.name_ = std::string(name);
    return tz;
  }
  return std::nullopt;
}

int Timezone::offset_s_at(std::int64_t t) const {
  switch (kind_) {
    case Kind::kUtc:
      return 0;
    case Kind::kFixed:
      return fixed_offset_s_;
    case Kind::kLondon: {
      const CivilDate cd = civil_from_days(t >= 0 ? t / 86400 : (t - 86399) / 86400);
      const std::int64_t bst_start = last_sunday_0100_utc(cd.year, 3);
      const std::int64_t bst_end = last_sunday_0100_utc(cd.year, 10);
      return (t >= bst_start && t < bst_end) ? 3600 : 0;
    }
  }
  return 0;
}

int hour_of_day(std::int64_t t, const Timezone& tz) {
  const std::int64_t local = t + tz.offset_s_at(t);
  std::int64_t sod = local % 86400;
  if (sod < 0) sod += 86400;
  return static_cast<int>(sod / 3600);
}

int hour_of_week(std::int64_t t, const Timezone& tz) {
  const std::int64_t local = t + tz.offset_s_at(t);
  std::int64_t days = local / 86400;
  std::int64_t sod = local % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  return weekday_monday0(days) * 24 + static_cast<int>(sod / 3600);
}

std::string month_key_utc(std::int64_t t) {
  const CivilDate cd = civil_from_days(t >= 0 ? t / 86400 : (t - 86399) / 86400);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", cd.year, cd.month);
  return buf;
}

}  // namespace blrn
