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

#include "blrn/avls.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "blrn/errors.hpp"
#include "blrn/io.hpp"
#include "blrn/timeutil.hpp"

namespace blrn {

std::string_view vehicle_class_name(VehicleClass v) {
  return v == VehicleClass::kAeu ? "AEU" : "FRU";
}

std::optional<VehicleClass> vehicle_class_from_name(std::string_view name) {
  if (name == "AEU") return VehicleClass::kAeu;
  if (name == "FRU") return VehicleClass::kFru;
  return std::nullopt;
}

namespace {

const char kAvlsHeader[] = "timestamp_utc,callsign,incident_id,vehicle,lat,lon,speed_mph,heading_deg";

std::optional<double> parse_num(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

}  // namespace

ParseResult parse_avls(std::string_view text, bool strict) {
  ParseResult result;
  std::size_t row_no = 0;
  std::size_t pos = 0;

  auto reject = [&](std::size_t row, std::string reason) {
    if (strict)
      throw Error(Errc::kParse, "avls row " + std::to_string(row) + ": " + reason);
    result.rejects.push_back({row, std::move(reason)});
  };

  bool header_seen = false;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++row_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kAvlsHeader)
        throw Error(Errc::kParse, std::string("avls header mismatch, expected: ") + kAvlsHeader);
      header_seen = true;
      continue;
    }

    const auto f = split_fields(line);
    if (f.size() != 8) {
      reject(row_no, "field count");
      continue;
    }
    AvlsRecord rec;
    const auto ts = parse_rfc3339(f[0]);
    if (!ts) {
      reject(row_no, "timestamp");
      continue;
    }
    rec.timestamp = *ts;
    rec.callsign = std::string(f[1]);
    rec.incident_id = std::string(f[2]);
    const auto vc = vehicle_class_from_name(f[3]);
    if (!vc) {
      reject(row_no, "vehicle class");
      continue;
    }
    rec.vehicle = *vc;
    const auto lat = parse_num(f[4]);
    const auto lon = parse_num(f[5]);
    if (!lat || !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      reject(row_no, "position");
      continue;
    }
    rec.position = {*lat, *lon};
    const auto speed = parse_int(f[6]);
    if (!speed || *speed < 0) {
      reject(row_no, "speed");
      continue;
    }
    if (*speed % 5 != 0) {
      reject(row_no, "speed quantisation");
      continue;
    }
    rec.speed_mph = *speed;
    const auto heading = parse_int(f[7]);
    if (!heading || *heading < 0 || *heading >= 360) {
      reject(row_no, "heading");
      continue;
    }
    if (*heading % 15 != 0) {
      reject(row_no, "heading quantisation");
      continue;
    }
    rec.heading_deg = *heading;
    result.records.push_back(std::move(rec));
  }
  if (!header_seen) throw Error(Errc::kParse, "avls file has no header row");
  return result;
}

ParseResult parse_avls_file(const std::string& path, bool strict) {
  return parse_avls(read_file(path), strict);
}

void sort_for_filtering(std::vector<AvlsRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const AvlsRecord& a, const AvlsRecord& b) {
    if (a.callsign != b.callsign) return a.callsign < b.callsign;
    return a.timestamp < b.timestamp;
  });
}

FilterResult filter_stale_fixes(std::vector<AvlsRecord> records) {
  FilterResult result;
  result.records.reserve(records.size());
  // Index of the last retained fix per callsign; records arrive time-ordered
  // per callsign.
  std::map<std::string, std::size_t> last;
  for (auto& rec : records) {
    const auto it = last.find(rec.callsign);
    if (it != last.end()) {
      const AvlsRecord& prev = result.records[it->second];
      const std::int64_t gap = rec.timestamp - prev.timestamp;
      const bool same_pos =
          rec.position.lat == prev.position.lat && rec.position.lon == prev.position.lon;
      if (gap == 0 || ((gap == 10 || gap == 20) && same_pos)) {
        ++result.removed;
        continue;
      }
    }
    last[rec.callsign] = result.records.size();
    result.records.push_back(std::move(rec));
  }
  return result;
}

AggregateResult aggregate_traces(std::vector<AvlsRecord> records, std::int64_t max_gap_s) {
  AggregateResult result;
  std::map<std::tuple<std::string, std::string, VehicleClass>, std::vector<AvlsRecord>> groups;
  for (auto& rec : records)
    groups[{rec.callsign, rec.incident_id, rec.vehicle}].push_back(std::move(rec));

  for (auto& [key, fixes] : groups) {
    std::stable_sort(fixes.begin(), fixes.end(),
                     [](const AvlsRecord& a, const AvlsRecord& b) { return a.timestamp < b.timestamp; });
    std::vector<std::vector<AvlsRecord>> segments;
    for (auto& fix : fixes) {
      if (segments.empty() || fix.timestamp - segments.back().back().timestamp > max_gap_s)
        segments.emplace_back();
      segments.back().push_back(std::move(fix));
    }
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (segments[s].size() < 2) {
        ++result.discarded_short;
        continue;
      }
      Trace t;
      t.callsign = std::get<0>(key);
      t.incident_id = std::get<1>(key);
      t.vehicle = std::get<2>(key);
      t.journey_id = t.callsign + "|" + t.incident_id + "|" +
                     std::string(vehicle_class_name(t.vehicle)) + "#" + std::to_string(s);
      t.fixes = std::move(segments[s]);
      result.traces.push_back(std::move(t));
    }
  }
  std::sort(result.traces.begin(), result.traces.end(),
            [](const Trace& a, const Trace& b) { return a.journey_id < b.journey_id; });
  return result;
}

MonthlyCoverage snap_coverage(const RoadNetwork& net, const std::vector<AvlsRecord>& records) {
  MonthlyCoverage cov;
  if (records.empty()) return cov;

  std::vector<const AvlsRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AvlsRecord* a, const AvlsRecord* b) { return a->timestamp < b->timestamp; });

  std::set<LinkId> links_seen;
  std::map<std::string, std::size_t> by_month;  // month -> cumulative count at month end
  for (const AvlsRecord* r : sorted) {
    if (const auto hit = net.nearest_link(r->position)) links_seen.insert(hit->link);
    by_month[month_key_utc(r->timestamp)] = links_seen.size();
  }

  // Fill calendar months with no records by carrying the count forward.
  const std::string first = by_month.begin()->first;
  const std::string last = by_month.rbegin()->first;
  int y = std::stoi(first.substr(0, 4));
  int m = std::stoi(first.substr(5, 2));
  std::size_t running = 0;
  while (true) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", y, m);
    const std::string key = buf;
    const auto it = by_month.find(key);
    if (it != by_month.end()) running = it->second;
    cov.months.emplace_back(key, running);
    if (key == last) break;
    if (++m > 12) {
      m = 1;
      ++y;
    }
  }
  return cov;
}

}  // namespace blrn
