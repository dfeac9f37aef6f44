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

#ifndef BLRN_AVLS_HPP_
#define BLRN_AVLS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blrn/geo.hpp"
#include "blrn/roadnetwork.hpp"

namespace blrn {

enum class VehicleClass : std::uint8_t { kAeu = 0, kFru = 1 };
inline constexpr std::size_t kVehicleClassCount = 2;

std::string_view vehicle_class_name(VehicleClass v);
std::optional<VehicleClass> vehicle_class_from_name(std::string_view name);

/// One telemetry fix. Speed arrives quantised to 5 mph and heading to 15
/// degrees; timestamps have second resolution.
struct AvlsRecord {
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string callsign;
  std::string incident_id;
  VehicleClass vehicle = VehicleClass::kAeu;
  LatLon position;
  int speed_mph = 0;
  int heading_deg = 0;
};

struct RejectedRow {
  std::size_t row_no = 0;  // 1-based, header is row 1
  std::string reason;
};

struct ParseResult {
  std::vector<AvlsRecord> records;
  std::vector<RejectedRow> rejects;
};

/// Parses the AVLS CSV (header: timestamp_utc,callsign,incident_id,vehicle,
/// lat,lon,speed_mph,heading_deg). Malformed rows are counted and reported;
/// in strict mode the first one is fatal.
ParseResult parse_avls(std::string_view text, bool strict = false);
ParseResult parse_avls_file(const std::string& path, bool strict = false);

struct FilterResult {
  std::vector<AvlsRecord> records;
  std::size_t removed = 0;
};

/// Removes fixes produced by stale MDT timestamping: a zero gap from the
/// previous retained fix of the same callsign always drops the record; 10 s
/// and 20 s gaps drop it only when the position is bit-identical to the
/// previous fix (the cached-position signature). Input must be time-ordered
/// per callsign. Idempotent.
FilterResult filter_stale_fixes(std::vector<AvlsRecord> records);

struct Trace {
  std::string journey_id;
  std::string callsign;
  std::string incident_id;
  VehicleClass vehicle = VehicleClass::kAeu;
  std::vector<AvlsRecord> fixes;  // strictly increasing timestamps, >= 2
};

struct AggregateResult {
  std::vector<Trace> traces;
  std::size_t discarded_short = 0;  // groups with < 2 fixes
};

/// Groups records into journeys keyed by (callsign, incident_id, vehicle);
/// a gap above max_gap_s within a key starts a new journey. journey_id is
/// "<callsign>|<incident>|<vehicle>#<seq>". Traces come out sorted by id.
AggregateResult aggregate_traces(std::vector<AvlsRecord> records, std::int64_t max_gap_s = 600);

struct MonthlyCoverage {
  // ("YYYY-MM", cumulative distinct links snapped up to that month), one
  // entry per month from first to last record; monotone non-decreasing.
  std::vector<std::pair<std::string, std::size_t>> months;
};

MonthlyCoverage snap_coverage(const RoadNetwork& net, const std::vector<AvlsRecord>& records);

/// Sorts by (callsign, timestamp) keeping input order for equal keys, the
/// ordering filter_stale_fixes expects.
void sort_for_filtering(std::vector<AvlsRecord>& records);

}  // namespace blrn

#endif  // BLRN_AVLS_HPP_
