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

#ifndef BLRN_EVAL_HPP_
#define BLRN_EVAL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blrn/avls.hpp"
#include "blrn/roadnetwork.hpp"
#include "blrn/timeutil.hpp"

namespace blrn {

struct SimilarityReport {
  double whole = 0.0;
  double quartile[4] = {1.0, 1.0, 1.0, 1.0};  // empty quartiles score 1 (vacuous)
};

/// Fraction of the actual route's directed links present in the predicted
/// route, whole-route and per length-quartile. The actual path is cut into
/// four stretches of equal length; a link straddling a cut belongs to the
/// quartile containing its midpoint.
SimilarityReport path_coincidence(const RoadNetwork& net, std::span<const LinkId> actual,
                                  std::span<const LinkId> predicted);

struct PredictionRow {
  std::string journey_id;
  double t_beta_s = 0.0;
  double t_chi_s = 0.0;
};

struct ReferenceRow {
  std::string journey_id;
  VehicleClass vehicle = VehicleClass::kAeu;
  std::int64_t departure = 0;
  LatLon origin;
  LatLon destination;
  double actual_s = 0.0;
};

/// error = predicted - actual; negative means the arrival was underestimated.
struct ErrorRecord {
  std::string journey_id;
  double actual_s = 0.0;
  double t_beta_s = 0.0;
  double t_chi_s = 0.0;
  double error_beta_s = 0.0;
  double error_chi_s = 0.0;
  LatLon midpoint;         // of the straight origin-destination segment
  double centre_km = 0.0;  // from the configured centre to the midpoint
  int hour_of_day = 0;
  VehicleClass vehicle = VehicleClass::kAeu;
};

// Charing Cross, the conventional centre point of London.
inline constexpr LatLon kDefaultCentre{51.5073, -0.1276};

struct ErrorTable {
  std::vector<ErrorRecord> records;
  std::vector<std::string> unmatched;  // ids present on one side only
};

ErrorTable error_table(std::span<const PredictionRow> predictions,
                       std::span<const ReferenceRow> references,
                       const LatLon& centre = kDefaultCentre,
                       const Timezone& tz = Timezone::utc());

enum class EvalAxis { kDuration, kCentreDistance, kHourOfDay, kRegion };
enum class EvalValue { kErrorBeta, kErrorChi };

struct Bucket {
  std::string label;
  double sort_key = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double q10 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q90 = 0.0;  // nearest-rank
};

struct AggregateSummary {
  std::vector<Bucket> buckets;  // sorted by sort_key then label
};

struct RegionPolygon {
  std::string name;
  std::vector<std::vector<LatLon>> rings;  // outer ring first, then holes
};

std::vector<RegionPolygon> parse_regions_geojson(const std::string& text);
bool point_in_polygon(const RegionPolygon& poly, const LatLon& p);

/// Buckets: actual duration in 2-minute bands, centre distance in 2 km
/// bands, hour 0-23, or point-in-polygon region of the journey midpoint.
AggregateSummary aggregate(std::span<const ErrorRecord> errors, EvalAxis axis, EvalValue value,
                           std::span<const RegionPolygon> regions = {});

std::string aggregate_to_csv(const AggregateSummary& summary);

}  // namespace blrn

#endif  // BLRN_EVAL_HPP_
