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

#ifndef BLRN_MATCHING_HPP_
#define BLRN_MATCHING_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blrn/avls.hpp"
#include "blrn/roadnetwork.hpp"
#include "blrn/speedmodel.hpp"

namespace blrn {

struct MatchParams {
  double sigma_m = 10.0;        // GPS noise scale in the Gaussian emission
  double beta_m = 30.0;         // scale of the |routeDist - gcDist| transition penalty
  double cand_radius_m = 150.0; // candidate search radius around each fix
  int max_candidates = 8;
  // Transition search is abandoned beyond gc * cutoff_factor + cutoff_slack_m;
  // a 15 s gap cannot plausibly cover more road than that.
  double cutoff_factor = 8.0;
  double cutoff_slack_m = 500.0;
  double min_traversal_s = 0.2;  // speed observations below this are skipped

  bool valid() const {
    return sigma_m > 0 && beta_m > 0 && cand_radius_m > 0 && max_candidates >= 1;
  }
};

/// One candidate projection of a fix onto a link.
struct Candidate {
  LinkId link = kInvalidLink;
  double offset_m = 0.0;
  LatLon point;
  double emission_dist_m = 0.0;
};

/// Candidate links for a position: every link within the radius, sorted by
/// (emission distance, link id), truncated to max_candidates.
std::vector<Candidate> match_candidates(const RoadNetwork& net, const LatLon& pos,
                                        const MatchParams& params);

/// Shortest on-road distance from a position on one link to a position on
/// another (distance-weighted), or nothing when it exceeds cutoff_m.
std::optional<double> route_distance(const RoadNetwork& net, const Candidate& a,
                                     const Candidate& b, double cutoff_m);

/// One traversed stretch of a link: entry/exit instants (epoch seconds) and
/// the covered offsets. Interior elements always span the whole link.
struct RouteElement {
  LinkId link = kInvalidLink;
  double entry_s = 0.0;
  double exit_s = 0.0;
  double entry_offset_m = 0.0;
  double exit_offset_m = 0.0;
};

struct MatchedRoute {
  std::string journey_id;
  VehicleClass vehicle = VehicleClass::kAeu;
  std::vector<RouteElement> elements;
  std::vector<std::pair<LinkId, double>> fix_assignments;  // per retained fix
  std::size_t fixes_dropped = 0;                           // broken-chain repair
  double score = 0.0;                                      // Viterbi log-probability

  std::vector<LinkId> link_sequence() const {
    std::vector<LinkId> out;
    out.reserve(elements.size());
    for (const auto& e : elements) out.push_back(e.link);
    return out;
  }
};

struct MatchOutcome {
  std::optional<MatchedRoute> route;
  std::string reject_reason;  // "no candidate", "broken chain", "degenerate"
};

/// Viterbi decoding over per-fix candidates with Gaussian emissions and the
/// route-vs-great-circle transition penalty; the winning candidate chain is
/// expanded into the full link path with entry/exit times interpolated
/// linearly by distance between fixes. A single chain break is repaired once
/// by dropping the offending fix.
MatchOutcome match_trace(const RoadNetwork& net, const Trace& trace, const MatchParams& params);

/// Matches independent traces in parallel; results come back in input order.
std::vector<MatchOutcome> match_traces(const RoadNetwork& net, std::span<const Trace> traces,
                                       const MatchParams& params, int threads);

/// One speed observation per fully traversed link, in mph. Stretches quicker
/// than min_traversal_s are skipped and counted.
std::vector<LinkSpeedObservation> extract_speeds(const MatchedRoute& route, const RoadNetwork& net,
                                                 double min_traversal_s = 0.2,
                                                 std::size_t* skipped = nullptr);

struct CoverageRow {
  RoadType road_type;
  std::size_t links_total = 0;
  std::size_t links_used = 0;
  double fraction = 0.0;
};

/// Distinct directed links touched by any route, per road type.
std::vector<CoverageRow> coverage_by_road_type(std::span<const MatchedRoute> routes,
                                               const RoadNetwork& net);

}  // namespace blrn

#endif  // BLRN_MATCHING_HPP_
