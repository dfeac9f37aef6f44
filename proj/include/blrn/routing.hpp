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

#ifndef BLRN_ROUTING_HPP_
#define BLRN_ROUTING_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "blrn/roadnetwork.hpp"
#include "blrn/speedmodel.hpp"

namespace blrn {

// Arrival-time bias correction, t_chi = t_beta / slope - intercept, clamped
// at zero (the affine form goes negative below ~18.8 s).
inline constexpr double kBiasSlope = 0.8029;
inline constexpr double kBiasInterceptS = 23.3843;

double bias_correct(double t_beta_s);

inline constexpr double kSnapMaxM = 250.0;

struct RouteRequest {
  LatLon origin;
  LatLon destination;
  VehicleClass vehicle = VehicleClass::kAeu;
  std::int64_t departure = 0;
  Metric metric = Metric::kI;
  // Replaces the model's Metric II table when set (calibrated speed sets).
  // HYBRID falls back to the Nelder-Mead table when this is null.
  const MetricIISpeeds* metric_ii_table = nullptr;
};

struct RouteLeg {
  LinkId link = kInvalidLink;
  double seconds = 0.0;  // travel time on the covered stretch, no delay
  double meters = 0.0;   // covered stretch; less than link length at the ends
  bool partial = false;
};

struct RoutePrediction {
  std::vector<LinkId> links;
  std::vector<RouteLeg> legs;
  double distance_m = 0.0;
  double t_beta_s = 0.0;
  double t_chi_s = 0.0;  // bias-corrected for Metric V / HYBRID, else == t_beta_s
  int junctions = 0;     // interior nodes crossed
  Metric metric = Metric::kI;
  std::map<std::string, int> provenance_counts;
};

/// Minimum-travel-time path under the requested metric. Per-link cost is
/// length over link_speed at the departure instant (bins frozen for the whole
/// query), plus the junction delay per interior node for Metric II. Origin
/// and destination snap to the nearest link (its twin is seeded too, so a
/// mid-link start may set off in either legal direction); equal-cost paths
/// resolve to the lexicographically smallest link sequence.
RoutePrediction shortest_route(const RoadNetwork& net, const SpeedModel& model,
                               const RouteRequest& request);

/// Route chosen by Metric II with a calibrated table; duration summed along
/// that fixed path from Metric V speeds (junction delay omitted: data-derived
/// per-link speeds already embody junction slowdowns), then bias-corrected.
RoutePrediction hybrid_route(const RoadNetwork& net, const SpeedModel& model,
                             const RouteRequest& request);

/// Duration of a given link path under a metric, no route search. Empty
/// paths cost zero.
double estimate_on_fixed_path(const RoadNetwork& net, const SpeedModel& model,
                              std::span<const LinkId> links, VehicleClass vehicle,
                              std::int64_t departure, Metric metric,
                              const MetricIISpeeds* metric_ii_table = nullptr);

}  // namespace blrn

#endif  // BLRN_ROUTING_HPP_
