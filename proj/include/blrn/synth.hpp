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

#ifndef BLRN_SYNTH_HPP_
#define BLRN_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "blrn/avls.hpp"
#include "blrn/roadnetwork.hpp"
#include "blrn/speedmodel.hpp"

namespace blrn {

/// Synthetic world: a grid road network with a ring/arterial road-type
/// pattern, journeys driven at a planted speed table, and the telemetry a
/// fleet would report while driving them. Deterministic for a given seed.
struct SynthConfig {
  int grid_w = 20;
  int grid_h = 20;
  double spacing_m = 150.0;
  int journeys = 500;
  double noise_m = 10.0;     // isotropic Gaussian GPS noise
  double interval_s = 15.0;  // fix cadence
  std::uint64_t seed = 42;
  std::int64_t start_epoch = 1478131200;  // 2016-11-03T00:00:00Z
  std::int64_t journey_spacing_s = 120;   // departure stagger
  double junction_pause_s = 0.0;          // optional per-interior-node stop
  LatLon base{51.50, -0.12};

  // Planted per-road-type speeds for AEUs; FRUs run faster by fru_delta_mph.
  std::array<double, kRoadTypeCount> aeu_mph{40.0, 30.0, 24.0, 20.0, 16.0,
                                             8.0,  7.0,  5.0,  4.0};
  double fru_delta_mph = 4.0;

  double speed_mph(RoadType t, VehicleClass v) const {
    return aeu_mph[static_cast<std::size_t>(t)] +
           (v == VehicleClass::kFru ? fru_delta_mph : 0.0);
  }
};

struct TruthJourney {
  std::string journey_id;
  VehicleClass vehicle = VehicleClass::kAeu;
  std::int64_t departure = 0;
  std::vector<LinkId> links;
  std::vector<double> entry_s;  // epoch seconds per link
  std::vector<double> exit_s;
  double duration_s = 0.0;
};

struct SynthWorld {
  std::string network_geojson;
  std::string avls_csv;
  std::vector<TruthJourney> truth;
};

/// Grid network as a GeoJSON feature collection: boundary ring of A roads,
/// central row/column arterials as B roads, local streets inside.
std::string grid_network_geojson(const SynthConfig& config);

SynthWorld generate_world(const SynthConfig& config);

/// Writes network.geojson, truth.csv and avls.csv under the given paths.
void generate_world_files(const SynthConfig& config, const std::string& network_path,
                          const std::string& truth_path, const std::string& avls_path);

/// Truth CSV: journey_id,vehicle,departure_utc,links,entry_ts,exit_ts,
/// duration_s with |-separated sequences.
std::string truth_to_csv(std::span<const TruthJourney> truth);
std::vector<TruthJourney> parse_truth_csv(const std::string& text);

struct TruthScoreRow {
  std::string journey_id;
  double coincidence = 0.0;
  double duration_error_s = 0.0;  // predicted - truth
};

struct TruthScore {
  std::vector<TruthScoreRow> rows;
  std::vector<std::string> unmatched;
  double mean_coincidence = 0.0;
  double mean_abs_duration_error_s = 0.0;
};

/// Scores matched routes (or any predicted link paths with durations)
/// against ground truth by journey id.
struct PredictedPath {
  std::string journey_id;
  std::vector<LinkId> links;
  double duration_s = 0.0;
};

TruthScore score_against_truth(const RoadNetwork& net, std::span<const TruthJourney> truth,
                               std::span<const PredictedPath> predictions);

}  // namespace blrn

#endif  // BLRN_SYNTH_HPP_
