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

#ifndef BLRN_CALIBRATE_HPP_
#define BLRN_CALIBRATE_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "blrn/roadnetwork.hpp"
#include "blrn/speedmodel.hpp"

namespace blrn {

struct NmOptions {
  int max_iter = 500;
  double tol = 1e-3;  // stop when the simplex objective spread falls below this
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double init_step = 1.0;  // axis-aligned initial simplex step per coordinate
};

struct NmBounds {
  std::vector<double> lo, hi;
};

struct NmTraceRow {
  int iteration = 0;
  std::string operation;  // reflect / expand / contract / shrink
  double best_f = 0.0;
};

struct NmResult {
  std::vector<double> best_x;
  double best_f = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<NmTraceRow> trace;
};

/// Standard Nelder-Mead simplex minimisation over a box: out-of-box proposals
/// are clipped to the box, the initial simplex is x0 plus one axis step per
/// coordinate. Deterministic given identical inputs. Non-finite objective
/// values abort.
NmResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& objective,
                              std::vector<double> x0, const NmBounds& bounds,
                              const NmOptions& options);

/// One reference journey for route-similarity calibration.
struct CorpusEntry {
  std::string journey_id;
  LatLon origin;
  LatLon destination;
  VehicleClass vehicle = VehicleClass::kAeu;
  std::int64_t departure = 0;
  std::vector<LinkId> actual_links;
};

/// Mean whole-route path coincidence of Metric II routes under the candidate
/// table against the corpus; journeys whose routing fails score zero.
double corpus_objective(const RoadNetwork& net, const SpeedModel& model,
                        std::span<const CorpusEntry> corpus, const MetricIISpeeds& table,
                        int threads);

/// The calibration vector is [junction delay, speed per road type in enum
/// order]; speeds live in [initial - 20, initial + 20] (floored at 0.5 mph)
/// and the delay in [0, 30] s.
std::vector<double> speed_vector_from_table(const MetricIISpeeds& t);
MetricIISpeeds table_from_speed_vector(std::span<const double> v);
NmBounds calibration_bounds(const MetricIISpeeds& initial);

struct CalibrationReport {
  MetricIISpeeds initial_table;
  MetricIISpeeds final_table;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<NmTraceRow> trace;
};

/// Maximises mean path coincidence over the corpus by Nelder-Mead on the
/// negated objective, starting from the given table.
CalibrationReport calibrate_metric_ii(const RoadNetwork& net, const SpeedModel& model,
                                      std::span<const CorpusEntry> corpus,
                                      const MetricIISpeeds& initial, const NmOptions& options,
                                      int threads);

/// Corpus CSV: journey_id,origin_lat,origin_lon,dest_lat,dest_lon,vehicle,
/// departure_utc,links with the link path |-separated.
std::vector<CorpusEntry> parse_corpus_csv(const std::string& text);
std::string corpus_to_csv(std::span<const CorpusEntry> corpus);

std::string calibration_report_json(const CalibrationReport& report);

}  // namespace blrn

#endif  // BLRN_CALIBRATE_HPP_
