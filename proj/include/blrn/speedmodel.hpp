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

#ifndef BLRN_SPEEDMODEL_HPP_
#define BLRN_SPEEDMODEL_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blrn/avls.hpp"
#include "blrn/roadnetwork.hpp"
#include "blrn/timeutil.hpp"

namespace blrn {

/// Mergeable harmonic-mean accumulator: mean = count / sum of reciprocals.
/// The harmonic mean is the right average for speeds over fixed distances.
struct HarmonicAccumulator {
  double recip_sum = 0.0;
  std::uint64_t count = 0;

  void add(double v) {
    recip_sum += 1.0 / v;
    ++count;
  }
  void merge(const HarmonicAccumulator& o) {
    recip_sum += o.recip_sum;
    count += o.count;
  }
  bool empty() const { return count == 0; }
  double mean() const { return static_cast<double>(count) / recip_sum; }
};

/// Per-link cell grid: one accumulator per (vehicle class, time bin).
struct SpeedMatrix {
  int bins = 0;  // 24 for hour-of-day, 168 for hour-of-week
  std::vector<HarmonicAccumulator> cells;

  explicit SpeedMatrix(int bin_count = 0) : bins(bin_count), cells(kVehicleClassCount * bin_count) {}
  HarmonicAccumulator& cell(VehicleClass v, int bin) {
    return cells[static_cast<std::size_t>(v) * bins + bin];
  }
  const HarmonicAccumulator& cell(VehicleClass v, int bin) const {
    return cells[static_cast<std::size_t>(v) * bins + bin];
  }
};

/// Static per-road-type speed table plus junction crossing delay.
struct MetricIISpeeds {
  std::array<double, kRoadTypeCount> mph{};
  double junction_delay_s = 0.0;

  double speed_for(RoadType t) const { return mph[static_cast<std::size_t>(t)]; }
};

/// The table used operationally by the routing engine this models.
MetricIISpeeds las_metric_ii();
/// The simplex-optimised table (maximum route similarity calibration).
MetricIISpeeds nelder_mead_metric_ii();

inline constexpr double kMetricIDefaultMph = 22.8;

enum class Metric { kI, kII, kIII, kIV, kV, kHybrid };
std::string_view metric_name(Metric m);
std::optional<Metric> metric_from_name(std::string_view name);

/// Raw AVLS fix snapped to its nearest link, used to train Metrics III/IV.
struct SnappedObservation {
  LinkId link = 0;
  VehicleClass vehicle = VehicleClass::kAeu;
  LatLon position;
  std::int64_t timestamp = 0;
  double speed_mph = 0.0;
};

/// Map-matched per-link traversal speed, used to train Metric V.
struct LinkSpeedObservation {
  LinkId link = 0;
  VehicleClass vehicle = VehicleClass::kAeu;
  std::int64_t entry = 0;
  double speed_mph = 0.0;
};

struct TrainStats {
  std::uint64_t box_observations = 0;     // fed into Metric III/IV cells
  std::uint64_t zero_speed_skipped = 0;   // reciprocal undefined
  std::uint64_t link_observations = 0;    // fed into Metric V cells
  std::int64_t window_from = 0;
  std::int64_t window_to = 0;
};

/// The five weight layers. Metric I is a fixed network-wide speed, II a
/// per-road-type table, III/IV neighbourhood-pooled hour-of-day/hour-of-week
/// matrices and V per-link hour-of-week matrices with a fallback chain.
struct SpeedModel {
  double metric_i_mph = kMetricIDefaultMph;
  MetricIISpeeds metric_ii = las_metric_ii();
  std::map<LinkId, SpeedMatrix> metric_iii;  // 24-bin
  std::map<LinkId, SpeedMatrix> metric_iv;   // 168-bin
  std::map<LinkId, SpeedMatrix> metric_v;    // 168-bin, link-local
  Timezone timezone = Timezone::utc();
  TrainStats stats;
};

/// Pools snapped observations into Metric III and IV: each link's cell is the
/// harmonic mean of reported speeds within a square box centred at the link
/// midpoint, restricted to observations snapped to links of the same road
/// type. Zero speeds are excluded and counted.
void train_metric_iii_iv(const RoadNetwork& net, std::span<const SnappedObservation> obs,
                         double box_half_side_m, SpeedModel& model);

/// Per-link harmonic means of map-matched traversal speeds by hour-of-week.
void train_metric_v(std::span<const LinkSpeedObservation> obs, SpeedModel& model);

struct SpeedLookup {
  double mph = 0.0;
  std::string_view provenance;  // "I".."V" or "fallback:IV" / "fallback:III" / "fallback:II"
};

/// Total lookup: data metrics fall back down the chain (V -> IV -> III -> II)
/// so every query gets a positive finite speed. override_ii, when given,
/// replaces the model's Metric II table (used for calibrated speed sets).
SpeedLookup link_speed(const RoadNetwork& net, const SpeedModel& model, Metric metric, LinkId link,
                       VehicleClass vehicle, std::int64_t instant,
                       const MetricIISpeeds* override_ii = nullptr);

/// Binary container round-trip; load(save(m)) is bit-identical on every cell.
void save_model_file(const SpeedModel& model, const std::string& path);
SpeedModel load_model_file(const std::string& path);
std::string serialize_model(const SpeedModel& model);
SpeedModel deserialize_model(std::string_view data);

/// Dumps one layer as CSV (link_id,vehicle,bin,speed_mph,n); layers "i" and
/// "ii" dump their constants instead.
std::string inspect_layer_csv(const SpeedModel& model, std::string_view layer);

/// Speed-table CSV: one "road_type,mph" row per type plus a junction_delay_s
/// row. Used to exchange calibrated Metric II tables.
std::string metric_ii_to_csv(const MetricIISpeeds& t);
MetricIISpeeds metric_ii_from_csv(std::string_view text);

}  // namespace blrn

#endif  // BLRN_SPEEDMODEL_HPP_
