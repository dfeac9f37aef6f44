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

#ifndef BLRN_TESTS_TEST_HELPERS_HPP_
#define BLRN_TESTS_TEST_HELPERS_HPP_

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "blrn/geo.hpp"
#include "blrn/roadnetwork.hpp"

namespace blrn::testing {

// All fixtures live near this anchor; metre offsets are mapped to lat/lon
// through one shared frame so geometry is easy to reason about.
inline const LatLon kAnchor{51.50, -0.12};

inline LatLon at_m(double x, double y) { return LocalFrame(kAnchor).to_latlon({x, y}); }

struct FeatureSpec {
  std::vector<LatLon> coords;
  std::string road_type = "LocalStreet";
  std::string way_id;
  bool oneway = false;
  bool contraflow = false;
  bool bus_lane = false;
  bool pedestrian = false;
};

inline std::string feature_json(const FeatureSpec& f) {
  std::string coords;
  char buf[96];
  for (std::size_t i = 0; i < f.coords.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s[%.9f,%.9f]", i ? "," : "", f.coords[i].lon,
                  f.coords[i].lat);
    coords += buf;
  }
  std::string props = "\"road_type\":\"" + f.road_type + "\",\"way_id\":\"" + f.way_id + "\"";
  props += std::string(",\"oneway\":") + (f.oneway ? "true" : "false");
  if (f.contraflow) props += ",\"bluelight_contraflow\":true";
  if (f.bus_lane) props += ",\"bus_lane\":true";
  if (f.pedestrian) props += ",\"pedestrian\":true";
  return "{\"type\":\"Feature\",\"geometry\":{\"type\":\"LineString\",\"coordinates\":[" + coords +
         "]},\"properties\":{" + props + "}}";
}

inline std::string collection_json(const std::vector<FeatureSpec>& features) {
  std::string body;
  for (std::size_t i = 0; i < features.size(); ++i)
    body += (i ? ",\n" : "") + feature_json(features[i]);
  return "{\"type\":\"FeatureCollection\",\"features\":[\n" + body + "\n]}";
}

// A curved way between two metre-space points whose polyline length is close
// to target_len_m (>= the straight distance); lets fixtures dial in costs.
inline FeatureSpec way_between(double x0, double y0, double x1, double y1, double target_len_m,
                               const std::string& road_type, const std::string& way_id,
                               bool oneway = false) {
  FeatureSpec f;
  f.road_type = road_type;
  f.way_id = way_id;
  f.oneway = oneway;
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double d = std::hypot(dx, dy);
  if (target_len_m <= d * 1.0000001) {
    f.coords = {at_m(x0, y0), at_m(x1, y1)};
    return f;
  }
  // Raise the midpoint perpendicular to the chord until the two half-chords
  // sum to the target.
  const double h = std::sqrt(std::max(0.0, (target_len_m / 2) * (target_len_m / 2) -
                                               (d / 2) * (d / 2)));
  const double mx = (x0 + x1) / 2 - h * dy / d;
  const double my = (y0 + y1) / 2 + h * dx / d;
  f.coords = {at_m(x0, y0), at_m(mx, my), at_m(x1, y1)};
  return f;
}

// A 3x3 block of local streets: 9 nodes, 12 undirected ways, 24 directed
// links after the build.
inline std::string grid3x3_geojson(double spacing_m = 100.0) {
  std::vector<FeatureSpec> features;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) {
      FeatureSpec f;
      f.coords = {at_m(c * spacing_m, r * spacing_m), at_m((c + 1) * spacing_m, r * spacing_m)};
      f.way_id = "h" + std::to_string(r) + std::to_string(c);
      features.push_back(f);
    }
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      FeatureSpec f;
      f.coords = {at_m(c * spacing_m, r * spacing_m), at_m(c * spacing_m, (r + 1) * spacing_m)};
      f.way_id = "v" + std::to_string(r) + std::to_string(c);
      features.push_back(f);
    }
  return collection_json(features);
}

inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace blrn::testing

#endif  // BLRN_TESTS_TEST_HELPERS_HPP_
