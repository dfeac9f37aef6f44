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

#ifndef BLRN_GEO_HPP_
#define BLRN_GEO_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace blrn {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct XY {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kMetersPerMile = 1609.344;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

inline double mph_to_mps(double mph) { return mph * kMetersPerMile / 3600.0; }
inline double mps_to_mph(double mps) { return mps * 3600.0 / kMetersPerMile; }

/// Great-circle distance in metres.
double haversine_m(const LatLon& a, const LatLon& b);

/// Equirectangular projection about a fixed origin. Linear in lat/lon, so
/// axis-aligned boxes stay axis-aligned; adequate below city scale.
class LocalFrame {
 public:
  explicit LocalFrame(const LatLon& origin);
  XY to_xy(const LatLon& p) const;
  LatLon to_latlon(const XY& q) const;
  double meters_per_deg_lat() const { return ky_; }
  double meters_per_deg_lon() const { return kx_; }

 private:
  LatLon origin_;
  double kx_;  // metres per degree of longitude at origin latitude
  double ky_;  // metres per degree of latitude
};

double polyline_length_m(std::span<const LatLon> poly);

struct PolylineHit {
  double distance_m = 0.0;  // perpendicular distance point -> polyline
  double offset_m = 0.0;    // along-polyline distance from its start
  LatLon point;             // the projected point
  std::size_t segment = 0;
};

/// Nearest point on a polyline (>= 2 vertices). Scans segments in order and
/// keeps the first minimum, so results are deterministic.
PolylineHit project_to_polyline(std::span<const LatLon> poly, const LatLon& p);

/// Position at a given along-polyline offset, clamped to [0, length].
LatLon point_along_polyline(std::span<const LatLon> poly, double offset_m);

/// Forward azimuth a -> b, degrees clockwise from north in [0, 360).
double bearing_deg(const LatLon& a, const LatLon& b);

/// True when segment ab intersects the axis-aligned rectangle centred at the
/// origin with half-extents (half_x, half_y).
bool segment_intersects_rect(const XY& a, const XY& b, double half_x, double half_y);

}  // namespace blrn

#endif  // BLRN_GEO_HPP_
