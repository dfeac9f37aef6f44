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

#include "blrn/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blrn {

double haversine_m(const LatLon& a, const LatLon& b) {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

LocalFrame::LocalFrame(const LatLon& origin)
    : origin_(origin),
      kx_(kDegToRad * kEarthRadiusM * std::cos(origin.lat * kDegToRad)),
      ky_(kDegToRad * kEarthRadiusM) {}

XY LocalFrame::to_xy(const LatLon& p) const {
  return {(p.lon - origin_.lon) * kx_, (p.lat - origin_.lat) * ky_};
}

LatLon LocalFrame::to_latlon(const XY& q) const {
  return {origin_.lat + q.y / ky_, origin_.lon + q.x / kx_};
}

double polyline_length_m(std::span<const LatLon> poly) {
  double total = 0.0;
  for (std::size_t i = 1; i < poly.size(); ++i) total += haversine_m(poly[i - 1], poly[i]);
  return total;
}

PolylineHit project_to_polyline(std::span<const LatLon> poly, const LatLon& p) {
  const LocalFrame frame(p);
  const XY q = frame.to_xy(p);  // (0, 0) by construction

  PolylineHit best;
  best.distance_m = std::numeric_limits<double>::infinity();

  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const XY a = frame.to_xy(poly[i]);
    const XY b = frame.to_xy(poly[i + 1]);
    const double seg_len = haversine_m(poly[i], poly[i + 1]);
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
      t = ((q.x - a.x) * dx + (q.y - a.y) * dy) / len2;
      t = std::clamp(t, 0.0, 1.0);
    }
    const double px = a.x + t * dx;
    const double py = a.y + t * dy;
    const double d = std::hypot(q.x - px, q.y - py);
    if (d < best.distance_m) {
      best.distance_m = d;
      best.offset_m = cum + t * seg_len;
      best.point = frame.to_latlon({px, py});
      best.segment = i;
    }
    cum += seg_len;
  }
  return best;
}

LatLon point_along_polyline(std::span<const LatLon> poly, double offset_m) {
  if (offset_m <= 0.0) return poly.front();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const double seg_len = haversine_m(poly[i], poly[i + 1]);
    if (cum + seg_len >= offset_m && seg_len > 0.0) {
      const double t = (offset_m - cum) / seg_len;
      return {poly[i].lat + t * (poly[i + 1].lat - poly[i].lat),
              poly[i].lon + t * (poly[i + 1].lon - poly[i].lon)};
    }
    cum += seg_len;
  }
  return poly.back();
}

double bearing_deg(const LatLon& a, const LatLon& b) {
  const double coslat = std::cos(0.5 * (a.lat + b.lat) * kDegToRad);
  const double x = (b.lon - a.lon) * coslat;
  const double y = b.lat - a.lat;
  double deg = std::atan2(x, y) / kDegToRad;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

bool segment_intersects_rect(const XY& a, const XY& b, double half_x, double half_y) {
  // Liang-Barsky clipping against the slab pair.
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x + half_x, half_x - a.x, a.y + half_y, half_y - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;  // parallel and outside
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) {
        if (r > t1) return false;
        t0 = std::max(t0, r);
      } else {
        if (r < t0) return false;
        t1 = std::min(t1, r);
      }
    }
  }
  return t0 <= t1;
}

}  // namespace blrn
