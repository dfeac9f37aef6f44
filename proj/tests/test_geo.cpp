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

#include <doctest.h>

#include <cmath>
#include <random>

#include "blrn/geo.hpp"
#include "test_helpers.hpp"

using namespace blrn;

TEST_SUITE_BEGIN("geo");

TEST_CASE("haversine basics") {
  const LatLon a{51.5, -0.12};
  CHECK(haversine_m(a, a) == doctest::Approx(0.0));
  // One degree of latitude on the sphere.
  const double per_deg = kEarthRadiusM * kPi / 180.0;
  CHECK(haversine_m({51.0, 0.0}, {52.0, 0.0}) == doctest::Approx(per_deg).epsilon(1e-9));
  CHECK(haversine_m(a, {51.6, -0.12}) == doctest::Approx(haversine_m({51.6, -0.12}, a)));
}

TEST_CASE("local frame round trip") {
  const LocalFrame frame(testing::kAnchor);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const XY p{testing::u01(rng) * 2000 - 1000, testing::u01(rng) * 2000 - 1000};
    const XY q = frame.to_xy(frame.to_latlon(p));
    CHECK(q.x == doctest::Approx(p.x).epsilon(1e-9));
    CHECK(q.y == doctest::Approx(p.y).epsilon(1e-9));
  }
}

TEST_CASE("frame distances agree with haversine at city scale") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const LatLon a = testing::at_m(testing::u01(rng) * 500, testing::u01(rng) * 500);
    const LatLon b = testing::at_m(testing::u01(rng) * 500, testing::u01(rng) * 500);
    const LocalFrame frame(a);
    const XY q = frame.to_xy(b);
    const double planar = std::hypot(q.x, q.y);
    const double geo = haversine_m(a, b);
    if (geo > 1.0) CHECK(std::abs(planar - geo) / geo < 1e-3);  // the 0.1% regime
  }
}

TEST_CASE("polyline projection") {
  const std::vector<LatLon> poly{testing::at_m(0, 0), testing::at_m(100, 0),
                                 testing::at_m(100, 100)};
  CHECK(polyline_length_m(poly) == doctest::Approx(200.0).epsilon(1e-6));

  SUBCASE("point on the polyline") {
    const auto hit = project_to_polyline(poly, testing::at_m(50, 0));
    CHECK(hit.distance_m == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(hit.offset_m == doctest::Approx(50.0).epsilon(1e-4));
  }
  SUBCASE("point off the side") {
    const auto hit = project_to_polyline(poly, testing::at_m(50, 30));
    CHECK(hit.distance_m == doctest::Approx(30.0).epsilon(1e-4));
    CHECK(hit.offset_m == doctest::Approx(50.0).epsilon(1e-4));
  }
  SUBCASE("point past the end clamps") {
    const auto hit = project_to_polyline(poly, testing::at_m(100, 150));
    CHECK(hit.offset_m == doctest::Approx(200.0).epsilon(1e-4));
    CHECK(hit.distance_m == doctest::Approx(50.0).epsilon(1e-4));
  }
}

TEST_CASE("point along polyline") {
  const std::vector<LatLon> poly{testing::at_m(0, 0), testing::at_m(100, 0)};
  const LocalFrame frame(testing::kAnchor);
  const XY mid = frame.to_xy(point_along_polyline(poly, 50.0));
  CHECK(mid.x == doctest::Approx(50.0).epsilon(1e-6));
  CHECK(mid.y == doctest::Approx(0.0).epsilon(1e-6));
  const XY end = frame.to_xy(point_along_polyline(poly, 1e9));
  CHECK(end.x == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("bearing") {
  CHECK(bearing_deg(testing::at_m(0, 0), testing::at_m(0, 100)) ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bearing_deg(testing::at_m(0, 0), testing::at_m(100, 0)) ==
        doctest::Approx(90.0).epsilon(1e-6));
  CHECK(bearing_deg(testing::at_m(0, 0), testing::at_m(0, -100)) ==
        doctest::Approx(180.0).epsilon(1e-6));
}

TEST_CASE("segment vs rect") {
  CHECK(segment_intersects_rect({-10, 0}, {10, 0}, 5, 5));      // crosses through
  CHECK(segment_intersects_rect({0, 0}, {100, 0}, 5, 5));       // starts inside
  CHECK(segment_intersects_rect({5, 5}, {5, 5}, 5, 5));         // corner touch
  CHECK_FALSE(segment_intersects_rect({6, 6}, {100, 6}, 5, 5)); // passes outside
  CHECK_FALSE(segment_intersects_rect({-10, 10}, {10, 10}, 5, 5));
  CHECK(segment_intersects_rect({-10, -10}, {10, 10}, 5, 5));   // diagonal through
}

TEST_CASE("unit conversions") {
  CHECK(mph_to_mps(mps_to_mph(13.4)) == doctest::Approx(13.4).epsilon(1e-12));
  // 0.25 mile in 30 s is 30 mph.
  CHECK(mps_to_mph(402.336 / 30.0) == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_SUITE_END();
