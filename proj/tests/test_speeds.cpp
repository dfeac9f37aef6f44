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

#include <algorithm>
#include <numeric>
#include <random>

#include "blrn/errors.hpp"
#include "blrn/speedmodel.hpp"
#include "test_helpers.hpp"

using namespace blrn;
using namespace blrn::testing;

TEST_SUITE_BEGIN("speeds");

TEST_CASE("operational speed table") {
  const MetricIISpeeds las = las_metric_ii();
  CHECK(las.speed_for(RoadType::kMotorway) == 35.0);
  CHECK(las.speed_for(RoadType::kARoad) == 29.0);
  CHECK(las.speed_for(RoadType::kBRoad) == 24.0);
  CHECK(las.speed_for(RoadType::kMinorRoad) == 19.0);
  CHECK(las.speed_for(RoadType::kLocalStreet) == 14.0);
  CHECK(las.speed_for(RoadType::kPrivatePublic) == 5.0);
  CHECK(las.speed_for(RoadType::kPrivateRestricted) == 5.0);
  CHECK(las.speed_for(RoadType::kAlley) == 3.0);
  CHECK(las.speed_for(RoadType::kPedestrianisedStreet) == 2.0);
  CHECK(las.junction_delay_s == 2.5);
}

TEST_CASE("calibrated speed table") {
  const MetricIISpeeds nm = nelder_mead_metric_ii();
  CHECK(nm.junction_delay_s == 4.33);
  CHECK(nm.speed_for(RoadType::kMotorway) == 35.47);
  CHECK(nm.speed_for(RoadType::kARoad) == 29.39);
  CHECK(nm.speed_for(RoadType::kBRoad) == 26.83);
  CHECK(nm.speed_for(RoadType::kMinorRoad) == 18.97);
  CHECK(nm.speed_for(RoadType::kLocalStreet) == 15.51);
  CHECK(nm.speed_for(RoadType::kAlley) == 5.31);
  CHECK(nm.speed_for(RoadType::kPedestrianisedStreet) == 5.37);
  CHECK(nm.speed_for(RoadType::kPrivatePublic) == 8.37);
  CHECK(nm.speed_for(RoadType::kPrivateRestricted) == 6.84);
}

TEST_CASE("harmonic accumulator") {
  HarmonicAccumulator acc;
  acc.add(20.0);
  acc.add(30.0);
  CHECK(acc.mean() == doctest::Approx(24.0).epsilon(1e-12));  // 2/(1/20+1/30)

  HarmonicAccumulator b;
  b.add(15.0);
  b.add(60.0);
  CHECK(b.mean() == doctest::Approx(24.0).epsilon(1e-12));  // 2/(1/15+1/60)

  HarmonicAccumulator c;
  for (int i = 0; i < 3; ++i) c.add(24.0);
  CHECK(c.mean() == doctest::Approx(24.0));
  CHECK(c.count == 3);
}

TEST_CASE("merge order does not matter") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> values;
    for (int i = 0; i < 200; ++i) values.push_back(1.0 + u01(rng) * 60.0);

    HarmonicAccumulator whole;
    for (const double v : values) whole.add(v);

    // Random sharding, random merge order.
    std::vector<HarmonicAccumulator> shards(5);
    for (const double v : values) shards[rng() % 5].add(v);
    std::shuffle(shards.begin(), shards.end(), rng);
    HarmonicAccumulator merged;
    for (const auto& s : shards) merged.merge(s);

    CHECK(merged.count == whole.count);
    CHECK(merged.mean() == doctest::Approx(whole.mean()).epsilon(1e-9));
  }
}

TEST_CASE("harmonic mean never exceeds arithmetic mean") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    HarmonicAccumulator acc;
    double sum = 0.0;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      const double v = 0.5 + u01(rng) * 50.0;
      acc.add(v);
      sum += v;
    }
    CHECK(acc.mean() <= sum / n + 1e-9);
  }
}

namespace {

SnappedObservation snapped(LinkId link, double x, double y, double speed, std::int64_t ts,
                           VehicleClass v = VehicleClass::kAeu) {
  return {link, v, at_m(x, y), ts, speed};
}

}  // namespace

TEST_CASE("neighbourhood pooling for Metrics III and IV") {
  // Two-way local street 100 m long plus a distant A road.
  FeatureSpec local;
  local.coords = {at_m(0, 0), at_m(100, 0)};
  local.way_id = "local";
  FeatureSpec a_road;
  a_road.coords = {at_m(0, 40), at_m(100, 40)};
  a_road.road_type = "ARoad";
  a_road.way_id = "major";
  const RoadNetwork net = RoadNetwork::build_from_geojson(collection_json({local, a_road}));

  const std::int64_t tuesday_0310 = 1477969800;  // 2016-11-01T03:10:00Z
  SpeedModel model;
  model.timezone = Timezone::utc();

  SUBCASE("same-type in-box observations pool harmonically") {
    const std::vector<SnappedObservation> obs{
        snapped(0, 40, 5, 20.0, tuesday_0310),
        snapped(0, 60, -5, 30.0, tuesday_0310),
        snapped(2, 50, 40, 50.0, tuesday_0310),  // A road: different type, excluded
    };
    train_metric_iii_iv(net, obs, 250.0, model);

    REQUIRE(model.metric_iii.count(0) == 1);
    const auto& cell3 = model.metric_iii.at(0).cell(VehicleClass::kAeu, 3);
    CHECK(cell3.count == 2);
    CHECK(cell3.mean() == doctest::Approx(24.0).epsilon(1e-12));

    // Metric IV bins hour-of-week: Tuesday 03:10 -> 1*24 + 3 = 27.
    const auto& cell27 = model.metric_iv.at(0).cell(VehicleClass::kAeu, 27);
    CHECK(cell27.count == 2);
    CHECK(cell27.mean() == doctest::Approx(24.0).epsilon(1e-12));
    CHECK(model.metric_iii.at(0).cell(VehicleClass::kAeu, 4).empty());

    // The A road pools only its own observation.
    const auto& a_cell = model.metric_iii.at(2).cell(VehicleClass::kAeu, 3);
    CHECK(a_cell.count == 1);
    CHECK(a_cell.mean() == doctest::Approx(50.0));
  }

  SUBCASE("observations outside the box are excluded") {
    const std::vector<SnappedObservation> obs{
        snapped(0, 50, 0, 20.0, tuesday_0310),
        snapped(0, 50, 400, 60.0, tuesday_0310),  // 400 m north, outside 250 m box
    };
    train_metric_iii_iv(net, obs, 250.0, model);
    CHECK(model.metric_iii.at(0).cell(VehicleClass::kAeu, 3).count == 1);
  }

  SUBCASE("zero speeds are excluded and counted") {
    const std::vector<SnappedObservation> obs{
        snapped(0, 50, 0, 0.0, tuesday_0310),
        snapped(0, 50, 0, 20.0, tuesday_0310),
    };
    train_metric_iii_iv(net, obs, 250.0, model);
    CHECK(model.stats.zero_speed_skipped == 1);
    CHECK(model.metric_iii.at(0).cell(VehicleClass::kAeu, 3).count == 1);
  }

  SUBCASE("vehicle classes have separate cells") {
    const std::vector<SnappedObservation> obs{
        snapped(0, 50, 0, 20.0, tuesday_0310, VehicleClass::kAeu),
        snapped(0, 50, 0, 40.0, tuesday_0310, VehicleClass::kFru),
    };
    train_metric_iii_iv(net, obs, 250.0, model);
    CHECK(model.metric_iii.at(0).cell(VehicleClass::kAeu, 3).mean() == doctest::Approx(20.0));
    CHECK(model.metric_iii.at(0).cell(VehicleClass::kFru, 3).mean() == doctest::Approx(40.0));
  }
}

TEST_CASE("Metric V trains per link") {
  SpeedModel model;
  model.timezone = Timezone::utc();
  const std::int64_t tuesday_0310 = 1477969800;

  const std::vector<LinkSpeedObservation> obs{
      {7, VehicleClass::kAeu, tuesday_0310, 15.0},
      {7, VehicleClass::kAeu, tuesday_0310 + 60, 60.0},
  };
  train_metric_v(obs, model);
  REQUIRE(model.metric_v.count(7) == 1);
  CHECK(model.metric_v.count(8) == 0);  // untouched links stay absent
  const auto& cell = model.metric_v.at(7).cell(VehicleClass::kAeu, 27);
  CHECK(cell.count == 2);
  CHECK(cell.mean() == doctest::Approx(24.0).epsilon(1e-12));
}

TEST_CASE("link_speed fallback chain") {
  FeatureSpec f;
  f.coords = {at_m(0, 0), at_m(100, 0)};
  f.road_type = "BRoad";
  f.way_id = "b";
  const RoadNetwork net = RoadNetwork::build_from_geojson(collection_json({f}));

  SpeedModel model;
  model.timezone = Timezone::utc();
  const std::int64_t t = 1477969800;  // Tuesday 03:10, hod 3, how 27

  SUBCASE("constants") {
    CHECK(link_speed(net, model, Metric::kI, 0, VehicleClass::kAeu, t).mph == 22.8);
    CHECK(link_speed(net, model, Metric::kI, 0, VehicleClass::kAeu, t).provenance == "I");
    const auto ii = link_speed(net, model, Metric::kII, 0, VehicleClass::kAeu, t);
    CHECK(ii.mph == 24.0);  // B road
    CHECK(ii.provenance == "II");
  }

  SUBCASE("all four provenance outcomes for Metric V") {
    // Nothing trained: V falls through to the road-type table.
    auto got = link_speed(net, model, Metric::kV, 0, VehicleClass::kAeu, t);
    CHECK(got.provenance == "fallback:II");
    CHECK(got.mph == 24.0);

    // Metric III populated: V resolves via III.
    model.metric_iii.emplace(0, SpeedMatrix(24));
    model.metric_iii.at(0).cell(VehicleClass::kAeu, 3).add(18.0);
    got = link_speed(net, model, Metric::kV, 0, VehicleClass::kAeu, t);
    CHECK(got.provenance == "fallback:III");
    CHECK(got.mph == doctest::Approx(18.0));

    // Metric IV populated: preferred over III.
    model.metric_iv.emplace(0, SpeedMatrix(168));
    model.metric_iv.at(0).cell(VehicleClass::kAeu, 27).add(21.0);
    got = link_speed(net, model, Metric::kV, 0, VehicleClass::kAeu, t);
    CHECK(got.provenance == "fallback:IV");
    CHECK(got.mph == doctest::Approx(21.0));

    // Own observations dominate everything.
    model.metric_v.emplace(0, SpeedMatrix(168));
    model.metric_v.at(0).cell(VehicleClass::kAeu, 27).add(33.0);
    got = link_speed(net, model, Metric::kV, 0, VehicleClass::kAeu, t);
    CHECK(got.provenance == "V");
    CHECK(got.mph == doctest::Approx(33.0));
  }

  SUBCASE("metric III and IV fall back too") {
    CHECK(link_speed(net, model, Metric::kIII, 0, VehicleClass::kAeu, t).provenance ==
          "fallback:II");
    CHECK(link_speed(net, model, Metric::kIV, 0, VehicleClass::kAeu, t).provenance ==
          "fallback:II");
    model.metric_iii.emplace(0, SpeedMatrix(24));
    model.metric_iii.at(0).cell(VehicleClass::kAeu, 3).add(18.0);
    CHECK(link_speed(net, model, Metric::kIV, 0, VehicleClass::kAeu, t).provenance ==
          "fallback:III");
  }

  SUBCASE("totality: every metric answers positively everywhere") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
      const Metric metric =
          std::array{Metric::kI, Metric::kII, Metric::kIII, Metric::kIV, Metric::kV}[rng() % 5];
      const VehicleClass v = rng() % 2 ? VehicleClass::kFru : VehicleClass::kAeu;
      const std::int64_t when = static_cast<std::int64_t>(rng() % 2000000000);
      const auto got = link_speed(net, model, metric, rng() % net.link_count(), v, when);
      CHECK(got.mph > 0.0);
      CHECK(std::isfinite(got.mph));
    }
  }
}

TEST_CASE("model serialization round trip") {
  SpeedModel model;
  model.timezone = *Timezone::parse("Europe/London");
  model.metric_iii.emplace(3, SpeedMatrix(24));
  model.metric_iii.at(3).cell(VehicleClass::kAeu, 7).add(19.5);
  model.metric_iv.emplace(3, SpeedMatrix(168));
  model.metric_iv.at(3).cell(VehicleClass::kFru, 100).add(27.25);
  model.metric_iv.at(3).cell(VehicleClass::kFru, 100).add(31.125);
  model.metric_v.emplace(9, SpeedMatrix(168));
  model.metric_v.at(9).cell(VehicleClass::kAeu, 0).add(12.0);
  model.stats.box_observations = 1;
  model.stats.link_observations = 1;
  model.stats.window_from = 1477969800;
  model.stats.window_to = 1477970000;

  const std::string bytes = serialize_model(model);
  const SpeedModel back = deserialize_model(bytes);

  // Bit-identical round trip, checked by re-serialising.
  CHECK(serialize_model(back) == bytes);
  CHECK(back.timezone.name() == "Europe/London");
  CHECK(back.metric_iv.at(3).cell(VehicleClass::kFru, 100).count == 2);
  CHECK(back.metric_iv.at(3).cell(VehicleClass::kFru, 100).recip_sum ==
        model.metric_iv.at(3).cell(VehicleClass::kFru, 100).recip_sum);

  SUBCASE("truncated file fails the checksum") {
    CHECK_THROWS_AS(deserialize_model(std::string_view(bytes).substr(0, bytes.size() - 7)), Error);
    try {
      deserialize_model(std::string_view(bytes).substr(0, bytes.size() - 7));
    } catch (const Error& e) {
      CHECK(e.code() == Errc::kChecksum);
    }
  }
  SUBCASE("corrupted byte fails the checksum") {
    std::string bad = bytes;
    bad[bytes.size() / 2] ^= 0x40;
    try {
      deserialize_model(bad);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::kChecksum);
    }
  }
  SUBCASE("future version is refused, naming both versions") {
    std::string future = bytes;
    future[4] = 9;  // version field follows the magic
    try {
      deserialize_model(future);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::kVersion);
      CHECK(std::string(e.what()).find("9") != std::string::npos);
      CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
  }
  SUBCASE("bad magic is a format error") {
    std::string bad = bytes;
    bad[0] = 'X';
    try {
      deserialize_model(bad);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::kFormat);
    }
  }
}

TEST_CASE("speed table CSV round trip") {
  const MetricIISpeeds nm = nelder_mead_metric_ii();
  const MetricIISpeeds back = metric_ii_from_csv(metric_ii_to_csv(nm));
  for (std::size_t i = 0; i < kRoadTypeCount; ++i) CHECK(back.mph[i] == nm.mph[i]);
  CHECK(back.junction_delay_s == nm.junction_delay_s);

  CHECK_THROWS_AS(metric_ii_from_csv("road_type,mph\nMotorway,35\n"), Error);  // missing rows
}

TEST_CASE("layer inspection") {
  SpeedModel model;
  model.metric_v.emplace(4, SpeedMatrix(168));
  model.metric_v.at(4).cell(VehicleClass::kAeu, 27).add(24.0);
  const std::string csv = inspect_layer_csv(model, "v");
  CHECK(csv.find("link_id,vehicle,bin,speed_mph,n") == 0);
  CHECK(csv.find("4,AEU,27,24,1") != std::string::npos);
  CHECK_THROWS_AS(inspect_layer_csv(model, "nope"), Error);
}

TEST_SUITE_END();
