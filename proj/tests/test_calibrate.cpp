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

#include "blrn/calibrate.hpp"
#include "blrn/routing.hpp"
#include "blrn/synth.hpp"
#include "test_helpers.hpp"

using namespace blrn;
using namespace blrn::testing;

TEST_SUITE_BEGIN("calibrate");

TEST_CASE("simplex minimises a parabola") {
  NmOptions options;
  options.tol = 1e-10;
  options.max_iter = 200;
  NmBounds bounds{{-100.0}, {100.0}};
  const auto objective = [](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); };
  const NmResult got = nelder_mead_minimize(objective, {0.0}, bounds, options);
  CHECK(got.converged);
  CHECK(std::abs(got.best_x[0] - 3.0) < 1e-3);
  CHECK(got.best_f < 1e-6);
}

TEST_CASE("simplex handles multiple dimensions and clipping") {
  NmOptions options;
  options.tol = 1e-12;
  options.max_iter = 500;
  // Optimum at (5, -2) but the box stops the second coordinate at 0.
  NmBounds bounds{{0.0, 0.0}, {10.0, 10.0}};
  const auto objective = [](std::span<const double> x) {
    return (x[0] - 5.0) * (x[0] - 5.0) + (x[1] + 2.0) * (x[1] + 2.0);
  };
  const NmResult got = nelder_mead_minimize(objective, {1.0, 5.0}, bounds, options);
  CHECK(std::abs(got.best_x[0] - 5.0) < 1e-2);
  CHECK(got.best_x[1] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("constant objective converges to the start") {
  NmOptions options;
  NmBounds bounds{{-1.0, -1.0}, {1.0, 1.0}};
  const auto objective = [](std::span<const double>) { return 7.0; };
  const NmResult got = nelder_mead_minimize(objective, {0.25, -0.5}, bounds, options);
  CHECK(got.converged);
  CHECK(got.iterations == 0);
  CHECK(got.best_x[0] == 0.25);
  CHECK(got.best_x[1] == -0.5);
}

TEST_CASE("every evaluated point respects the box") {
  NmOptions options;
  options.max_iter = 100;
  options.tol = 0.0;  // force the full budget
  NmBounds bounds{{-2.0, 3.0}, {2.0, 9.0}};
  bool ok = true;
  const auto objective = [&](std::span<const double> x) {
    ok = ok && x[0] >= -2.0 && x[0] <= 2.0 && x[1] >= 3.0 && x[1] <= 9.0;
    return std::sin(x[0] * 5) + std::cos(x[1] * 3) + 0.1 * x[0] * x[1];
  };
  nelder_mead_minimize(objective, {0.0, 6.0}, bounds, options);
  CHECK(ok);
}

TEST_CASE("non-finite objectives abort") {
  NmOptions options;
  NmBounds bounds{{-1.0}, {1.0}};
  const auto objective = [](std::span<const double> x) {
    return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  };
  CHECK_THROWS_AS(nelder_mead_minimize(objective, {0.9}, bounds, options), Error);
}

TEST_CASE("speed vector round trip and bounds") {
  const MetricIISpeeds las = las_metric_ii();
  const auto v = speed_vector_from_table(las);
  REQUIRE(v.size() == 10);
  CHECK(v[0] == 2.5);
  const MetricIISpeeds back = table_from_speed_vector(v);
  for (std::size_t i = 0; i < kRoadTypeCount; ++i) CHECK(back.mph[i] == las.mph[i]);

  const NmBounds bounds = calibration_bounds(las);
  CHECK(bounds.lo[0] == 0.0);
  CHECK(bounds.hi[0] == 30.0);
  // Pedestrianised street starts at 2 mph: the lower bound floors at 0.5.
  CHECK(bounds.lo[1 + static_cast<std::size_t>(RoadType::kPedestrianisedStreet)] == 0.5);
  CHECK(bounds.hi[1 + static_cast<std::size_t>(RoadType::kMotorway)] == 55.0);
}

TEST_CASE("corpus objective scores route similarity") {
  const RoadNetwork net = RoadNetwork::build_from_geojson(grid3x3_geojson(100.0));
  const SpeedModel model;
  const MetricIISpeeds las = las_metric_ii();

  // Build a tiny corpus from the las-table routes themselves.
  std::vector<CorpusEntry> corpus;
  for (const auto& [a, b] : std::vector<std::pair<NodeId, NodeId>>{{0, 8}, {2, 6}, {1, 7}}) {
    RouteRequest req;
    req.origin = net.node_coord(a);
    req.destination = net.node_coord(b);
    req.vehicle = VehicleClass::kAeu;
    req.departure = 1478160900;
    req.metric = Metric::kII;
    req.metric_ii_table = &las;
    CorpusEntry e;
    e.journey_id = std::to_string(a) + "-" + std::to_string(b);
    e.origin = req.origin;
    e.destination = req.destination;
    e.vehicle = req.vehicle;
    e.departure = req.departure;
    e.actual_links = shortest_route(net, model, req).links;
    corpus.push_back(e);
  }
  CHECK(corpus_objective(net, model, corpus, las, 1) == doctest::Approx(1.0));

  // A corpus entry that cannot match drags the mean down.
  corpus.back().actual_links = {1, 3};  // reversed directions of another road
  const double partial = corpus_objective(net, model, corpus, las, 1);
  CHECK(partial < 1.0);
  CHECK(partial >= 2.0 / 3.0 * 0.99);
}

TEST_CASE("calibration recovers a planted table") {
  // World driven under a hidden table that swaps the usual A/B ordering.
  SynthConfig cfg;
  cfg.grid_w = 8;
  cfg.grid_h = 8;
  cfg.spacing_m = 150.0;
  cfg.journeys = 60;
  cfg.noise_m = 0.0;
  cfg.seed = 77;
  cfg.aeu_mph = {35, 21, 33, 19, 12, 5, 5, 3, 2};  // B roads beat A roads
  cfg.fru_delta_mph = 0.0;
  const SynthWorld world = generate_world(cfg);
  const RoadNetwork net = RoadNetwork::build_from_geojson(world.network_geojson);

  std::vector<CorpusEntry> corpus;
  for (const auto& j : world.truth) {
    CorpusEntry e;
    e.journey_id = j.journey_id;
    e.origin = net.node_coord(net.link(j.links.front()).from);
    e.destination = net.node_coord(net.link(j.links.back()).to);
    e.vehicle = j.vehicle;
    e.departure = j.departure;
    e.actual_links = j.links;
    corpus.push_back(e);
  }

  const SpeedModel model;
  NmOptions options;
  options.max_iter = 400;
  options.tol = 1e-4;
  const CalibrationReport report =
      calibrate_metric_ii(net, model, corpus, las_metric_ii(), options, 1);

  CHECK(report.final_objective > report.initial_objective);
  CHECK(report.final_objective >= 0.95);
  CHECK(report.initial_objective < 0.95);

  SUBCASE("the report is reproducible") {
    const CalibrationReport again =
        calibrate_metric_ii(net, model, corpus, las_metric_ii(), options, 1);
    CHECK(again.final_objective == report.final_objective);
    CHECK(again.iterations == report.iterations);
    REQUIRE(again.trace.size() == report.trace.size());
    for (std::size_t i = 0; i < report.trace.size(); ++i) {
      CHECK(again.trace[i].operation == report.trace[i].operation);
      CHECK(again.trace[i].best_f == report.trace[i].best_f);
    }
    for (std::size_t i = 0; i < kRoadTypeCount; ++i)
      CHECK(again.final_table.mph[i] == report.final_table.mph[i]);
  }

  SUBCASE("monotone: the optimizer returns its best evaluated point") {
    for (std::size_t i = 1; i < report.trace.size(); ++i)
      CHECK(report.trace[i].best_f >= report.trace[i - 1].best_f - 1e-12);
    CHECK(report.final_objective >= report.trace.front().best_f - 1e-12);
  }
}

TEST_CASE("corpus CSV round trip") {
  std::vector<CorpusEntry> corpus(2);
  corpus[0].journey_id = "a";
  corpus[0].origin = at_m(0, 0);
  corpus[0].destination = at_m(500, 500);
  corpus[0].vehicle = VehicleClass::kFru;
  corpus[0].departure = 1478160900;
  corpus[0].actual_links = {3, 5, 7};
  corpus[1] = corpus[0];
  corpus[1].journey_id = "b";
  corpus[1].actual_links = {1};

  const auto back = parse_corpus_csv(corpus_to_csv(corpus));
  REQUIRE(back.size() == 2);
  CHECK(back[0].journey_id == "a");
  CHECK(back[0].actual_links == std::vector<LinkId>{3, 5, 7});
  CHECK(back[0].vehicle == VehicleClass::kFru);
  CHECK(back[0].departure == 1478160900);
  CHECK(back[1].actual_links == std::vector<LinkId>{1});

  CHECK_THROWS_AS(parse_corpus_csv("journey_id\nonly,one\n"), Error);
}

TEST_SUITE_END();
