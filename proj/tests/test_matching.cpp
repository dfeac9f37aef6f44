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
#include <set>

#include "blrn/matching.hpp"
#include "blrn/synth.hpp"
#include "test_helpers.hpp"

using namespace blrn;
using namespace blrn::testing;

namespace {

Trace make_trace(const std::string& id, const std::vector<std::pair<std::int64_t, LatLon>>& fixes,
                 VehicleClass vehicle = VehicleClass::kAeu) {
  Trace t;
  t.journey_id = id;
  t.callsign = "C";
  t.incident_id = "I";
  t.vehicle = vehicle;
  for (const auto& [ts, pos] : fixes) {
    AvlsRecord r;
    r.timestamp = ts;
    r.callsign = "C";
    r.incident_id = "I";
    r.vehicle = vehicle;
    r.position = pos;
    r.speed_mph = 20;
    r.heading_deg = 0;
    t.fixes.push_back(r);
  }
  return t;
}

// Independent all-pairs shortest node distances (Floyd-Warshall).
std::vector<std::vector<double>> all_pairs(const RoadNetwork& net) {
  const std::size_t n = net.node_count();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 1e18));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (LinkId l = 0; l < net.link_count(); ++l)
    d[net.link(l).from][net.link(l).to] =
        std::min(d[net.link(l).from][net.link(l).to], net.link(l).length_m);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Brute-force best score over every candidate assignment, using the same
// emission/transition formulas but independent distances.
double brute_force_score(const RoadNetwork& net, const std::vector<const AvlsRecord*>& fixes,
                         const std::vector<std::vector<Candidate>>& candidates,
                         const MatchParams& params) {
  const auto dist = all_pairs(net);
  auto route_dist = [&](const Candidate& a, const Candidate& b) {
    double best = 1e18;
    if (a.link == b.link && b.offset_m >= a.offset_m) best = b.offset_m - a.offset_m;
    const RoadLink& la = net.link(a.link);
    const double via = (la.length_m - a.offset_m) + dist[la.to][net.link(b.link).from] + b.offset_m;
    return std::min(best, via);
  };
  auto emission = [&](const Candidate& c) {
    const double r = c.emission_dist_m / params.sigma_m;
    return -0.5 * r * r;
  };

  double best = -1e300;
  std::vector<std::size_t> pick(fixes.size(), 0);
  while (true) {
    double score = emission(candidates[0][pick[0]]);
    bool feasible = true;
    for (std::size_t t = 1; t < fixes.size() && feasible; ++t) {
      const Candidate& a = candidates[t - 1][pick[t - 1]];
      const Candidate& b = candidates[t][pick[t]];
      const double gc = haversine_m(fixes[t - 1]->position, fixes[t]->position);
      const double cutoff = gc * params.cutoff_factor + params.cutoff_slack_m;
      const double rd = route_dist(a, b);
      if (!(rd <= cutoff)) {
        feasible = false;
        break;
      }
      score += -std::abs(rd - gc) / params.beta_m + emission(b);
    }
    if (feasible) best = std::max(best, score);

    // Odometer increment over candidate indices.
    std::size_t t = 0;
    while (t < fixes.size() && ++pick[t] == candidates[t].size()) {
      pick[t] = 0;
      ++t;
    }
    if (t == fixes.size()) break;
  }
  return best;
}

}  // namespace

TEST_SUITE_BEGIN("matching");

TEST_CASE("noiseless fixes recover the exact route") {
  // Drive east along the bottom row of the grid, then north: a 4-link route.
  const RoadNetwork net = RoadNetwork::build_from_geojson(grid3x3_geojson(100.0));
  const std::vector<LatLon> path_points = {at_m(0, 0),   at_m(100, 0), at_m(200, 0),
                                           at_m(200, 100), at_m(200, 200)};
  // One fix per node at 15 s cadence plus midpoints for density.
  std::vector<std::pair<std::int64_t, LatLon>> fixes;
  for (std::size_t i = 0; i < path_points.size(); ++i)
    fixes.emplace_back(static_cast<std::int64_t>(i * 15), path_points[i]);

  const MatchParams params;
  const MatchOutcome out = match_trace(net, make_trace("j1", fixes), params);
  REQUIRE(out.route.has_value());

  // Expected links by geometry.
  std::vector<LinkId> want;
  for (std::size_t i = 0; i + 1 < path_points.size(); ++i) {
    const LatLon mid{(path_points[i].lat + path_points[i + 1].lat) / 2,
                     (path_points[i].lon + path_points[i + 1].lon) / 2};
    const auto hit = net.nearest_link(mid);
    REQUIRE(hit.has_value());
    // nearest_link picks the lower id of the directed pair; orient by endpoints.
    const RoadLink& l = net.link(hit->link);
    const bool forward = haversine_m(net.node_coord(l.from), path_points[i]) < 1.0;
    want.push_back(forward ? hit->link : *net.reverse_of(hit->link));
  }
  CHECK(out.route->link_sequence() == want);
  CHECK(out.route->fixes_dropped == 0);

  // Elements are path-connected with matching boundary instants.
  const auto& elems = out.route->elements;
  for (std::size_t i = 1; i < elems.size(); ++i) {
    CHECK(net.link(elems[i - 1].link).to == net.link(elems[i].link).from);
    CHECK(elems[i].entry_s == doctest::Approx(elems[i - 1].exit_s));
    CHECK(elems[i].entry_s >= elems[i - 1].entry_s);
  }
}

TEST_CASE("viterbi equals brute force on small instances") {
  const RoadNetwork net = RoadNetwork::build_from_geojson(grid3x3_geojson(100.0));
  MatchParams params;
  params.max_candidates = 3;
  params.cand_radius_m = 120.0;

  std::mt19937_64 rng(21);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    // Random short walks with mild noise.
    std::vector<std::pair<std::int64_t, LatLon>> fixes;
    double x = u01(rng) * 200;
    double y = u01(rng) * 200;
    const int n = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      fixes.emplace_back(i * 15, at_m(x, y));
      x += u01(rng) * 160 - 30;
      y += u01(rng) * 160 - 30;
    }
    const Trace trace = make_trace("t", fixes);
    const MatchOutcome out = match_trace(net, trace, params);
    if (!out.route) continue;  // rejected instances have no score to compare

    std::vector<const AvlsRecord*> fix_ptrs;
    std::vector<std::vector<Candidate>> cands;
    for (const auto& f : trace.fixes) {
      fix_ptrs.push_back(&f);
      cands.push_back(match_candidates(net, f.position, params));
    }
    if (out.route->fixes_dropped > 0) continue;  // repaired chains change the stage set
    const double want = brute_force_score(net, fix_ptrs, cands, params);
    CHECK(out.route->score == doctest::Approx(want).epsilon(1e-12));
    ++compared;
  }
  CHECK(compared >= 20);  // the oracle must actually exercise instances
}

TEST_CASE("rejections") {
  const RoadNetwork net = RoadNetwork::build_from_geojson(grid3x3_geojson(100.0));
  MatchParams params;

  SUBCASE("fix with no candidate in radius") {
    params.cand_radius_m = 200.0;
    const MatchOutcome out = match_trace(
        net, make_trace("far", {{0, at_m(0, 0)}, {15, at_m(5000, 5000)}}), params);
    CHECK_FALSE(out.route.has_value());
    CHECK(out.reject_reason == "no candidate");
  }
  SUBCASE("stationary trace is degenerate") {
    const MatchOutcome out =
        match_trace(net, make_trace("still", {{0, at_m(50, 0)}, {15, at_m(50, 0)}}), params);
    CHECK_FALSE(out.route.has_value());
    CHECK(out.reject_reason == "degenerate");
  }
  SUBCASE("single fix is degenerate") {
    const MatchOutcome out = match_trace(net, make_trace("one", {{0, at_m(50, 0)}}), params);
    CHECK_FALSE(out.route.has_value());
  }
}

TEST_CASE("speed extraction") {
  SUBCASE("quarter mile in 30 seconds is 30 mph") {
    FeatureSpec f;
    f.coords = {at_m(0, 0), at_m(402.336, 0)};
    f.way_id = "qm";
    const RoadNetwork net = RoadNetwork::build_from_geojson(collection_json({f}));
    // The haversine length of this east-west way is not exactly 402.336 m;
    // feed the element the link's own length to pin the ratio.
    MatchedRoute route;
    route.journey_id = "j";
    route.vehicle = VehicleClass::kAeu;
    route.elements.push_back({0, 1000.0, 1030.0, 0.0, net.link(0).length_m});

    const double expected = mps_to_mph(net.link(0).length_m / 30.0);
    const auto obs = extract_speeds(route, net);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].speed_mph == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(30.0).epsilon(1e-4));
    CHECK(obs[0].link == 0);
    CHECK(obs[0].entry == 1000);
  }
  SUBCASE("sub-floor traversals are skipped and counted") {
    FeatureSpec f;
    f.coords = {at_m(0, 0), at_m(100, 0)};
    f.way_id = "w";
    const RoadNetwork net = RoadNetwork::build_from_geojson(collection_json({f}));
    MatchedRoute route;
    route.elements.push_back({0, 1000.0, 1000.05, 0.0, net.link(0).length_m});
    std::size_t skipped = 0;
    const auto obs = extract_speeds(route, net, 0.2, &skipped);
    CHECK(obs.empty());
    CHECK(skipped == 1);
  }
  SUBCASE("partial traversals yield no observation") {
    FeatureSpec f;
    f.coords = {at_m(0, 0), at_m(100, 0)};
    f.way_id = "w";
    const RoadNetwork net = RoadNetwork::build_from_geojson(collection_json({f}));
    MatchedRoute route;
    route.elements.push_back({0, 1000.0, 1010.0, 30.0, net.link(0).length_m});
    CHECK(extract_speeds(route, net).empty());
  }
}

TEST_CASE("uniform-speed world yields uniform observations") {
  SynthConfig cfg;
  cfg.grid_w = 5;
  cfg.grid_h = 5;
  cfg.spacing_m = 150.0;
  cfg.journeys = 20;
  cfg.noise_m = 0.0;
  cfg.seed = 9;
  cfg.aeu_mph = {24, 24, 24, 24, 24, 24, 24, 24, 24};
  cfg.fru_delta_mph = 0.0;
  const SynthWorld world = generate_world(cfg);
  const RoadNetwork net = RoadNetwork::build_from_geojson(world.network_geojson);

  ParseResult parsed = parse_avls(world.avls_csv);
  REQUIRE(parsed.rejects.empty());
  sort_for_filtering(parsed.records);
  auto filtered = filter_stale_fixes(std::move(parsed.records));
  const AggregateResult agg = aggregate_traces(std::move(filtered.records));
  REQUIRE(agg.traces.size() == 20);

  const MatchParams params;
  std::size_t checked = 0;
  for (const auto& trace : agg.traces) {
    const MatchOutcome out = match_trace(net, trace, params);
    REQUIRE(out.route.has_value());
    for (const auto& obs : extract_speeds(*out.route, net)) {
      CHECK(obs.speed_mph == doctest::Approx(24.0).epsilon(0.1 / 24.0));
      ++checked;
    }

    // Speed consistency: traversal times along the route add up to the
    // first-to-last fix interval.
    double total = 0.0;
    for (const auto& e : out.route->elements) total += e.exit_s - e.entry_s;
    const double span = static_cast<double>(trace.fixes.back().timestamp -
                                            trace.fixes.front().timestamp);
    CHECK(total == doctest::Approx(span).epsilon(1e-9));
  }
  CHECK(checked > 50);
}

TEST_CASE("noisy matching stays on the true path") {
  SynthConfig cfg;
  cfg.grid_w = 8;
  cfg.grid_h = 8;
  cfg.spacing_m = 150.0;
  cfg.journeys = 30;
  cfg.noise_m = 10.0;
  cfg.seed = 10;
  const SynthWorld world = generate_world(cfg);
  const RoadNetwork net = RoadNetwork::build_from_geojson(world.network_geojson);

  ParseResult parsed = parse_avls(world.avls_csv);
  sort_for_filtering(parsed.records);
  auto filtered = filter_stale_fixes(std::move(parsed.records));
  const AggregateResult agg = aggregate_traces(std::move(filtered.records));

  std::map<std::string, const TruthJourney*> truth;
  for (const auto& j : world.truth) truth[j.journey_id] = &j;

  double coincidence_sum = 0.0;
  std::size_t n = 0;
  for (const auto& trace : agg.traces) {
    const MatchOutcome out = match_trace(net, trace, MatchParams{});
    if (!out.route) continue;
    const auto& want = truth.at(trace.journey_id)->links;
    const auto seq = out.route->link_sequence();
    const std::set<LinkId> got(seq.begin(), seq.end());
    std::size_t hit = 0;
    for (const LinkId l : want) hit += got.count(l);
    coincidence_sum += static_cast<double>(hit) / static_cast<double>(want.size());
    ++n;
  }
  REQUIRE(n >= 25);
  CHECK(coincidence_sum / static_cast<double>(n) >= 0.9);
}

TEST_CASE("coverage by road type") {
  const RoadNetwork net = RoadNetwork::build_from_geojson(grid3x3_geojson(100.0));

  SUBCASE("no routes means zero fractions") {
    const auto rows = coverage_by_road_type({}, net);
    for (const auto& row : rows) {
      CHECK(row.links_used == 0);
      CHECK(row.fraction == 0.0);
    }
  }
  SUBCASE("single route counting") {
    MatchedRoute r;
    r.elements.push_back({0, 0, 1, 0, 1});
    r.elements.push_back({2, 1, 2, 0, 1});
    r.elements.push_back({0, 2, 3, 0, 1});  // repeat does not double-count
    std::vector<MatchedRoute> routes{r};
    const auto rows = coverage_by_road_type(routes, net);
    for (const auto& row : rows) {
      if (row.road_type == RoadType::kLocalStreet) {
        CHECK(row.links_total == 24);
        CHECK(row.links_used == 2);
        CHECK(row.fraction == doctest::Approx(2.0 / 24.0));
      } else {
        CHECK(row.links_total == 0);
      }
    }
  }
}

TEST_SUITE_END();
