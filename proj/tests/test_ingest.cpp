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

#include <random>
#include <set>

#include "blrn/avls.hpp"
#include "blrn/errors.hpp"
#include "test_helpers.hpp"

using namespace blrn;
using namespace blrn::testing;

namespace {

const char kHeader[] = "timestamp_utc,callsign,incident_id,vehicle,lat,lon,speed_mph,heading_deg\n";

AvlsRecord rec(const std::string& callsign, std::int64_t ts, double x, double y,
               const std::string& incident = "I1", VehicleClass v = VehicleClass::kAeu) {
  AvlsRecord r;
  r.timestamp = ts;
  r.callsign = callsign;
  r.incident_id = incident;
  r.vehicle = v;
  r.position = at_m(x, y);
  r.speed_mph = 20;
  r.heading_deg = 90;
  return r;
}

}  // namespace

TEST_SUITE_BEGIN("ingest");

TEST_CASE("well-formed rows parse") {
  const std::string csv = std::string(kHeader) +
                          "2016-11-03T08:15:00Z,A123,INC1,AEU,51.5,-0.12,20,90\n"
                          "2016-11-03T08:15:15Z,A123,INC1,AEU,51.5001,-0.12,25,90\n"
                          "2016-11-03T08:15:30Z,A123,INC1,FRU,51.5002,-0.12,30,105\n";
  const ParseResult got = parse_avls(csv);
  CHECK(got.records.size() == 3);
  CHECK(got.rejects.empty());
  CHECK(got.records[0].speed_mph == 20);
  CHECK(got.records[2].vehicle == VehicleClass::kFru);
}

TEST_CASE("quantisation violations are rejected with reasons") {
  const std::string csv = std::string(kHeader) +
                          "2016-11-03T08:15:00Z,A123,INC1,AEU,51.5,-0.12,23,90\n"
                          "2016-11-03T08:15:15Z,A123,INC1,AEU,51.5,-0.12,20,97\n"
                          "2016-11-03T08:15:30Z,A123,INC1,XYZ,51.5,-0.12,20,90\n"
                          "bad time,A123,INC1,AEU,51.5,-0.12,20,90\n";
  const ParseResult got = parse_avls(csv);
  CHECK(got.records.empty());
  REQUIRE(got.rejects.size() == 4);
  CHECK(got.rejects[0].reason == "speed quantisation");
  CHECK(got.rejects[1].reason == "heading quantisation");
  CHECK(got.rejects[2].reason == "vehicle class");
  CHECK(got.rejects[3].reason == "timestamp");
  CHECK(got.rejects[0].row_no == 2);
}

TEST_CASE("empty and strict modes") {
  const ParseResult empty = parse_avls(kHeader);
  CHECK(empty.records.empty());
  CHECK(empty.rejects.empty());
  CHECK_THROWS_AS(parse_avls(""), Error);

  const std::string bad = std::string(kHeader) + "2016-11-03T08:15:00Z,A,I,AEU,51.5,-0.12,23,90\n";
  CHECK_THROWS_AS(parse_avls(bad, true), Error);
  CHECK(parse_avls(bad, false).rejects.size() == 1);
}

TEST_CASE("stale fix filtering") {
  SUBCASE("regular cadence is untouched") {
    std::vector<AvlsRecord> in{rec("A", 0, 0, 0), rec("A", 15, 10, 0), rec("A", 30, 20, 0),
                               rec("A", 45, 30, 0)};
    const FilterResult out = filter_stale_fixes(in);
    CHECK(out.records.size() == 4);
    CHECK(out.removed == 0);
  }
  SUBCASE("duplicate timestamp drops the second record") {
    std::vector<AvlsRecord> in{rec("A", 0, 0, 0), rec("A", 0, 5, 0)};
    const FilterResult out = filter_stale_fixes(in);
    CHECK(out.records.size() == 1);
    CHECK(out.removed == 1);
  }
  SUBCASE("10s gap drops only cached positions") {
    std::vector<AvlsRecord> same{rec("A", 0, 0, 0), rec("A", 10, 0, 0)};
    CHECK(filter_stale_fixes(same).removed == 1);
    std::vector<AvlsRecord> moved{rec("A", 0, 0, 0), rec("A", 10, 25, 0)};
    CHECK(filter_stale_fixes(moved).removed == 0);
  }
  SUBCASE("20s gap behaves the same") {
    std::vector<AvlsRecord> same{rec("A", 0, 0, 0), rec("A", 20, 0, 0)};
    CHECK(filter_stale_fixes(same).removed == 1);
    std::vector<AvlsRecord> moved{rec("A", 0, 0, 0), rec("A", 20, 25, 0)};
    CHECK(filter_stale_fixes(moved).removed == 0);
  }
  SUBCASE("gap measures from the previous retained record") {
    // 0, 10(cached), 20(cached): both stale rows measure against t=0.
    std::vector<AvlsRecord> in{rec("A", 0, 0, 0), rec("A", 10, 0, 0), rec("A", 20, 0, 0)};
    const FilterResult out = filter_stale_fixes(in);
    CHECK(out.records.size() == 1);
    CHECK(out.removed == 2);
  }
  SUBCASE("callsigns are independent") {
    std::vector<AvlsRecord> in{rec("A", 0, 0, 0), rec("B", 0, 50, 0), rec("A", 15, 10, 0),
                               rec("B", 15, 60, 0)};
    sort_for_filtering(in);
    CHECK(filter_stale_fixes(in).removed == 0);
  }
}

TEST_CASE("filtering is idempotent") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<AvlsRecord> in;
    std::int64_t t = 0;
    for (int i = 0; i < 40; ++i) {
      const int gaps[] = {0, 10, 15, 20, 30};
      t += gaps[rng() % 5];
      const bool cached = u01(rng) < 0.5;
      in.push_back(rec("A", t, cached && !in.empty() ? 0 : static_cast<double>(i), 0));
      if (cached && !in.empty()) in.back().position = in.front().position;
    }
    const FilterResult once = filter_stale_fixes(in);
    const FilterResult twice = filter_stale_fixes(once.records);
    CHECK(twice.removed == 0);
    REQUIRE(twice.records.size() == once.records.size());
    for (std::size_t i = 0; i < once.records.size(); ++i)
      CHECK(twice.records[i].timestamp == once.records[i].timestamp);
  }
}

TEST_CASE("trace aggregation") {
  SUBCASE("multiple vehicles on one incident make separate traces") {
    std::vector<AvlsRecord> in{rec("A", 0, 0, 0), rec("A", 15, 10, 0), rec("B", 0, 50, 0),
                               rec("B", 15, 60, 0)};
    const AggregateResult out = aggregate_traces(in);
    CHECK(out.traces.size() == 2);
    CHECK(out.traces[0].journey_id == "A|I1|AEU#0");
    CHECK(out.traces[1].journey_id == "B|I1|AEU#0");
  }
  SUBCASE("single-fix groups are discarded and counted") {
    std::vector<AvlsRecord> in{rec("A", 0, 0, 0)};
    const AggregateResult out = aggregate_traces(in);
    CHECK(out.traces.empty());
    CHECK(out.discarded_short == 1);
  }
  SUBCASE("interleaved journeys partition cleanly") {
    std::vector<AvlsRecord> in;
    for (int i = 0; i < 5; ++i) {
      in.push_back(rec("A", i * 15, i * 10.0, 0, "I1"));
      in.push_back(rec("B", i * 15 + 3, i * 10.0, 100, "I1"));
      in.push_back(rec("A", i * 15 + 7, i * 10.0, 200, "I2"));
    }
    const AggregateResult out = aggregate_traces(in);
    REQUIRE(out.traces.size() == 3);
    std::size_t total = 0;
    for (const auto& t : out.traces) {
      total += t.fixes.size();
      for (std::size_t i = 1; i < t.fixes.size(); ++i)
        CHECK(t.fixes[i].timestamp > t.fixes[i - 1].timestamp);
    }
    CHECK(total == in.size());  // every record lands in exactly one trace
  }
  SUBCASE("long gaps split journeys within a key") {
    std::vector<AvlsRecord> in{rec("A", 0, 0, 0), rec("A", 15, 10, 0), rec("A", 1000, 20, 0),
                               rec("A", 1015, 30, 0)};
    const AggregateResult out = aggregate_traces(in);
    REQUIRE(out.traces.size() == 2);
    CHECK(out.traces[0].journey_id == "A|I1|AEU#0");
    CHECK(out.traces[1].journey_id == "A|I1|AEU#1");
  }
}

TEST_CASE("snap coverage") {
  const RoadNetwork net = RoadNetwork::build_from_geojson(grid3x3_geojson(100.0));

  SUBCASE("all records on one link") {
    std::vector<AvlsRecord> in;
    for (int m = 0; m < 3; ++m)
      in.push_back(rec("A", 1478131200 + m * 31 * 86400, 50, 0));  // Nov/Dec/Jan
    const MonthlyCoverage cov = snap_coverage(net, in);
    REQUIRE(cov.months.size() == 3);
    for (const auto& [month, n] : cov.months) CHECK(n == 1);
  }

  SUBCASE("set-union semantics across months") {
    std::vector<AvlsRecord> in;
    in.push_back(rec("A", 1478131200, 50, 0));                 // link under (50,0)
    in.push_back(rec("A", 1478131300, 50, 100));               // second link
    in.push_back(rec("A", 1478131200 + 31 * 86400, 50, 100));  // repeat
    in.push_back(rec("A", 1478131300 + 31 * 86400, 50, 200));  // third link
    const MonthlyCoverage cov = snap_coverage(net, in);
    REQUIRE(cov.months.size() == 2);
    CHECK(cov.months[0].second == 2);
    CHECK(cov.months[1].second == 3);
  }

  SUBCASE("matches brute-force prefix union and stays monotone") {
    std::mt19937_64 rng(11);
    std::vector<AvlsRecord> in;
    for (int i = 0; i < 120; ++i)
      in.push_back(rec("A", 1478131200 + static_cast<std::int64_t>(u01(rng) * 90) * 86400,
                       u01(rng) * 200, u01(rng) * 200));
    const MonthlyCoverage cov = snap_coverage(net, in);

    // Brute force: per month prefix, union of nearest links.
    std::vector<std::pair<std::string, const AvlsRecord*>> tagged;
    for (const auto& r : in) tagged.emplace_back(month_key_utc(r.timestamp), &r);
    std::size_t prev = 0;
    for (const auto& [month, count] : cov.months) {
      std::set<LinkId> links;
      for (const auto& [m, r] : tagged)
        if (m <= month) links.insert(net.nearest_link(r->position)->link);
      CHECK(count == links.size());
      CHECK(count >= prev);
      CHECK(count <= net.link_count());
      prev = count;
    }
  }
}

TEST_SUITE_END();
