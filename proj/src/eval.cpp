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

#include "blrn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "blrn/errors.hpp"
#include "blrn/io.hpp"

namespace blrn {

SimilarityReport path_coincidence(const RoadNetwork& net, std::span<const LinkId> actual,
                                  std::span<const LinkId> predicted) {
  if (actual.empty()) throw Error(Errc::kInvalidArg, "actual path is empty");
  const std::unordered_set<LinkId> pred(predicted.begin(), predicted.end());

  SimilarityReport rep;
  double total_len = 0.0;
  for (const LinkId l : actual) total_len += net.link(l).length_m;

  std::size_t hits = 0;
  std::size_t q_links[4] = {0, 0, 0, 0};
  std::size_t q_hits[4] = {0, 0, 0, 0};
  double cum = 0.0;
  for (const LinkId l : actual) {
    const double len = net.link(l).length_m;
    const double mid = cum + len / 2.0;
    cum += len;
    int q = total_len > 0.0 ? static_cast<int>(mid / (total_len / 4.0)) : 0;
    q = std::clamp(q, 0, 3);
    const bool hit = pred.count(l) > 0;
    hits += hit;
    ++q_links[q];
    q_hits[q] += hit;
  }
  rep.whole = static_cast<double>(hits) / static_cast<double>(actual.size());
  for (int q = 0; q < 4; ++q)
    if (q_links[q] > 0)
      rep.quartile[q] = static_cast<double>(q_hits[q]) / static_cast<double>(q_links[q]);
  return rep;
}

ErrorTable error_table(std::span<const PredictionRow> predictions,
                       std::span<const ReferenceRow> references, const LatLon& centre,
                       const Timezone& tz) {
  ErrorTable table;
  std::map<std::string, const ReferenceRow*> by_id;
  for (const auto& r : references) by_id[r.journey_id] = &r;

  std::set<std::string> matched;
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.journey_id);
    if (it == by_id.end()) {
      table.unmatched.push_back(p.journey_id);
      continue;
    }
    const ReferenceRow& ref = *it->second;
    matched.insert(p.journey_id);
    ErrorRecord rec;
    rec.journey_id = p.journey_id;
    rec.actual_s = ref.actual_s;
    rec.t_beta_s = p.t_beta_s;
    rec.t_chi_s = p.t_chi_s;
    rec.error_beta_s = p.t_beta_s - ref.actual_s;
    rec.error_chi_s = p.t_chi_s - ref.actual_s;
    rec.midpoint = {(ref.origin.lat + ref.destination.lat) / 2.0,
                    (ref.origin.lon + ref.destination.lon) / 2.0};
    rec.centre_km = haversine_m(centre, rec.midpoint) / 1000.0;
    rec.hour_of_day = hour_of_day(ref.departure, tz);
    rec.vehicle = ref.vehicle;
    table.records.push_back(std::move(rec));
  }
  for (const auto& [id, ref] : by_id)
    if (!matched.count(id)) table.unmatched.push_back(id);
  std::sort(table.unmatched.begin(), table.unmatched.end());
  return table;
}

std::vector<RegionPolygon> parse_regions_geojson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, std::string("region file is not valid JSON: ") + e.what());
  }
  if (!doc.contains("features") || !doc["features"].is_array())
    throw Error(Errc::kParse, "region file is not a FeatureCollection");
  std::vector<RegionPolygon> out;
  for (std::size_t i = 0; i < doc["features"].size(); ++i) {
    const auto& f = doc["features"][i];
    const auto& geom = f.value("geometry", nlohmann::json::object());
    if (geom.value("type", "") != "Polygon")
      throw Error(Errc::kParse, "region feature " + std::to_string(i) + " is not a Polygon");
    RegionPolygon poly;
    poly.name = f.value("properties", nlohmann::json::object())
                    .value("name", "region-" + std::to_string(i));
    for (const auto& ring : geom.value("coordinates", nlohmann::json::array())) {
      std::vector<LatLon> r;
      for (const auto& c : ring) {
        if (!c.is_array() || c.size() < 2)
          throw Error(Errc::kParse, "region feature " + std::to_string(i) + ": bad coordinate");
        r.push_back({c[1].get<double>(), c[0].get<double>()});
      }
      if (r.size() < 4)
        throw Error(Errc::kParse, "region feature " + std::to_string(i) + ": ring too short");
      poly.rings.push_back(std::move(r));
    }
    if (poly.rings.empty())
      throw Error(Errc::kParse, "region feature " + std::to_string(i) + ": no rings");
    out.push_back(std::move(poly));
  }
  return out;
}

bool point_in_polygon(const RegionPolygon& poly, const LatLon& p) {
  // Even-odd ray casting across all rings, so holes subtract.
  bool inside = false;
  for (const auto& ring : poly.rings) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const bool crosses = (ring[i].lat > p.lat) != (ring[j].lat > p.lat);
      if (!crosses) continue;
      const double x = (ring[j].lon - ring[i].lon) * (p.lat - ring[i].lat) /
                           (ring[j].lat - ring[i].lat) +
                       ring[i].lon;
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

namespace {

double nearest_rank(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

}  // namespace

AggregateSummary aggregate(std::span<const ErrorRecord> errors, EvalAxis axis, EvalValue value,
                           std::span<const RegionPolygon> regions) {
  std::map<std::pair<double, std::string>, std::vector<double>> groups;

  for (const auto& rec : errors) {
    const double v = value == EvalValue::kErrorBeta ? rec.error_beta_s : rec.error_chi_s;
    std::pair<double, std::string> key;
    switch (axis) {
      case EvalAxis::kDuration: {
        const int band = std::max(0, static_cast<int>(rec.actual_s / 120.0));
        key = {static_cast<double>(band),
               std::to_string(band * 2) + "-" + std::to_string(band * 2 + 2) + "min"};
        break;
      }
      case EvalAxis::kCentreDistance: {
        const int band = std::max(0, static_cast<int>(rec.centre_km / 2.0));
        key = {static_cast<double>(band),
               std::to_string(band * 2) + "-" + std::to_string(band * 2 + 2) + "km"};
        break;
      }
      case EvalAxis::kHourOfDay:
        key = {static_cast<double>(rec.hour_of_day), std::to_string(rec.hour_of_day)};
        break;
      case EvalAxis::kRegion: {
        std::string name = "none";
        for (const auto& poly : regions)
          if (point_in_polygon(poly, rec.midpoint)) {
            name = poly.name;
            break;
          }
        key = {0.0, name};
        break;
      }
    }
    groups[key].push_back(v);
  }

  AggregateSummary summary;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    Bucket b;
    b.label = key.second;
    b.sort_key = key.first;
    b.count = values.size();
    double sum = 0.0;
    for (const double v : values) sum += v;
    b.mean = sum / static_cast<double>(values.size());
    b.q10 = nearest_rank(values, 0.10);
    b.q25 = nearest_rank(values, 0.25);
    b.q50 = nearest_rank(values, 0.50);
    b.q75 = nearest_rank(values, 0.75);
    b.q90 = nearest_rank(values, 0.90);
    summary.buckets.push_back(std::move(b));
  }
  return summary;
}

std::string aggregate_to_csv(const AggregateSummary& summary) {
  std::string out = "bucket,count,mean,q10,q25,q50,q75,q90\n";
  for (const auto& b : summary.buckets) {
    out += b.label;
    out += ',';
    out += std::to_string(b.count);
    for (const double v : {b.mean, b.q10, b.q25, b.q50, b.q75, b.q90}) {
      out += ',';
      out += format_double(v, 3);
    }
    out += '\n';
  }
  return out;
}

}  // namespace blrn
