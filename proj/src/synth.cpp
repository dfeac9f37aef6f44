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

#include "blrn/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>

#include "blrn/errors.hpp"
#include "blrn/eval.hpp"
#include "blrn/io.hpp"
#include "blrn/routing.hpp"
#include "blrn/timeutil.hpp"

namespace blrn {

namespace {

// Portable deterministic randomness: mt19937_64 is bit-exact everywhere, and
// the mappings below avoid distribution implementations that are not.
double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal(std::mt19937_64& rng, double sigma) {
  const double u1 = 1.0 - u01(rng);  // (0, 1]
  const double u2 = u01(rng);
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int round_to_step(double v, int step) {
  return static_cast<int>(std::llround(v / step)) * step;
}

// Position, instantaneous speed and heading at a path-relative instant.
struct DriveState {
  LatLon position;
  double speed_mph = 0.0;
  double heading_deg = 0.0;
};

DriveState state_at(const RoadNetwork& net, const SynthConfig& cfg, const TruthJourney& j,
                    double t_rel) {
  DriveState st;
  const double t_abs = static_cast<double>(j.departure) + t_rel;
  for (std::size_t k = 0; k < j.links.size(); ++k) {
    const RoadLink& link = net.link(j.links[k]);
    if (t_abs < j.entry_s[k]) {
      // Paused at the node before this link.
      st.position = net.node_coord(link.from);
      st.speed_mph = 0.0;
      st.heading_deg = bearing_deg(link.geometry[0], link.geometry[1]);
      return st;
    }
    if (t_abs <= j.exit_s[k]) {
      const double speed = cfg.speed_mph(link.road_type, j.vehicle);
      const double offset = (t_abs - j.entry_s[k]) * mph_to_mps(speed);
      st.position = point_along_polyline(link.geometry, offset);
      st.speed_mph = speed;
      // Heading of the segment under the vehicle.
      double cum = 0.0;
      std::size_t seg = 0;
      for (; seg + 2 < link.geometry.size(); ++seg) {
        const double len = haversine_m(link.geometry[seg], link.geometry[seg + 1]);
        if (cum + len >= offset) break;
        cum += len;
      }
      st.heading_deg = bearing_deg(link.geometry[seg], link.geometry[seg + 1]);
      return st;
    }
  }
  const RoadLink& last = net.link(j.links.back());
  st.position = net.node_coord(last.to);
  st.speed_mph = 0.0;
  st.heading_deg = bearing_deg(last.geometry[last.geometry.size() - 2], last.geometry.back());
  return st;
}

}  // namespace

std::string grid_network_geojson(const SynthConfig& cfg) {
  if (cfg.grid_w < 2 || cfg.grid_h < 2)
    throw Error(Errc::kInvalidArg, "grid needs at least 2x2 nodes");

  const LocalFrame frame(cfg.base);
  auto node_coord = [&](int r, int c) {
    return frame.to_latlon({c * cfg.spacing_m, r * cfg.spacing_m});
  };
  auto type_for = [&](int r0, int c0, int r1, int c1) {
    const bool boundary = (r0 == r1 && (r0 == 0 || r0 == cfg.grid_h - 1)) ||
                          (c0 == c1 && (c0 == 0 || c0 == cfg.grid_w - 1));
    if (boundary) return RoadType::kARoad;
    const bool arterial = (r0 == r1 && r0 == cfg.grid_h / 2) || (c0 == c1 && c0 == cfg.grid_w / 2);
    return arterial ? RoadType::kBRoad : RoadType::kLocalStreet;
  };

  std::string features;
  char buf[256];
  auto add_way = [&](int r0, int c0, int r1, int c1, const std::string& way_id) {
    const LatLon a = node_coord(r0, c0);
    const LatLon b = node_coord(r1, c1);
    const RoadType t = type_for(r0, c0, r1, c1);
    if (!features.empty()) features += ",\n";
    std::snprintf(buf, sizeof(buf),
                  "{\"type\":\"Feature\",\"geometry\":{\"type\":\"LineString\",\"coordinates\":"
                  "[[%.7f,%.7f],[%.7f,%.7f]]},\"properties\":{\"road_type\":\"%s\","
                  "\"oneway\":false,\"way_id\":\"%s\"}}",
                  a.lon, a.lat, b.lon, b.lat, std::string(road_type_name(t)).c_str(),
                  way_id.c_str());
    features += buf;
  };

  for (int r = 0; r < cfg.grid_h; ++r)
    for (int c = 0; c + 1 < cfg.grid_w; ++c)
      add_way(r, c, r, c + 1, "h" + std::to_string(r) + "_" + std::to_string(c));
  for (int r = 0; r + 1 < cfg.grid_h; ++r)
    for (int c = 0; c < cfg.grid_w; ++c)
      add_way(r, c, r + 1, c, "v" + std::to_string(r) + "_" + std::to_string(c));

  return "{\"type\":\"FeatureCollection\",\"features\":[\n" + features + "\n]}\n";
}

SynthWorld generate_world(const SynthConfig& cfg) {
  SynthWorld world;
  world.network_geojson = grid_network_geojson(cfg);
  const RoadNetwork net = RoadNetwork::build_from_geojson(world.network_geojson);
  const SpeedModel model;  // only the override table matters below

  MetricIISpeeds tables[kVehicleClassCount];
  for (std::size_t v = 0; v < kVehicleClassCount; ++v) {
    for (std::size_t t = 0; t < kRoadTypeCount; ++t)
      tables[v].mph[t] = cfg.speed_mph(static_cast<RoadType>(t), static_cast<VehicleClass>(v));
    tables[v].junction_delay_s = cfg.junction_pause_s;
  }

  struct CsvRow {
    std::int64_t ts;
    std::string line;
  };
  std::vector<CsvRow> rows;

  for (int i = 0; i < cfg.journeys; ++i) {
    std::mt19937_64 rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const VehicleClass vehicle = (i % 2 == 0) ? VehicleClass::kAeu : VehicleClass::kFru;

    TruthJourney j;
    j.vehicle = vehicle;
    j.departure = cfg.start_epoch + static_cast<std::int64_t>(i) * cfg.journey_spacing_s;

    // Draw an origin/destination pair far enough apart to give a real route.
    const NodeId max_node = static_cast<NodeId>(net.node_count() - 1);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const NodeId a =
          std::min(max_node, static_cast<NodeId>(u01(rng) * static_cast<double>(net.node_count())));
      const NodeId b =
          std::min(max_node, static_cast<NodeId>(u01(rng) * static_cast<double>(net.node_count())));
      if (a == b) continue;
      RouteRequest req;
      req.origin = net.node_coord(a);
      req.destination = net.node_coord(b);
      req.vehicle = vehicle;
      req.departure = j.departure;
      req.metric = Metric::kII;
      req.metric_ii_table = &tables[static_cast<std::size_t>(vehicle)];
      try {
        const RoutePrediction route = shortest_route(net, model, req);
        if (route.links.size() < 2) continue;
        j.links = route.links;
        break;
      } catch (const Error&) {
        continue;
      }
    }
    if (j.links.empty()) throw Error(Errc::kInternal, "could not draw a journey on the grid");

    double t = static_cast<double>(j.departure);
    for (std::size_t k = 0; k < j.links.size(); ++k) {
      const RoadLink& link = net.link(j.links[k]);
      if (k > 0) t += cfg.junction_pause_s;
      const double traversal =
          link.length_m / mph_to_mps(cfg.speed_mph(link.road_type, vehicle));
      j.entry_s.push_back(t);
      j.exit_s.push_back(t + traversal);
      t += traversal;
    }
    j.duration_s = t - static_cast<double>(j.departure);

    char idbuf[64];
    std::snprintf(idbuf, sizeof(idbuf), "C%05d", i);
    const std::string callsign = idbuf;
    std::snprintf(idbuf, sizeof(idbuf), "I%05d", i);
    const std::string incident = idbuf;
    j.journey_id =
        callsign + "|" + incident + "|" + std::string(vehicle_class_name(vehicle)) + "#0";

    // Telemetry: one fix per interval plus a closing fix at arrival.
    std::vector<double> fix_times;
    for (double t_rel = 0.0; t_rel < j.duration_s; t_rel += cfg.interval_s)
      fix_times.push_back(t_rel);
    const double t_fin = std::floor(j.duration_s);
    if (!fix_times.empty() && t_fin > fix_times.back()) fix_times.push_back(t_fin);

    for (const double t_rel : fix_times) {
      const DriveState st = state_at(net, cfg, j, t_rel);
      LatLon pos = st.position;
      if (cfg.noise_m > 0.0) {
        const LocalFrame frame(pos);
        pos = frame.to_latlon({normal(rng, cfg.noise_m), normal(rng, cfg.noise_m)});
      }
      const std::int64_t ts = j.departure + static_cast<std::int64_t>(std::llround(t_rel));
      const int speed = std::max(0, round_to_step(st.speed_mph, 5));
      const int heading = ((round_to_step(st.heading_deg, 15) % 360) + 360) % 360;
      char line[256];
      std::snprintf(line, sizeof(line), "%s,%s,%s,%s,%.7f,%.7f,%d,%d",
                    format_rfc3339(ts).c_str(), callsign.c_str(), incident.c_str(),
                    std::string(vehicle_class_name(vehicle)).c_str(), pos.lat, pos.lon, speed,
                    heading);
      rows.push_back({ts, line});
    }
    world.truth.push_back(std::move(j));
  }

  std::stable_sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
    if (a.ts != b.ts) return a.ts < b.ts;
    return a.line < b.line;
  });
  world.avls_csv = "timestamp_utc,callsign,incident_id,vehicle,lat,lon,speed_mph,heading_deg\n";
  for (const auto& row : rows) {
    world.avls_csv += row.line;
    world.avls_csv += '\n';
  }
  return world;
}

void generate_world_files(const SynthConfig& cfg, const std::string& network_path,
                          const std::string& truth_path, const std::string& avls_path) {
  const SynthWorld world = generate_world(cfg);
  write_file_atomic(network_path, world.network_geojson);
  write_file_atomic(truth_path, truth_to_csv(world.truth));
  write_file_atomic(avls_path, world.avls_csv);
}

std::string truth_to_csv(std::span<const TruthJourney> truth) {
  std::string out = "journey_id,vehicle,departure_utc,links,entry_ts,exit_ts,duration_s\n";
  for (const auto& j : truth) {
    out += j.journey_id;
    out += ',';
    out += vehicle_class_name(j.vehicle);
    out += ',';
    out += format_rfc3339(j.departure);
    out += ',';
    for (std::size_t k = 0; k < j.links.size(); ++k) {
      if (k) out += '|';
      out += std::to_string(j.links[k]);
    }
    out += ',';
    for (std::size_t k = 0; k < j.entry_s.size(); ++k) {
      if (k) out += '|';
      out += format_double(j.entry_s[k], 3);
    }
    out += ',';
    for (std::size_t k = 0; k < j.exit_s.size(); ++k) {
      if (k) out += '|';
      out += format_double(j.exit_s[k], 3);
    }
    out += ',';
    out += format_double(j.duration_s, 3);
    out += '\n';
  }
  return out;
}

std::vector<TruthJourney> parse_truth_csv(const std::string& text) {
  std::vector<TruthJourney> out;
  std::size_t pos = 0;
  std::size_t row_no = 0;
  bool header = true;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? std::string_view(text).substr(pos)
                                     : std::string_view(text).substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++row_no;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 7)
      throw Error(Errc::kParse, "truth row " + std::to_string(row_no) + ": expected 7 fields");
    TruthJourney j;
    j.journey_id = std::string(f[0]);
    const auto vc = vehicle_class_from_name(f[1]);
    if (!vc) throw Error(Errc::kParse, "truth row " + std::to_string(row_no) + ": bad vehicle");
    j.vehicle = *vc;
    const auto ts = parse_rfc3339(f[2]);
    if (!ts) throw Error(Errc::kParse, "truth row " + std::to_string(row_no) + ": bad timestamp");
    j.departure = *ts;
    auto parse_list = [&](std::string_view s, auto push) {
      for (const auto part : split_fields(s, '|')) {
        if (part.empty()) continue;
        push(part);
      }
    };
    parse_list(f[3], [&](std::string_view s) {
      LinkId id = 0;
      std::from_chars(s.data(), s.data() + s.size(), id);
      j.links.push_back(id);
    });
    parse_list(f[4], [&](std::string_view s) { j.entry_s.push_back(std::stod(std::string(s))); });
    parse_list(f[5], [&](std::string_view s) { j.exit_s.push_back(std::stod(std::string(s))); });
    j.duration_s = std::stod(std::string(f[6]));
    out.push_back(std::move(j));
  }
  return out;
}

TruthScore score_against_truth(const RoadNetwork& net, std::span<const TruthJourney> truth,
                               std::span<const PredictedPath> predictions) {
  TruthScore score;
  std::map<std::string, const PredictedPath*> by_id;
  for (const auto& p : predictions) by_id[p.journey_id] = &p;

  double coin_sum = 0.0;
  double err_sum = 0.0;
  for (const auto& j : truth) {
    const auto it = by_id.find(j.journey_id);
    if (it == by_id.end()) {
      score.unmatched.push_back(j.journey_id);
      continue;
    }
    TruthScoreRow row;
    row.journey_id = j.journey_id;
    row.coincidence = path_coincidence(net, j.links, it->second->links).whole;
    row.duration_error_s = it->second->duration_s - j.duration_s;
    coin_sum += row.coincidence;
    err_sum += std::abs(row.duration_error_s);
    score.rows.push_back(std::move(row));
    by_id.erase(it);
  }
  for (const auto& [id, p] : by_id) score.unmatched.push_back(id);
  std::sort(score.unmatched.begin(), score.unmatched.end());
  if (!score.rows.empty()) {
    score.mean_coincidence = coin_sum / static_cast<double>(score.rows.size());
    score.mean_abs_duration_error_s = err_sum / static_cast<double>(score.rows.size());
  }
  return score;
}

}  // namespace blrn
