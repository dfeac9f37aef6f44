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

#include "blrn/roadnetwork.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "blrn/errors.hpp"
#include "blrn/io.hpp"

namespace blrn {

namespace {

constexpr std::string_view kRoadTypeNames[kRoadTypeCount] = {
    "Motorway",       "ARoad", "BRoad", "MinorRoad",           "LocalStreet",
    "PrivatePublic", "PrivateRestricted", "Alley", "PedestrianisedStreet"};

// Node identity is the coordinate rounded to 1e-7 degrees (~1 cm).
std::pair<std::int64_t, std::int64_t> coord_key(const LatLon& p) {
  return {static_cast<std::int64_t>(std::llround(p.lat * 1e7)),
          static_cast<std::int64_t>(std::llround(p.lon * 1e7))};
}

}  // namespace

std::string_view road_type_name(RoadType t) { return kRoadTypeNames[static_cast<std::size_t>(t)]; }

std::optional<RoadType> road_type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRoadTypeCount; ++i)
    if (kRoadTypeNames[i] == name) return static_cast<RoadType>(i);
  return std::nullopt;
}

RoadNetwork RoadNetwork::build_from_geojson_file(const std::string& path) {
  return build_from_geojson(read_file(path));
}

RoadNetwork RoadNetwork::build_from_geojson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, std::string("network file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
    throw Error(Errc::kParse, "network file is not a FeatureCollection");

  RoadNetwork net;
  std::map<std::pair<std::int64_t, std::int64_t>, NodeId> node_by_coord;
  std::map<std::pair<std::int64_t, std::int64_t>, std::string> registry;  // declared nodes
  bool have_registry = false;

  const auto& features = doc["features"];
  if (!features.is_array()) throw Error(Errc::kParse, "features is not an array");

  // First pass: optional node registry from Point features.
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const auto& f = features[fi];
    const auto& geom = f.value("geometry", nlohmann::json::object());
    if (geom.value("type", "") != "Point") continue;
    have_registry = true;
    const auto& c = geom["coordinates"];
    if (!c.is_array() || c.size() < 2)
      throw Error(Errc::kParse, "feature " + std::to_string(fi) + ": malformed Point coordinates");
    const LatLon p{c[1].get<double>(), c[0].get<double>()};
    std::string node_id = f.value("properties", nlohmann::json::object()).value("node_id", "");
    registry[coord_key(p)] = node_id.empty() ? ("point-feature-" + std::to_string(fi)) : node_id;
  }

  auto resolve_node = [&](const LatLon& p, const std::string& way_id) -> NodeId {
    const auto key = coord_key(p);
    if (have_registry && registry.find(key) == registry.end())
      throw Error(Errc::kBuild, "way " + way_id + ": endpoint (" + std::to_string(p.lat) + "," +
                                    std::to_string(p.lon) + ") references no declared node");
    auto it = node_by_coord.find(key);
    if (it != node_by_coord.end()) return it->second;
    const NodeId id = static_cast<NodeId>(net.node_coords_.size());
    net.node_coords_.push_back(p);
    node_by_coord.emplace(key, id);
    return id;
  };

  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const auto& f = features[fi];
    const auto& geom = f.value("geometry", nlohmann::json::object());
    const std::string gtype = geom.value("type", "");
    if (gtype == "Point") continue;
    if (gtype != "LineString")
      throw Error(Errc::kParse,
                  "feature " + std::to_string(fi) + ": unsupported geometry type '" + gtype + "'");

    const auto props = f.value("properties", nlohmann::json::object());
    const std::string way_id = props.value("way_id", "feature-" + std::to_string(fi));
    const std::string rt_name = props.value("road_type", "");
    const auto rt = road_type_from_name(rt_name);
    if (!rt)
      throw Error(Errc::kParse, "way " + way_id + ": unknown road_type '" + rt_name + "'");
    const bool oneway = props.value("oneway", false);
    const bool contraflow = props.value("bluelight_contraflow", false);
    const bool bus_lane = props.value("bus_lane", false);
    const bool pedestrian = props.value("pedestrian", false);

    const auto& coords = geom.value("coordinates", nlohmann::json::array());
    if (!coords.is_array() || coords.size() < 2)
      throw Error(Errc::kParse, "way " + way_id + ": LineString needs at least 2 coordinates");
    std::vector<LatLon> poly;
    poly.reserve(coords.size());
    for (const auto& c : coords) {
      if (!c.is_array() || c.size() < 2)
        throw Error(Errc::kParse, "way " + way_id + ": malformed coordinate");
      poly.push_back({c[1].get<double>(), c[0].get<double>()});  // GeoJSON is [lon, lat]
    }
    const double length = polyline_length_m(poly);
    if (!(length > 0.0))
      throw Error(Errc::kBuild, "way " + way_id + ": zero or negative length");

    const NodeId a = resolve_node(poly.front(), way_id);
    const NodeId b = resolve_node(poly.back(), way_id);

    const bool forbidden_base = bus_lane || pedestrian;

    RoadLink fwd;
    fwd.id = static_cast<LinkId>(net.links_.size());
    fwd.from = a;
    fwd.to = b;
    fwd.length_m = length;
    fwd.road_type = *rt;
    fwd.civilian_forbidden = forbidden_base;
    fwd.way_id = way_id;
    fwd.geometry = poly;
    net.links_.push_back(std::move(fwd));

    const bool make_reverse = !oneway || contraflow;
    if (make_reverse) {
      RoadLink rev;
      rev.id = static_cast<LinkId>(net.links_.size());
      rev.from = b;
      rev.to = a;
      rev.length_m = length;
      rev.road_type = *rt;
      // Travelling against a one-way is legal only under blue lights.
      rev.civilian_forbidden = oneway ? true : forbidden_base;
      rev.way_id = way_id;
      rev.geometry.assign(poly.rbegin(), poly.rend());
      net.links_.push_back(std::move(rev));
      const LinkId f_id = static_cast<LinkId>(net.links_.size() - 2);
      const LinkId r_id = f_id + 1;
      net.reverse_.resize(net.links_.size(), kInvalidLink);
      net.reverse_[f_id] = r_id;
      net.reverse_[r_id] = f_id;
    } else {
      net.reverse_.resize(net.links_.size(), kInvalidLink);
    }
  }

  net.finalize();
  return net;
}

RoadNetwork RoadNetwork::from_dump_csv(const std::string& text) {
  RoadNetwork net;
  net.has_geometry_ = false;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::kParse, "empty network dump");
  std::size_t row = 1;
  NodeId max_node = 0;
  bool any = false;
  // Pair reverse links back up by (way_id, endpoints).
  std::map<std::pair<std::string, std::pair<NodeId, NodeId>>, LinkId> by_way_dir;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 7)
      throw Error(Errc::kParse, "dump row " + std::to_string(row) + ": expected 7 fields");
    RoadLink l;
    try {
      l.id = static_cast<LinkId>(std::stoul(std::string(fields[0])));
      l.from = static_cast<NodeId>(std::stoul(std::string(fields[1])));
      l.to = static_cast<NodeId>(std::stoul(std::string(fields[2])));
      l.length_m = std::stod(std::string(fields[3]));
    } catch (const std::exception&) {
      throw Error(Errc::kParse, "dump row " + std::to_string(row) + ": malformed number");
    }
    if (l.id != net.links_.size())
      throw Error(Errc::kParse, "dump row " + std::to_string(row) + ": non-dense link_id");
    const auto rt = road_type_from_name(fields[4]);
    if (!rt) throw Error(Errc::kParse, "dump row " + std::to_string(row) + ": bad road_type");
    l.road_type = *rt;
    l.civilian_forbidden = fields[5] == "1";
    l.way_id = std::string(fields[6]);
    max_node = std::max({max_node, l.from, l.to});
    any = true;
    by_way_dir[{l.way_id, {l.from, l.to}}] = l.id;
    net.links_.push_back(std::move(l));
  }
  net.node_coords_.resize(any ? max_node + 1 : 0);
  net.reverse_.assign(net.links_.size(), kInvalidLink);
  for (const auto& l : net.links_) {
    auto it = by_way_dir.find({l.way_id, {l.to, l.from}});
    if (it != by_way_dir.end() && it->second != l.id) net.reverse_[l.id] = it->second;
  }
  net.finalize();
  return net;
}

std::optional<LinkId> RoadNetwork::reverse_of(LinkId l) const {
  if (reverse_[l] == kInvalidLink) return std::nullopt;
  return reverse_[l];
}

int RoadNetwork::GridIndex::col(double lon) const {
  return static_cast<int>(std::floor((lon - lon0) / cell_lon));
}
int RoadNetwork::GridIndex::row(double lat) const {
  return static_cast<int>(std::floor((lat - lat0) / cell_lat));
}

void RoadNetwork::finalize() {
  out_.assign(node_coords_.size(), {});
  in_.assign(node_coords_.size(), {});
  for (const auto& l : links_) {
    out_[l.from].push_back(l.id);
    in_[l.to].push_back(l.id);
  }
  for (auto& v : out_) std::sort(v.begin(), v.end());
  for (auto& v : in_) std::sort(v.begin(), v.end());

  if (!has_geometry_ || links_.empty()) return;

  double lat_min = 1e9, lat_max = -1e9, lon_min = 1e9, lon_max = -1e9;
  for (const auto& l : links_) {
    for (const auto& p : l.geometry) {
      lat_min = std::min(lat_min, p.lat);
      lat_max = std::max(lat_max, p.lat);
      lon_min = std::min(lon_min, p.lon);
      lon_max = std::max(lon_max, p.lon);
    }
  }
  const double mid_lat = 0.5 * (lat_min + lat_max);
  const double m_per_deg_lat = kDegToRad * kEarthRadiusM;
  const double m_per_deg_lon =
      kDegToRad * kEarthRadiusM * std::max(0.05, std::cos(mid_lat * kDegToRad));
  // Target roughly 250 m cells, capped so the dense grid stays small.
  double cell_lat = 250.0 / m_per_deg_lat;
  double cell_lon = 250.0 / m_per_deg_lon;
  auto dims = [&] {
    const int nx = std::max(1, static_cast<int>(std::ceil((lon_max - lon_min) / cell_lon)) + 1);
    const int ny = std::max(1, static_cast<int>(std::ceil((lat_max - lat_min) / cell_lat)) + 1);
    return std::pair<int, int>{nx, ny};
  };
  auto [nx, ny] = dims();
  while (static_cast<long long>(nx) * ny > (1 << 22)) {
    cell_lat *= 2.0;
    cell_lon *= 2.0;
    std::tie(nx, ny) = dims();
  }
  grid_.lat0 = lat_min;
  grid_.lon0 = lon_min;
  grid_.cell_lat = cell_lat;
  grid_.cell_lon = cell_lon;
  grid_.nx = nx;
  grid_.ny = ny;
  grid_.cells.assign(static_cast<std::size_t>(nx) * ny, {});
  for (const auto& l : links_) {
    double a = 1e9, b = -1e9, c = 1e9, d = -1e9;
    for (const auto& p : l.geometry) {
      a = std::min(a, p.lat);
      b = std::max(b, p.lat);
      c = std::min(c, p.lon);
      d = std::max(d, p.lon);
    }
    const int r0 = std::clamp(grid_.row(a), 0, ny - 1);
    const int r1 = std::clamp(grid_.row(b), 0, ny - 1);
    const int c0 = std::clamp(grid_.col(c), 0, nx - 1);
    const int c1 = std::clamp(grid_.col(d), 0, nx - 1);
    for (int r = r0; r <= r1; ++r)
      for (int cc = c0; cc <= c1; ++cc)
        grid_.cells[static_cast<std::size_t>(r) * nx + cc].push_back(l.id);
  }
}

std::vector<LinkId> RoadNetwork::links_in_box(const LatLon& center, double half_side_m) const {
  if (!has_geometry_) throw Error(Errc::kInvalidArg, "network has no geometry");
  std::vector<LinkId> out;
  if (links_.empty() || half_side_m <= 0.0) return out;

  const LocalFrame frame(center);
  const double dlat = half_side_m / frame.meters_per_deg_lat();
  const double dlon = half_side_m / frame.meters_per_deg_lon();

  const int r0 = std::clamp(grid_.row(center.lat - dlat), 0, grid_.ny - 1);
  const int r1 = std::clamp(grid_.row(center.lat + dlat), 0, grid_.ny - 1);
  const int c0 = std::clamp(grid_.col(center.lon - dlon), 0, grid_.nx - 1);
  const int c1 = std::clamp(grid_.col(center.lon + dlon), 0, grid_.nx - 1);

  std::vector<LinkId> cand;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      const auto& cell = grid_.cells[static_cast<std::size_t>(r) * grid_.nx + c];
      cand.insert(cand.end(), cell.begin(), cell.end());
    }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  for (const LinkId id : cand) {
    const auto& g = links_[id].geometry;
    bool hit = false;
    for (std::size_t i = 0; i + 1 < g.size() && !hit; ++i)
      hit = segment_intersects_rect(frame.to_xy(g[i]), frame.to_xy(g[i + 1]), half_side_m,
                                    half_side_m);
    if (hit) out.push_back(id);
  }
  return out;
}

std::optional<RoadNetwork::NearestHit> RoadNetwork::nearest_link(const LatLon& p) const {
  if (!has_geometry_) throw Error(Errc::kInvalidArg, "network has no geometry");
  if (links_.empty()) return std::nullopt;

  constexpr double kTieEps = 1e-6;  // metres; ties resolved by smaller LinkId
  const LocalFrame frame(p);

  // Distance from p to a grid cell rectangle, zero when inside.
  auto cell_lb = [&](int r, int c) {
    const double lat_a = grid_.lat0 + r * grid_.cell_lat;
    const double lat_b = lat_a + grid_.cell_lat;
    const double lon_a = grid_.lon0 + c * grid_.cell_lon;
    const double lon_b = lon_a + grid_.cell_lon;
    const XY lo = frame.to_xy({lat_a, lon_a});
    const XY hi = frame.to_xy({lat_b, lon_b});
    const double dx = std::max({lo.x - 0.0, 0.0 - hi.x, 0.0});
    const double dy = std::max({lo.y - 0.0, 0.0 - hi.y, 0.0});
    return std::hypot(dx, dy);
  };

  const int pr = std::clamp(grid_.row(p.lat), 0, grid_.ny - 1);
  const int pc = std::clamp(grid_.col(p.lon), 0, grid_.nx - 1);

  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, LinkId>> near;  // everything within best + eps
  std::unordered_set<LinkId> seen;

  const int max_ring = grid_.nx + grid_.ny + 2;
  for (int k = 0; k <= max_ring; ++k) {
    double ring_lb = std::numeric_limits<double>::infinity();
    bool ring_has_cells = false;
    auto visit_cell = [&](int r, int c) {
      if (r < 0 || r >= grid_.ny || c < 0 || c >= grid_.nx) return;
      ring_has_cells = true;
      const double lb = cell_lb(r, c);
      ring_lb = std::min(ring_lb, lb);
      if (lb > best_dist + kTieEps) return;
      for (const LinkId id : grid_.cells[static_cast<std::size_t>(r) * grid_.nx + c]) {
        if (!seen.insert(id).second) continue;
        const PolylineHit hit = project_to_polyline(links_[id].geometry, p);
        if (hit.distance_m < best_dist) best_dist = hit.distance_m;
        near.emplace_back(hit.distance_m, id);
      }
    };
    if (k == 0) {
      visit_cell(pr, pc);
    } else {
      for (int c = pc - k; c <= pc + k; ++c) {
        visit_cell(pr - k, c);
        visit_cell(pr + k, c);
      }
      for (int r = pr - k + 1; r <= pr + k - 1; ++r) {
        visit_cell(r, pc - k);
        visit_cell(r, pc + k);
      }
    }
    if (!ring_has_cells && k > 0) break;  // walked off the grid on every side
    if (std::isfinite(best_dist) && ring_lb > best_dist + kTieEps && k > 0) break;
  }

  LinkId best_id = kInvalidLink;
  for (const auto& [d, id] : near)
    if (d <= best_dist + kTieEps && id < best_id) best_id = id;
  if (best_id == kInvalidLink) return std::nullopt;

  const PolylineHit hit = project_to_polyline(links_[best_id].geometry, p);
  return NearestHit{best_id, hit.distance_m, hit.offset_m, hit.point};
}

std::string RoadNetwork::dump_csv() const {
  std::string out = "link_id,from,to,length_m,road_type,civilian_forbidden,way_id\n";
  for (const auto& l : links_) {
    out += std::to_string(l.id);
    out += ',';
    out += std::to_string(l.from);
    out += ',';
    out += std::to_string(l.to);
    out += ',';
    out += format_double(l.length_m, 3);
    out += ',';
    out += road_type_name(l.road_type);
    out += ',';
    out += l.civilian_forbidden ? '1' : '0';
    out += ',';
    out += l.way_id;
    out += '\n';
  }
  return out;
}

}  // namespace blrn
