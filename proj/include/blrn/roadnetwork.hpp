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

#ifndef BLRN_ROADNETWORK_HPP_
#define BLRN_ROADNETWORK_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blrn/geo.hpp"

namespace blrn {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;
inline constexpr LinkId kInvalidLink = std::numeric_limits<LinkId>::max();

enum class RoadType : std::uint8_t {
  kMotorway = 0,
  kARoad,
  kBRoad,
  kMinorRoad,
  kLocalStreet,
  kPrivatePublic,
  kPrivateRestricted,
  kAlley,
  kPedestrianisedStreet,
};
inline constexpr std::size_t kRoadTypeCount = 9;

std::string_view road_type_name(RoadType t);
std::optional<RoadType> road_type_from_name(std::string_view name);

/// One directed road link. Bi-directional source roads contribute two links
/// with swapped endpoints and reversed geometry; manoeuvres legal only under
/// blue-light exemption (contraflow past a keep-left bollard, bus lanes,
/// pedestrian precincts) are ordinary links with civilian_forbidden set.
struct RoadLink {
  LinkId id = 0;
  NodeId from = 0;
  NodeId to = 0;
  double length_m = 0.0;
  RoadType road_type = RoadType::kLocalStreet;
  bool civilian_forbidden = false;
  std::string way_id;
  std::vector<LatLon> geometry;  // empty on topology-only networks
};

/// Directed road graph with blue-light traversal exemptions baked in at build
/// time. Immutable after build; safe for unrestricted concurrent reads.
class RoadNetwork {
 public:
  /// Builds from a GeoJSON-style feature collection. LineString features
  /// carry properties road_type, oneway, bluelight_contraflow, bus_lane,
  /// pedestrian and way_id; optional Point features with a node_id property
  /// declare a node registry that every endpoint must then hit.
  static RoadNetwork build_from_geojson_file(const std::string& path);
  static RoadNetwork build_from_geojson(const std::string& text);

  /// Rebuilds graph topology and per-link attributes from a dump_csv file.
  /// Geometry is not part of the dump, so spatial queries are unavailable on
  /// the result.
  static RoadNetwork from_dump_csv(const std::string& text);

  std::size_t node_count() const { return node_coords_.size(); }
  std::size_t link_count() const { return links_.size(); }
  const LatLon& node_coord(NodeId n) const { return node_coords_[n]; }
  const RoadLink& link(LinkId l) const { return links_[l]; }
  std::span<const LinkId> out_links(NodeId n) const { return out_[n]; }
  std::span<const LinkId> in_links(NodeId n) const { return in_[n]; }

  /// The opposite-direction twin from the same source way, if one exists.
  std::optional<LinkId> reverse_of(LinkId l) const;

  bool has_geometry() const { return has_geometry_; }

  /// Links whose geometry intersects the axis-aligned metric square of side
  /// 2*half_side_m centred at center. Sorted ascending, no false negatives.
  std::vector<LinkId> links_in_box(const LatLon& center, double half_side_m) const;

  struct NearestHit {
    LinkId link = kInvalidLink;
    double distance_m = 0.0;
    double offset_m = 0.0;
    LatLon point;
  };

  /// Link minimising perpendicular distance from p; ties go to the smaller
  /// LinkId. Empty networks yield no hit.
  std::optional<NearestHit> nearest_link(const LatLon& p) const;

  /// Deterministic CSV: link_id,from,to,length_m,road_type,civilian_forbidden,way_id.
  std::string dump_csv() const;

 private:
  RoadNetwork() = default;
  void finalize();  // adjacency + spatial index

  struct GridIndex {
    double lat0 = 0.0, lon0 = 0.0;       // bbox minimum corner
    double cell_lat = 0.0, cell_lon = 0.0;  // cell size in degrees
    int nx = 0, ny = 0;
    std::vector<std::vector<LinkId>> cells;  // ny * nx, row-major by lat
    int col(double lon) const;
    int row(double lat) const;
  };

  std::vector<LatLon> node_coords_;
  std::vector<RoadLink> links_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
  std::vector<LinkId> reverse_;  // kInvalidLink when absent
  GridIndex grid_;
  bool has_geometry_ = true;
};

}  // namespace blrn

#endif  // BLRN_ROADNETWORK_HPP_
