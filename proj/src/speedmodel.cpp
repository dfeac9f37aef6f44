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

#include "blrn/speedmodel.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>

#include "blrn/errors.hpp"
#include "blrn/io.hpp"

namespace blrn {

MetricIISpeeds las_metric_ii() {
  MetricIISpeeds t;
  t.mph[static_cast<std::size_t>(RoadType::kMotorway)] = 35.0;
  t.mph[static_cast<std::size_t>(RoadType::kARoad)] = 29.0;
  t.mph[static_cast<std::size_t>(RoadType::kBRoad)] = 24.0;
  t.mph[static_cast<std::size_t>(RoadType::kMinorRoad)] = 19.0;
  t.mph[static_cast<std::size_t>(RoadType::kLocalStreet)] = 14.0;
  t.mph[static_cast<std::size_t>(RoadType::kPrivatePublic)] = 5.0;
  t.mph[static_cast<std::size_t>(RoadType::kPrivateRestricted)] = 5.0;
  t.mph[static_cast<std::size_t>(RoadType::kAlley)] = 3.0;
  t.mph[static_cast<std::size_t>(RoadType::kPedestrianisedStreet)] = 2.0;
  t.junction_delay_s = 2.5;
  return t;
}

MetricIISpeeds nelder_mead_metric_ii() {
  MetricIISpeeds t;
  t.mph[static_cast<std::size_t>(RoadType::kMotorway)] = 35.47;
  t.mph[static_cast<std::size_t>(RoadType::kARoad)] = 29.39;
  t.mph[static_cast<std::size_t>(RoadType::kBRoad)] = 26.83;
  t.mph[static_cast<std::size_t>(RoadType::kMinorRoad)] = 18.97;
  t.mph[static_cast<std::size_t>(RoadType::kLocalStreet)] = 15.51;
  t.mph[static_cast<std::size_t>(RoadType::kPrivatePublic)] = 8.37;
  t.mph[static_cast<std::size_t>(RoadType::kPrivateRestricted)] = 6.84;
  t.mph[static_cast<std::size_t>(RoadType::kAlley)] = 5.31;
  t.mph[static_cast<std::size_t>(RoadType::kPedestrianisedStreet)] = 5.37;
  t.junction_delay_s = 4.33;
  return t;
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kI: return "I";
    case Metric::kII: return "II";
    case Metric::kIII: return "III";
    case Metric::kIV: return "IV";
    case Metric::kV: return "V";
    case Metric::kHybrid: return "HYBRID";
  }
  return "?";
}

std::optional<Metric> metric_from_name(std::string_view name) {
  if (name == "I") return Metric::kI;
  if (name == "II") return Metric::kII;
  if (name == "III") return Metric::kIII;
  if (name == "IV") return Metric::kIV;
  if (name == "V") return Metric::kV;
  if (name == "HYBRID" || name == "hybrid") return Metric::kHybrid;
  return std::nullopt;
}

void train_metric_iii_iv(const RoadNetwork& net, std::span<const SnappedObservation> obs,
                         double box_half_side_m, SpeedModel& model) {
  if (!net.has_geometry()) throw Error(Errc::kInvalidArg, "training needs link geometry");
  if (box_half_side_m <= 0.0) throw Error(Errc::kInvalidArg, "box half side must be positive");

  struct Usable {
    const SnappedObservation* o;
    RoadType type;
    int hod;
    int how;
  };
  std::vector<Usable> usable;
  usable.reserve(obs.size());
  double lat_min = 1e9, lat_max = -1e9, lon_min = 1e9, lon_max = -1e9;
  for (const auto& o : obs) {
    if (!(o.speed_mph > 0.0)) {
      ++model.stats.zero_speed_skipped;
      continue;
    }
    usable.push_back({&o, net.link(o.link).road_type, hour_of_day(o.timestamp, model.timezone),
                      hour_of_week(o.timestamp, model.timezone)});
    lat_min = std::min(lat_min, o.position.lat);
    lat_max = std::max(lat_max, o.position.lat);
    lon_min = std::min(lon_min, o.position.lon);
    lon_max = std::max(lon_max, o.position.lon);
    model.stats.window_from = model.stats.window_from == 0
                                  ? o.timestamp
                                  : std::min(model.stats.window_from, o.timestamp);
    model.stats.window_to = std::max(model.stats.window_to, o.timestamp);
  }
  if (usable.empty()) return;

  // Bucket observations on a grid one box-half-side wide so each link only
  // examines nearby fixes.
  const double mid_lat = 0.5 * (lat_min + lat_max);
  const double cell_lat = box_half_side_m / (kDegToRad * kEarthRadiusM);
  const double cell_lon =
      box_half_side_m / (kDegToRad * kEarthRadiusM * std::max(0.05, std::cos(mid_lat * kDegToRad)));
  auto cell_of = [&](const LatLon& p) {
    return std::pair<std::int64_t, std::int64_t>{
        static_cast<std::int64_t>(std::floor((p.lat - lat_min) / cell_lat)),
        static_cast<std::int64_t>(std::floor((p.lon - lon_min) / cell_lon))};
  };
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::uint32_t>> grid;
  for (std::uint32_t i = 0; i < usable.size(); ++i) grid[cell_of(usable[i].o->position)].push_back(i);

  for (LinkId id = 0; id < net.link_count(); ++id) {
    const RoadLink& link = net.link(id);
    const LatLon mid = point_along_polyline(link.geometry, link.length_m / 2.0);
    const LocalFrame frame(mid);
    const double dlat = box_half_side_m / frame.meters_per_deg_lat();
    const double dlon = box_half_side_m / frame.meters_per_deg_lon();
    const auto [r0, c0] = cell_of({mid.lat - dlat - cell_lat, mid.lon - dlon - cell_lon});
    const auto [r1, c1] = cell_of({mid.lat + dlat + cell_lat, mid.lon + dlon + cell_lon});

    SpeedMatrix* m3 = nullptr;
    SpeedMatrix* m4 = nullptr;
    for (std::int64_t r = r0; r <= r1; ++r) {
      for (std::int64_t c = c0; c <= c1; ++c) {
        const auto it = grid.find({r, c});
        if (it == grid.end()) continue;
        for (const std::uint32_t idx : it->second) {
          const Usable& u = usable[idx];
          if (u.type != link.road_type) continue;
          const XY q = frame.to_xy(u.o->position);
          if (std::abs(q.x) > box_half_side_m || std::abs(q.y) > box_half_side_m) continue;
          if (!m3) {
            m3 = &model.metric_iii.try_emplace(id, SpeedMatrix(24)).first->second;
            m4 = &model.metric_iv.try_emplace(id, SpeedMatrix(168)).first->second;
          }
          m3->cell(u.o->vehicle, u.hod).add(u.o->speed_mph);
          m4->cell(u.o->vehicle, u.how).add(u.o->speed_mph);
          ++model.stats.box_observations;
        }
      }
    }
  }
}

void train_metric_v(std::span<const LinkSpeedObservation> obs, SpeedModel& model) {
  for (const auto& o : obs) {
    if (!(o.speed_mph > 0.0)) {
      ++model.stats.zero_speed_skipped;
      continue;
    }
    auto& matrix = model.metric_v.try_emplace(o.link, SpeedMatrix(168)).first->second;
    matrix.cell(o.vehicle, hour_of_week(o.entry, model.timezone)).add(o.speed_mph);
    ++model.stats.link_observations;
    model.stats.window_from =
        model.stats.window_from == 0 ? o.entry : std::min(model.stats.window_from, o.entry);
    model.stats.window_to = std::max(model.stats.window_to, o.entry);
  }
}

namespace {

const HarmonicAccumulator* find_cell(const std::map<LinkId, SpeedMatrix>& layer, LinkId link,
                                     VehicleClass vehicle, int bin) {
  const auto it = layer.find(link);
  if (it == layer.end()) return nullptr;
  const auto& c = it->second.cell(vehicle, bin);
  return c.empty() ? nullptr : &c;
}

}  // namespace

SpeedLookup link_speed(const RoadNetwork& net, const SpeedModel& model, Metric metric, LinkId link,
                       VehicleClass vehicle, std::int64_t instant,
                       const MetricIISpeeds* override_ii) {
  const MetricIISpeeds& table = override_ii ? *override_ii : model.metric_ii;
  auto road_type_answer = [&](std::string_view tag) {
    return SpeedLookup{table.speed_for(net.link(link).road_type), tag};
  };

  switch (metric) {
    case Metric::kI:
      return {model.metric_i_mph, "I"};
    case Metric::kII:
      return road_type_answer("II");
    case Metric::kIII: {
      const int hod = hour_of_day(instant, model.timezone);
      if (const auto* c = find_cell(model.metric_iii, link, vehicle, hod)) return {c->mean(), "III"};
      return road_type_answer("fallback:II");
    }
    case Metric::kIV: {
      const int how = hour_of_week(instant, model.timezone);
      if (const auto* c = find_cell(model.metric_iv, link, vehicle, how)) return {c->mean(), "IV"};
      const int hod = hour_of_day(instant, model.timezone);
      if (const auto* c = find_cell(model.metric_iii, link, vehicle, hod))
        return {c->mean(), "fallback:III"};
      return road_type_answer("fallback:II");
    }
    case Metric::kV:
    case Metric::kHybrid: {
      const int how = hour_of_week(instant, model.timezone);
      if (const auto* c = find_cell(model.metric_v, link, vehicle, how)) return {c->mean(), "V"};
      if (const auto* c = find_cell(model.metric_iv, link, vehicle, how))
        return {c->mean(), "fallback:IV"};
      const int hod = hour_of_day(instant, model.timezone);
      if (const auto* c = find_cell(model.metric_iii, link, vehicle, hod))
        return {c->mean(), "fallback:III"};
      return road_type_answer("fallback:II");
    }
  }
  throw Error(Errc::kInternal, "unreachable metric");
}

// ---------------------------------------------------------------------------
// Binary container: "BLSM" magic, u32 version, tagged length-prefixed
// sections, CRC32 trailer. Little-endian throughout.

namespace {

constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kTagMeta = 1;
constexpr std::uint32_t kTagLayerIII = 3;
constexpr std::uint32_t kTagLayerIV = 4;
constexpr std::uint32_t kTagLayerV = 5;

static_assert(std::endian::native == std::endian::little, "serializer assumes little-endian host");

template <typename T>
void append_raw(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void append_string(std::string& out, std::string_view s) {
  append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  template <typename T>
  T read() {
    if (pos_ + sizeof(T) > data_.size()) throw Error(Errc::kFormat, "model file: section overrun");
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string read_string() {
    const auto n = read<std::uint32_t>();
    if (pos_ + n > data_.size()) throw Error(Errc::kFormat, "model file: string overrun");
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ >= data_.size(); }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

void append_layer(std::string& out, std::uint32_t tag, const std::map<LinkId, SpeedMatrix>& layer) {
  std::string payload;
  append_raw<std::uint64_t>(payload, layer.size());
  for (const auto& [id, matrix] : layer) {
    append_raw<std::uint32_t>(payload, id);
    append_raw<std::uint32_t>(payload, static_cast<std::uint32_t>(matrix.bins));
    for (const auto& cell : matrix.cells) {
      append_raw<double>(payload, cell.recip_sum);
      append_raw<std::uint64_t>(payload, cell.count);
    }
  }
  append_raw<std::uint32_t>(out, tag);
  append_raw<std::uint64_t>(out, payload.size());
  out.append(payload);
}

void read_layer(Reader& r, std::map<LinkId, SpeedMatrix>& layer) {
  const auto n = r.read<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto id = r.read<std::uint32_t>();
    const auto bins = r.read<std::uint32_t>();
    if (bins != 24 && bins != 168) throw Error(Errc::kFormat, "model file: bad bin count");
    SpeedMatrix m(static_cast<int>(bins));
    for (auto& cell : m.cells) {
      cell.recip_sum = r.read<double>();
      cell.count = r.read<std::uint64_t>();
    }
    layer.emplace(id, std::move(m));
  }
}

}  // namespace

std::string serialize_model(const SpeedModel& model) {
  std::string out = "BLSM";
  append_raw<std::uint32_t>(out, kModelVersion);

  std::string meta;
  append_raw<double>(meta, model.metric_i_mph);
  for (const double v : model.metric_ii.mph) append_raw<double>(meta, v);
  append_raw<double>(meta, model.metric_ii.junction_delay_s);
  append_string(meta, model.timezone.name());
  append_raw<std::uint64_t>(meta, model.stats.box_observations);
  append_raw<std::uint64_t>(meta, model.stats.zero_speed_skipped);
  append_raw<std::uint64_t>(meta, model.stats.link_observations);
  append_raw<std::int64_t>(meta, model.stats.window_from);
  append_raw<std::int64_t>(meta, model.stats.window_to);
  append_raw<std::uint32_t>(out, kTagMeta);
  append_raw<std::uint64_t>(out, meta.size());
  out.append(meta);

  append_layer(out, kTagLayerIII, model.metric_iii);
  append_layer(out, kTagLayerIV, model.metric_iv);
  append_layer(out, kTagLayerV, model.metric_v);

  append_raw<std::uint32_t>(out, crc32_bytes(out));
  return out;
}

SpeedModel deserialize_model(std::string_view data) {
  if (data.size() < 12) throw Error(Errc::kChecksum, "model file truncated");
  if (data.substr(0, 4) != "BLSM") throw Error(Errc::kFormat, "model file: bad magic");
  Reader header(data.substr(4));
  const auto version = header.read<std::uint32_t>();
  if (version != kModelVersion)
    throw Error(Errc::kVersion, "model file version " + std::to_string(version) +
                                    " unsupported; this reader supports version " +
                                    std::to_string(kModelVersion));
  const std::string_view body = data.substr(0, data.size() - 4);
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, data.data() + data.size() - 4, 4);
  if (crc32_bytes(body) != stored_crc) throw Error(Errc::kChecksum, "model file checksum mismatch");

  SpeedModel model;
  model.metric_iii.clear();
  model.metric_iv.clear();
  model.metric_v.clear();
  Reader r(body.substr(8));
  while (!r.done()) {
    const auto tag = r.read<std::uint32_t>();
    const auto len = r.read<std::uint64_t>();
    const std::size_t section_end = r.pos() + len;
    switch (tag) {
      case kTagMeta: {
        model.metric_i_mph = r.read<double>();
        for (double& v : model.metric_ii.mph) v = r.read<double>();
        model.metric_ii.junction_delay_s = r.read<double>();
        const std::string tz_name = r.read_string();
        const auto tz = Timezone::parse(tz_name);
        if (!tz) throw Error(Errc::kFormat, "model file: unknown timezone " + tz_name);
        model.timezone = *tz;
        model.stats.box_observations = r.read<std::uint64_t>();
        model.stats.zero_speed_skipped = r.read<std::uint64_t>();
        model.stats.link_observations = r.read<std::uint64_t>();
        model.stats.window_from = r.read<std::int64_t>();
        model.stats.window_to = r.read<std::int64_t>();
        break;
      }
      case kTagLayerIII:
        read_layer(r, model.metric_iii);
        break;
      case kTagLayerIV:
        read_layer(r, model.metric_iv);
        break;
      case kTagLayerV:
        read_layer(r, model.metric_v);
        break;
      default:
        break;  // unknown sections are skipped
    }
    r.seek(section_end);
  }
  return model;
}

void save_model_file(const SpeedModel& model, const std::string& path) {
  write_file_atomic(path, serialize_model(model));
}

SpeedModel load_model_file(const std::string& path) { return deserialize_model(read_file(path)); }

namespace {

std::string shortest_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void dump_matrix_layer(std::string& out, const std::map<LinkId, SpeedMatrix>& layer) {
  for (const auto& [id, matrix] : layer) {
    for (std::size_t v = 0; v < kVehicleClassCount; ++v) {
      for (int b = 0; b < matrix.bins; ++b) {
        const auto& cell = matrix.cell(static_cast<VehicleClass>(v), b);
        if (cell.empty()) continue;
        out += std::to_string(id);
        out += ',';
        out += vehicle_class_name(static_cast<VehicleClass>(v));
        out += ',';
        out += std::to_string(b);
        out += ',';
        out += shortest_double(cell.mean());
        out += ',';
        out += std::to_string(cell.count);
        out += '\n';
      }
    }
  }
}

}  // namespace

std::string inspect_layer_csv(const SpeedModel& model, std::string_view layer) {
  std::string out;
  if (layer == "i") {
    out = "metric_i_mph\n" + shortest_double(model.metric_i_mph) + "\n";
  } else if (layer == "ii") {
    out = metric_ii_to_csv(model.metric_ii);
  } else if (layer == "iii" || layer == "iv" || layer == "v") {
    out = "link_id,vehicle,bin,speed_mph,n\n";
    dump_matrix_layer(out, layer == "iii"  ? model.metric_iii
                           : layer == "iv" ? model.metric_iv
                                           : model.metric_v);
  } else if (layer == "meta") {
    out = "key,value\n";
    out += "timezone," + model.timezone.name() + "\n";
    out += "box_observations," + std::to_string(model.stats.box_observations) + "\n";
    out += "zero_speed_skipped," + std::to_string(model.stats.zero_speed_skipped) + "\n";
    out += "link_observations," + std::to_string(model.stats.link_observations) + "\n";
    out += "window_from," + format_rfc3339(model.stats.window_from) + "\n";
    out += "window_to," + format_rfc3339(model.stats.window_to) + "\n";
  } else {
    throw Error(Errc::kInvalidArg, "unknown layer '" + std::string(layer) +
                                       "' (expected i, ii, iii, iv, v or meta)");
  }
  return out;
}

std::string metric_ii_to_csv(const MetricIISpeeds& t) {
  std::string out = "road_type,mph\n";
  for (std::size_t i = 0; i < kRoadTypeCount; ++i) {
    out += road_type_name(static_cast<RoadType>(i));
    out += ',';
    out += shortest_double(t.mph[i]);
    out += '\n';
  }
  out += "junction_delay_s," + shortest_double(t.junction_delay_s) + "\n";
  return out;
}

MetricIISpeeds metric_ii_from_csv(std::string_view text) {
  MetricIISpeeds t;
  std::array<bool, kRoadTypeCount> seen{};
  bool delay_seen = false;
  std::size_t pos = 0;
  bool header = true;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 2) throw Error(Errc::kParse, "speed table: expected 2 fields per row");
    double v = 0.0;
    const auto res = std::from_chars(f[1].data(), f[1].data() + f[1].size(), v);
    if (res.ec != std::errc()) throw Error(Errc::kParse, "speed table: bad number");
    if (f[0] == "junction_delay_s") {
      t.junction_delay_s = v;
      delay_seen = true;
    } else if (const auto rt = road_type_from_name(f[0])) {
      t.mph[static_cast<std::size_t>(*rt)] = v;
      seen[static_cast<std::size_t>(*rt)] = true;
    } else {
      throw Error(Errc::kParse, "speed table: unknown road type '" + std::string(f[0]) + "'");
    }
  }
  for (std::size_t i = 0; i < kRoadTypeCount; ++i)
    if (!seen[i])
      throw Error(Errc::kParse, std::string("speed table: missing road type ") +
                                    std::string(road_type_name(static_cast<RoadType>(i))));
  if (!delay_seen) throw Error(Errc::kParse, "speed table: missing junction_delay_s row");
  return t;
}

}  // namespace blrn
