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

#include "blrn.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "blrn/avls.hpp"
#include "blrn/calibrate.hpp"
#include "blrn/errors.hpp"
#include "blrn/eval.hpp"
#include "blrn/io.hpp"
#include "blrn/matching.hpp"
#include "blrn/roadnetwork.hpp"
#include "blrn/routing.hpp"
#include "blrn/speedmodel.hpp"
#include "blrn/synth.hpp"
#include "blrn/timeutil.hpp"

struct blrn_network {
  blrn::RoadNetwork net;
};

struct blrn_model {
  blrn::SpeedModel model;
};

struct blrn_route_result {
  blrn::RoutePrediction prediction;
  std::string json;
};

namespace {

using namespace blrn;

thread_local std::string g_last_error;

blrn_status status_from(Errc code) {
  switch (code) {
    case Errc::kIo: return BLRN_E_IO;
    case Errc::kParse: return BLRN_E_PARSE;
    case Errc::kBuild: return BLRN_E_BUILD;
    case Errc::kFormat: return BLRN_E_FORMAT;
    case Errc::kVersion: return BLRN_E_VERSION;
    case Errc::kChecksum: return BLRN_E_CHECKSUM;
    case Errc::kNoRoute: return BLRN_E_NO_ROUTE;
    case Errc::kSnap: return BLRN_E_SNAP;
    case Errc::kInvalidArg: return BLRN_E_INVALID_ARG;
    case Errc::kInternal: return BLRN_E_INTERNAL;
  }
  return BLRN_E_INTERNAL;
}

template <typename Fn>
blrn_status wrap(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return BLRN_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BLRN_E_INTERNAL;
  }
}

blrn_status fail_invalid(const char* msg) {
  g_last_error = msg;
  return BLRN_E_INVALID_ARG;
}

// Small header-indexed CSV reader for the pipeline files.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(Errc::kParse, "missing CSV column '" + name + "'");
  }
};

CsvTable read_csv(const std::string& path) {
  const std::string text = read_file(path);
  CsvTable table;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = nl == std::string::npos ? std::string_view(text).substr(pos)
                                                    : std::string_view(text).substr(pos, nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    for (const auto f : split_fields(line)) fields.emplace_back(f);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw Error(Errc::kParse, "empty CSV file: " + path);
  return table;
}

double to_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw Error(Errc::kParse, std::string("bad number in ") + what);
  return v;
}

VehicleClass to_vehicle(const std::string& s) {
  const auto v = vehicle_class_from_name(s);
  if (!v) throw Error(Errc::kParse, "unknown vehicle class '" + s + "'");
  return *v;
}

std::int64_t to_timestamp(const std::string& s) {
  const auto ts = parse_rfc3339(s);
  if (!ts) throw Error(Errc::kParse, "bad RFC3339 timestamp '" + s + "'");
  return *ts;
}

const char kTracesHeader[] =
    "journey_id,timestamp_utc,callsign,incident_id,vehicle,lat,lon,speed_mph,heading_deg";

std::string traces_to_csv(std::span<const Trace> traces) {
  std::string out = std::string(kTracesHeader) + "\n";
  char buf[320];
  for (const auto& t : traces) {
    for (const auto& f : t.fixes) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%s,%.7f,%.7f,%d,%d\n", t.journey_id.c_str(),
                    format_rfc3339(f.timestamp).c_str(), f.callsign.c_str(),
                    f.incident_id.c_str(), std::string(vehicle_class_name(f.vehicle)).c_str(),
                    f.position.lat, f.position.lon, f.speed_mph, f.heading_deg);
      out += buf;
    }
  }
  return out;
}

std::vector<Trace> traces_from_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const auto c_id = table.column("journey_id");
  const auto c_ts = table.column("timestamp_utc");
  const auto c_cs = table.column("callsign");
  const auto c_inc = table.column("incident_id");
  const auto c_veh = table.column("vehicle");
  const auto c_lat = table.column("lat");
  const auto c_lon = table.column("lon");
  const auto c_spd = table.column("speed_mph");
  const auto c_hdg = table.column("heading_deg");

  std::map<std::string, Trace> by_id;
  for (const auto& row : table.rows) {
    AvlsRecord rec;
    rec.timestamp = to_timestamp(row[c_ts]);
    rec.callsign = row[c_cs];
    rec.incident_id = row[c_inc];
    rec.vehicle = to_vehicle(row[c_veh]);
    rec.position = {to_double(row[c_lat], "lat"), to_double(row[c_lon], "lon")};
    rec.speed_mph = static_cast<int>(to_double(row[c_spd], "speed_mph"));
    rec.heading_deg = static_cast<int>(to_double(row[c_hdg], "heading_deg"));
    Trace& t = by_id[row[c_id]];
    if (t.fixes.empty()) {
      t.journey_id = row[c_id];
      t.callsign = rec.callsign;
      t.incident_id = rec.incident_id;
      t.vehicle = rec.vehicle;
    }
    t.fixes.push_back(std::move(rec));
  }
  std::vector<Trace> traces;
  traces.reserve(by_id.size());
  for (auto& [id, t] : by_id) {
    std::stable_sort(t.fixes.begin(), t.fixes.end(),
                     [](const AvlsRecord& a, const AvlsRecord& b) { return a.timestamp < b.timestamp; });
    traces.push_back(std::move(t));
  }
  return traces;
}

constexpr double kFullTraversalEps = 1e-4;  // metres, matches extract_speeds

std::string matched_to_csv(const RoadNetwork& net, std::span<const MatchOutcome> outcomes,
                           double min_traversal_s) {
  std::string out = "journey_id,vehicle,link_id,entry_ts,exit_ts,speed_mph\n";
  char buf[256];
  for (const auto& o : outcomes) {
    if (!o.route) continue;
    const MatchedRoute& r = *o.route;
    for (const auto& e : r.elements) {
      const RoadLink& link = net.link(e.link);
      const double dt = e.exit_s - e.entry_s;
      const bool full = e.entry_offset_m <= kFullTraversalEps &&
                        e.exit_offset_m >= link.length_m - kFullTraversalEps;
      std::string speed;
      if (full && dt >= min_traversal_s) speed = format_double(mps_to_mph(link.length_m / dt), 4);
      std::snprintf(buf, sizeof(buf), "%s,%s,%u,%.3f,%.3f,%s\n", r.journey_id.c_str(),
                    std::string(vehicle_class_name(r.vehicle)).c_str(), e.link, e.entry_s,
                    e.exit_s, speed.c_str());
      out += buf;
    }
  }
  return out;
}

}  // namespace

extern "C" {

const char* blrn_version(void) { return "1.0.0"; }

const char* blrn_status_name(blrn_status status) {
  switch (status) {
    case BLRN_OK: return "ok";
    case BLRN_E_IO: return "io";
    case BLRN_E_PARSE: return "parse";
    case BLRN_E_BUILD: return "build";
    case BLRN_E_FORMAT: return "format";
    case BLRN_E_VERSION: return "version";
    case BLRN_E_CHECKSUM: return "checksum";
    case BLRN_E_NO_ROUTE: return "no_route";
    case BLRN_E_SNAP: return "snap";
    case BLRN_E_INVALID_ARG: return "invalid_arg";
    case BLRN_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* blrn_last_error(void) { return g_last_error.c_str(); }

uint32_t blrn_file_crc32(const char* path, blrn_status* status_out) {
  uint32_t crc = 0;
  const blrn_status st = wrap([&] { crc = crc32_file(path); });
  if (status_out) *status_out = st;
  return crc;
}

int64_t blrn_parse_rfc3339(const char* s, blrn_status* status_out) {
  int64_t out = 0;
  const blrn_status st = wrap([&] { out = to_timestamp(s ? s : ""); });
  if (status_out) *status_out = st;
  return out;
}

blrn_status blrn_network_build(const char* geojson_path, blrn_network** out) {
  if (!geojson_path || !out) return fail_invalid("null argument");
  return wrap([&] {
    auto* handle = new blrn_network{RoadNetwork::build_from_geojson_file(geojson_path)};
    *out = handle;
  });
}

blrn_status blrn_network_load_dump(const char* csv_path, blrn_network** out) {
  if (!csv_path || !out) return fail_invalid("null argument");
  return wrap([&] {
    auto* handle = new blrn_network{RoadNetwork::from_dump_csv(read_file(csv_path))};
    *out = handle;
  });
}

void blrn_network_free(blrn_network* net) { delete net; }

uint64_t blrn_network_node_count(const blrn_network* net) {
  return net ? net->net.node_count() : 0;
}

uint64_t blrn_network_link_count(const blrn_network* net) {
  return net ? net->net.link_count() : 0;
}

blrn_status blrn_network_dump_csv(const blrn_network* net, const char* out_path) {
  if (!net || !out_path) return fail_invalid("null argument");
  return wrap([&] { write_file_atomic(out_path, net->net.dump_csv()); });
}

blrn_status blrn_network_nearest_link(const blrn_network* net, double lat, double lon,
                                      uint64_t* link_out, double* distance_m_out) {
  if (!net || !link_out) return fail_invalid("null argument");
  return wrap([&] {
    const auto hit = net->net.nearest_link({lat, lon});
    if (!hit) throw Error(Errc::kSnap, "network has no links");
    *link_out = hit->link;
    if (distance_m_out) *distance_m_out = hit->distance_m;
  });
}

void blrn_synth_params_init(blrn_synth_params* p) {
  if (!p) return;
  const SynthConfig d;
  p->grid_w = d.grid_w;
  p->grid_h = d.grid_h;
  p->spacing_m = d.spacing_m;
  p->journeys = d.journeys;
  p->noise_m = d.noise_m;
  p->interval_s = d.interval_s;
  p->seed = d.seed;
  p->start_epoch_s = d.start_epoch;
  p->journey_spacing_s = d.journey_spacing_s;
  p->junction_pause_s = d.junction_pause_s;
}

blrn_status blrn_synth_generate(const blrn_synth_params* params, const char* network_out,
                                const char* truth_out, const char* avls_out) {
  if (!params || !network_out || !truth_out || !avls_out) return fail_invalid("null argument");
  return wrap([&] {
    SynthConfig cfg;
    cfg.grid_w = params->grid_w;
    cfg.grid_h = params->grid_h;
    cfg.spacing_m = params->spacing_m;
    cfg.journeys = params->journeys;
    cfg.noise_m = params->noise_m;
    cfg.interval_s = params->interval_s;
    cfg.seed = params->seed;
    cfg.start_epoch = params->start_epoch_s;
    cfg.journey_spacing_s = params->journey_spacing_s;
    cfg.junction_pause_s = params->junction_pause_s;
    generate_world_files(cfg, network_out, truth_out, avls_out);
  });
}

blrn_status blrn_ingest_run(const char* avls_csv, const char* traces_out, const char* rejects_out,
                            int strict, blrn_ingest_stats* stats_out) {
  if (!avls_csv || !traces_out) return fail_invalid("null argument");
  return wrap([&] {
    ParseResult parsed = parse_avls_file(avls_csv, strict != 0);
    sort_for_filtering(parsed.records);
    FilterResult filtered = filter_stale_fixes(std::move(parsed.records));
    AggregateResult agg = aggregate_traces(std::move(filtered.records));

    write_file_atomic(traces_out, traces_to_csv(agg.traces));
    if (rejects_out) {
      std::string rej = "row_no,reason\n";
      for (const auto& r : parsed.rejects)
        rej += std::to_string(r.row_no) + "," + r.reason + "\n";
      write_file_atomic(rejects_out, rej);
    }
    if (stats_out) {
      std::uint64_t records = 0;
      for (const auto& t : agg.traces) records += t.fixes.size();
      stats_out->records = records;
      stats_out->parse_rejects = parsed.rejects.size();
      stats_out->stale_removed = filtered.removed;
      stats_out->traces = agg.traces.size();
      stats_out->short_discarded = agg.discarded_short;
    }
  });
}

blrn_status blrn_coverage_run(const blrn_network* net, const char* avls_csv,
                              const char* out_csv) {
  if (!net || !avls_csv || !out_csv) return fail_invalid("null argument");
  return wrap([&] {
    ParseResult parsed = parse_avls_file(avls_csv, false);
    const MonthlyCoverage cov = snap_coverage(net->net, parsed.records);
    std::string out = "month,cumulative_links\n";
    for (const auto& [month, count] : cov.months)
      out += month + "," + std::to_string(count) + "\n";
    write_file_atomic(out_csv, out);
  });
}

void blrn_match_params_init(blrn_match_params* p) {
  if (!p) return;
  const MatchParams d;
  p->sigma_m = d.sigma_m;
  p->beta_m = d.beta_m;
  p->cand_radius_m = d.cand_radius_m;
  p->max_candidates = d.max_candidates;
  p->threads = 1;
}

blrn_status blrn_match_run(const blrn_network* net, const char* traces_csv,
                           const blrn_match_params* params, const char* matched_out,
                           const char* rejects_out, blrn_match_stats* stats_out) {
  if (!net || !traces_csv || !params || !matched_out) return fail_invalid("null argument");
  return wrap([&] {
    MatchParams mp;
    mp.sigma_m = params->sigma_m;
    mp.beta_m = params->beta_m;
    mp.cand_radius_m = params->cand_radius_m;
    mp.max_candidates = params->max_candidates;
    if (!mp.valid()) throw Error(Errc::kInvalidArg, "invalid match params");

    const std::vector<Trace> traces = traces_from_csv(traces_csv);
    const std::vector<MatchOutcome> outcomes =
        match_traces(net->net, traces, mp, params->threads);

    write_file_atomic(matched_out, matched_to_csv(net->net, outcomes, mp.min_traversal_s));
    if (rejects_out) {
      std::string rej = "journey_id,reason\n";
      for (std::size_t i = 0; i < outcomes.size(); ++i)
        if (!outcomes[i].route)
          rej += traces[i].journey_id + "," + outcomes[i].reject_reason + "\n";
      write_file_atomic(rejects_out, rej);
    }
    if (stats_out) {
      stats_out->traces = traces.size();
      stats_out->matched = 0;
      for (const auto& o : outcomes) stats_out->matched += o.route.has_value();
      stats_out->rejected = traces.size() - stats_out->matched;
    }
  });
}

blrn_status blrn_match_coverage_run(const blrn_network* net, const char* matched_csv,
                                    const char* out_csv) {
  if (!net || !matched_csv || !out_csv) return fail_invalid("null argument");
  return wrap([&] {
    const CsvTable table = read_csv(matched_csv);
    const auto c_id = table.column("journey_id");
    const auto c_link = table.column("link_id");
    // Only distinct links matter for coverage; reassemble minimal routes.
    std::map<std::string, MatchedRoute> routes;
    for (const auto& row : table.rows) {
      MatchedRoute& r = routes[row[c_id]];
      RouteElement e;
      e.link = static_cast<LinkId>(to_double(row[c_link], "link_id"));
      r.elements.push_back(e);
    }
    std::vector<MatchedRoute> list;
    list.reserve(routes.size());
    for (auto& [id, r] : routes) list.push_back(std::move(r));
    const auto rows = coverage_by_road_type(list, net->net);
    std::string out = "road_type,links_total,links_used,fraction\n";
    for (const auto& row : rows) {
      out += std::string(road_type_name(row.road_type)) + "," +
             std::to_string(row.links_total) + "," + std::to_string(row.links_used) + "," +
             format_double(row.fraction, 6) + "\n";
    }
    write_file_atomic(out_csv, out);
  });
}

void blrn_train_params_init(blrn_train_params* p) {
  if (!p) return;
  p->timezone = "Europe/London";
  p->box_half_side_m = 250.0;
  p->window_from_epoch_s = 0;
  p->window_to_epoch_s = 0;
}

blrn_status blrn_train_run(const blrn_network* net, const char* avls_csv, const char* matched_csv,
                           const blrn_train_params* params, blrn_model** out) {
  if (!net || !params || !out) return fail_invalid("null argument");
  if (!avls_csv && !matched_csv) return fail_invalid("no training input given");
  return wrap([&] {
    auto model = std::make_unique<blrn_model>();
    const auto tz = Timezone::parse(params->timezone ? params->timezone : "UTC");
    if (!tz)
      throw Error(Errc::kInvalidArg,
                  "unknown timezone '" + std::string(params->timezone) + "'");
    model->model.timezone = *tz;

    auto in_window = [&](std::int64_t ts) {
      if (params->window_from_epoch_s != 0 && ts < params->window_from_epoch_s) return false;
      if (params->window_to_epoch_s != 0 && ts > params->window_to_epoch_s) return false;
      return true;
    };

    if (avls_csv) {
      ParseResult parsed = parse_avls_file(avls_csv, false);
      sort_for_filtering(parsed.records);
      FilterResult filtered = filter_stale_fixes(std::move(parsed.records));
      std::vector<SnappedObservation> obs;
      obs.reserve(filtered.records.size());
      for (const auto& rec : filtered.records) {
        if (!in_window(rec.timestamp)) continue;
        const auto hit = net->net.nearest_link(rec.position);
        if (!hit) continue;
        obs.push_back({hit->link, rec.vehicle, rec.position, rec.timestamp,
                       static_cast<double>(rec.speed_mph)});
      }
      train_metric_iii_iv(net->net, obs, params->box_half_side_m, model->model);
    }

    if (matched_csv) {
      const CsvTable table = read_csv(matched_csv);
      const auto c_veh = table.column("vehicle");
      const auto c_link = table.column("link_id");
      const auto c_entry = table.column("entry_ts");
      const auto c_speed = table.column("speed_mph");
      std::vector<LinkSpeedObservation> obs;
      for (const auto& row : table.rows) {
        if (row[c_speed].empty()) continue;  // partial traversal
        LinkSpeedObservation o;
        o.link = static_cast<LinkId>(to_double(row[c_link], "link_id"));
        o.vehicle = to_vehicle(row[c_veh]);
        o.entry = static_cast<std::int64_t>(to_double(row[c_entry], "entry_ts"));
        o.speed_mph = to_double(row[c_speed], "speed_mph");
        if (!in_window(o.entry)) continue;
        obs.push_back(o);
      }
      train_metric_v(obs, model->model);
    }
    *out = model.release();
  });
}

blrn_status blrn_model_save(const blrn_model* model, const char* path) {
  if (!model || !path) return fail_invalid("null argument");
  return wrap([&] { save_model_file(model->model, path); });
}

blrn_status blrn_model_load(const char* path, blrn_model** out) {
  if (!path || !out) return fail_invalid("null argument");
  return wrap([&] { *out = new blrn_model{load_model_file(path)}; });
}

void blrn_model_free(blrn_model* model) { delete model; }

blrn_status blrn_model_inspect(const blrn_model* model, const char* layer, const char* out_csv) {
  if (!model || !layer || !out_csv) return fail_invalid("null argument");
  return wrap([&] { write_file_atomic(out_csv, inspect_layer_csv(model->model, layer)); });
}

namespace {

// Resolves a Metric II speed set: preset name or table CSV path.
std::optional<MetricIISpeeds> resolve_speed_set(const char* spec) {
  if (!spec || !*spec) return std::nullopt;
  if (std::strcmp(spec, "las") == 0) return las_metric_ii();
  if (std::strcmp(spec, "nm") == 0 || std::strcmp(spec, "nelder-mead") == 0)
    return nelder_mead_metric_ii();
  return metric_ii_from_csv(read_file(spec));
}

RouteRequest build_request(const blrn_route_request* req, const std::optional<MetricIISpeeds>& table) {
  RouteRequest r;
  r.origin = {req->origin_lat, req->origin_lon};
  r.destination = {req->dest_lat, req->dest_lon};
  r.vehicle = to_vehicle(req->vehicle ? req->vehicle : "AEU");
  const auto metric = metric_from_name(req->metric ? req->metric : "");
  if (!metric)
    throw Error(Errc::kInvalidArg,
                "unknown metric '" + std::string(req->metric ? req->metric : "") + "'");
  r.metric = *metric;
  r.departure = to_timestamp(req->departure_utc ? req->departure_utc : "");
  if (table) r.metric_ii_table = &*table;
  return r;
}

std::string prediction_json(const RoutePrediction& p) {
  nlohmann::json j;
  j["metric"] = std::string(metric_name(p.metric));
  j["links"] = p.links;
  j["distance_m"] = p.distance_m;
  j["t_beta_s"] = p.t_beta_s;
  j["t_chi_s"] = p.t_chi_s;
  j["junctions"] = p.junctions;
  nlohmann::json prov = nlohmann::json::object();
  for (const auto& [tag, n] : p.provenance_counts) prov[tag] = n;
  j["provenance"] = std::move(prov);
  return j.dump(2) + "\n";
}

const SpeedModel& default_model() {
  static const SpeedModel model;
  return model;
}

}  // namespace

blrn_status blrn_route_query(const blrn_network* net, const blrn_model* model,
                             const blrn_route_request* request, blrn_route_result** out) {
  if (!net || !request || !out) return fail_invalid("null argument");
  return wrap([&] {
    const auto table = resolve_speed_set(request->speed_set);
    const RouteRequest r = build_request(request, table);
    const SpeedModel& m = model ? model->model : default_model();
    auto result = std::make_unique<blrn_route_result>();
    result->prediction = shortest_route(net->net, m, r);
    result->json = prediction_json(result->prediction);
    *out = result.release();
  });
}

void blrn_route_result_free(blrn_route_result* r) { delete r; }

double blrn_route_t_beta_s(const blrn_route_result* r) { return r ? r->prediction.t_beta_s : 0; }
double blrn_route_t_chi_s(const blrn_route_result* r) { return r ? r->prediction.t_chi_s : 0; }
double blrn_route_distance_m(const blrn_route_result* r) {
  return r ? r->prediction.distance_m : 0;
}
int blrn_route_junctions(const blrn_route_result* r) { return r ? r->prediction.junctions : 0; }
size_t blrn_route_link_count(const blrn_route_result* r) {
  return r ? r->prediction.links.size() : 0;
}
uint64_t blrn_route_link_at(const blrn_route_result* r, size_t index) {
  return r && index < r->prediction.links.size() ? r->prediction.links[index] : UINT64_MAX;
}
const char* blrn_route_json(const blrn_route_result* r) { return r ? r->json.c_str() : ""; }

blrn_status blrn_route_batch(const blrn_network* net, const blrn_model* model,
                             const char* requests_csv, const char* speed_set,
                             const char* out_csv) {
  if (!net || !requests_csv || !out_csv) return fail_invalid("null argument");
  return wrap([&] {
    const auto table = resolve_speed_set(speed_set);
    const SpeedModel& m = model ? model->model : default_model();
    const CsvTable in = read_csv(requests_csv);
    const auto c_id = in.column("journey_id");
    const auto c_olat = in.column("origin_lat");
    const auto c_olon = in.column("origin_lon");
    const auto c_dlat = in.column("dest_lat");
    const auto c_dlon = in.column("dest_lon");
    const auto c_veh = in.column("vehicle");
    const auto c_dep = in.column("departure_utc");
    const auto c_metric = in.column("metric");

    std::string out =
        "journey_id,metric,status,links,distance_m,t_beta_s,t_chi_s,junctions\n";
    for (const auto& row : in.rows) {
      out += row[c_id];
      out += ',';
      out += row[c_metric];
      out += ',';
      try {
        RouteRequest r;
        r.origin = {to_double(row[c_olat], "origin_lat"), to_double(row[c_olon], "origin_lon")};
        r.destination = {to_double(row[c_dlat], "dest_lat"), to_double(row[c_dlon], "dest_lon")};
        r.vehicle = to_vehicle(row[c_veh]);
        r.departure = to_timestamp(row[c_dep]);
        const auto metric = metric_from_name(row[c_metric]);
        if (!metric) throw Error(Errc::kInvalidArg, "unknown metric '" + row[c_metric] + "'");
        r.metric = *metric;
        if (table) r.metric_ii_table = &*table;
        const RoutePrediction p = shortest_route(net->net, m, r);
        out += "ok,";
        for (std::size_t i = 0; i < p.links.size(); ++i) {
          if (i) out += '|';
          out += std::to_string(p.links[i]);
        }
        out += ',' + format_double(p.distance_m, 3) + ',' + format_double(p.t_beta_s, 3) + ',' +
               format_double(p.t_chi_s, 3) + ',' + std::to_string(p.junctions);
      } catch (const Error& e) {
        out += std::string(blrn_status_name(status_from(e.code()))) + ",,,,,";
      }
      out += '\n';
    }
    write_file_atomic(out_csv, out);
  });
}

void blrn_calibrate_params_init(blrn_calibrate_params* p) {
  if (!p) return;
  p->max_iter = 500;
  p->tol = 1e-3;
  p->sample = 200;
  p->sample_seed = 1;
  p->threads = 1;
  p->initial = "las";
}

blrn_status blrn_calibrate_run(const blrn_network* net, const char* corpus_csv,
                               const blrn_calibrate_params* params, const char* table_out,
                               const char* report_json_out) {
  if (!net || !corpus_csv || !params || !table_out) return fail_invalid("null argument");
  return wrap([&] {
    std::vector<CorpusEntry> corpus = parse_corpus_csv(read_file(corpus_csv));
    if (corpus.empty()) throw Error(Errc::kInvalidArg, "calibration corpus is empty");
    if (params->sample > 0 && corpus.size() > static_cast<std::size_t>(params->sample)) {
      // Deterministic Fisher-Yates, then restore id order for reproducibility.
      std::mt19937_64 rng(params->sample_seed);
      for (std::size_t i = corpus.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(corpus[i], corpus[j]);
      }
      corpus.resize(static_cast<std::size_t>(params->sample));
      std::sort(corpus.begin(), corpus.end(),
                [](const CorpusEntry& a, const CorpusEntry& b) { return a.journey_id < b.journey_id; });
    }

    const auto initial = resolve_speed_set(params->initial ? params->initial : "las");
    NmOptions options;
    options.max_iter = params->max_iter;
    options.tol = params->tol;

    const SpeedModel model;
    const CalibrationReport report = calibrate_metric_ii(
        net->net, model, corpus, initial ? *initial : las_metric_ii(), options, params->threads);

    write_file_atomic(table_out, metric_ii_to_csv(report.final_table));
    if (report_json_out) write_file_atomic(report_json_out, calibration_report_json(report));
  });
}

blrn_status blrn_corpus_from_truth(const blrn_network* net, const char* truth_csv,
                                   const char* out_csv, int sample, uint64_t seed) {
  if (!net || !truth_csv || !out_csv) return fail_invalid("null argument");
  return wrap([&] {
    std::vector<TruthJourney> truth = parse_truth_csv(read_file(truth_csv));
    if (sample > 0 && truth.size() > static_cast<std::size_t>(sample)) {
      std::mt19937_64 rng(seed);
      for (std::size_t i = truth.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(truth[i], truth[j]);
      }
      truth.resize(static_cast<std::size_t>(sample));
      std::sort(truth.begin(), truth.end(), [](const TruthJourney& a, const TruthJourney& b) {
        return a.journey_id < b.journey_id;
      });
    }
    std::vector<CorpusEntry> corpus;
    corpus.reserve(truth.size());
    for (const auto& j : truth) {
      CorpusEntry e;
      e.journey_id = j.journey_id;
      e.origin = net->net.node_coord(net->net.link(j.links.front()).from);
      e.destination = net->net.node_coord(net->net.link(j.links.back()).to);
      e.vehicle = j.vehicle;
      e.departure = j.departure;
      e.actual_links = j.links;
      corpus.push_back(std::move(e));
    }
    write_file_atomic(out_csv, corpus_to_csv(corpus));
  });
}

blrn_status blrn_ref_from_truth(const blrn_network* net, const char* truth_csv,
                                const char* out_csv) {
  if (!net || !truth_csv || !out_csv) return fail_invalid("null argument");
  return wrap([&] {
    const std::vector<TruthJourney> truth = parse_truth_csv(read_file(truth_csv));
    std::string out =
        "journey_id,vehicle,departure_utc,origin_lat,origin_lon,dest_lat,dest_lon,actual_s\n";
    char buf[320];
    for (const auto& j : truth) {
      const LatLon o = net->net.node_coord(net->net.link(j.links.front()).from);
      const LatLon d = net->net.node_coord(net->net.link(j.links.back()).to);
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.7f,%.7f,%.7f,%.7f,%.3f\n", j.journey_id.c_str(),
                    std::string(vehicle_class_name(j.vehicle)).c_str(),
                    format_rfc3339(j.departure).c_str(), o.lat, o.lon, d.lat, d.lon, j.duration_s);
      out += buf;
    }
    write_file_atomic(out_csv, out);
  });
}

blrn_status blrn_eval_run(const char* pred_csv, const char* ref_csv, const char* axis,
                          const char* value, const char* regions_geojson, double centre_lat,
                          double centre_lon, const char* timezone, const char* out_csv,
                          const char* skipped_out) {
  if (!pred_csv || !ref_csv || !axis || !out_csv) return fail_invalid("null argument");
  return wrap([&] {
    const CsvTable pred_table = read_csv(pred_csv);
    const auto p_id = pred_table.column("journey_id");
    const auto p_beta = pred_table.column("t_beta_s");
    const auto p_chi = pred_table.column("t_chi_s");
    std::size_t p_status = SIZE_MAX;
    for (std::size_t i = 0; i < pred_table.header.size(); ++i)
      if (pred_table.header[i] == "status") p_status = i;

    std::vector<PredictionRow> predictions;
    for (const auto& row : pred_table.rows) {
      if (p_status != SIZE_MAX && row[p_status] != "ok") continue;
      predictions.push_back(
          {row[p_id], to_double(row[p_beta], "t_beta_s"), to_double(row[p_chi], "t_chi_s")});
    }

    const CsvTable ref_table = read_csv(ref_csv);
    const auto r_id = ref_table.column("journey_id");
    const auto r_veh = ref_table.column("vehicle");
    const auto r_dep = ref_table.column("departure_utc");
    const auto r_olat = ref_table.column("origin_lat");
    const auto r_olon = ref_table.column("origin_lon");
    const auto r_dlat = ref_table.column("dest_lat");
    const auto r_dlon = ref_table.column("dest_lon");
    const auto r_act = ref_table.column("actual_s");
    std::vector<ReferenceRow> references;
    for (const auto& row : ref_table.rows) {
      ReferenceRow ref;
      ref.journey_id = row[r_id];
      ref.vehicle = to_vehicle(row[r_veh]);
      ref.departure = to_timestamp(row[r_dep]);
      ref.origin = {to_double(row[r_olat], "origin_lat"), to_double(row[r_olon], "origin_lon")};
      ref.destination = {to_double(row[r_dlat], "dest_lat"), to_double(row[r_dlon], "dest_lon")};
      ref.actual_s = to_double(row[r_act], "actual_s");
      references.push_back(std::move(ref));
    }

    const auto tz = Timezone::parse(timezone ? timezone : "UTC");
    if (!tz) throw Error(Errc::kInvalidArg, "unknown timezone");
    const ErrorTable table =
        error_table(predictions, references, {centre_lat, centre_lon}, *tz);

    EvalAxis eval_axis;
    const std::string axis_name = axis;
    if (axis_name == "duration") eval_axis = EvalAxis::kDuration;
    else if (axis_name == "centre_distance") eval_axis = EvalAxis::kCentreDistance;
    else if (axis_name == "hour_of_day") eval_axis = EvalAxis::kHourOfDay;
    else if (axis_name == "region") eval_axis = EvalAxis::kRegion;
    else throw Error(Errc::kInvalidArg, "unknown axis '" + axis_name + "'");

    EvalValue eval_value = EvalValue::kErrorBeta;
    if (value && std::strcmp(value, "error_chi") == 0) eval_value = EvalValue::kErrorChi;
    else if (value && *value && std::strcmp(value, "error_beta") != 0)
      throw Error(Errc::kInvalidArg, "unknown value '" + std::string(value) + "'");

    std::vector<RegionPolygon> regions;
    if (eval_axis == EvalAxis::kRegion) {
      if (!regions_geojson) throw Error(Errc::kInvalidArg, "region axis needs a regions file");
      regions = parse_regions_geojson(read_file(regions_geojson));
    }

    const AggregateSummary summary = aggregate(table.records, eval_axis, eval_value, regions);
    write_file_atomic(out_csv, aggregate_to_csv(summary));
    if (skipped_out) {
      std::string skipped = "journey_id\n";
      for (const auto& id : table.unmatched) skipped += id + "\n";
      write_file_atomic(skipped_out, skipped);
    }
  });
}

}  // extern "C"
