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

// Pipeline driver. Everything goes through the C API in blrn.h; progress is
// sent to stderr, declared outputs are files (the one-shot `route` JSON also
// echoes to stdout), and every run with outputs writes a manifest next to its
// first output.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "blrn.h"

namespace {

struct RunFiles {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

int exit_code_for(blrn_status status) {
  return status == BLRN_E_INVALID_ARG ? 1 : 2;
}

// Exits on failure; the C API leaves no partial outputs behind.
void check(blrn_status status, const char* stage) {
  if (status == BLRN_OK) return;
  std::fprintf(stderr, "error: %s failed (%s): %s\n", stage, blrn_status_name(status),
               blrn_last_error());
  std::exit(exit_code_for(status));
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

void write_manifest(const std::string& subcommand, const std::vector<std::string>& argv_echo,
                    const RunFiles& files, double elapsed_ms) {
  if (files.outputs.empty()) return;
  std::string json = "{\n";
  json += "  \"tool\": \"blrn " + std::string(blrn_version()) + "\",\n";
  json += "  \"subcommand\": \"" + json_escape(subcommand) + "\",\n";
  json += "  \"args\": [";
  for (std::size_t i = 0; i < argv_echo.size(); ++i)
    json += (i ? ", " : "") + std::string("\"") + json_escape(argv_echo[i]) + "\"";
  json += "],\n";
  auto hash_list = [&](const std::vector<std::string>& paths) {
    std::string out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      blrn_status st = BLRN_OK;
      const uint32_t crc = blrn_file_crc32(paths[i].c_str(), &st);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "\"crc32\": \"%08x\"", st == BLRN_OK ? crc : 0);
      out += (i ? ",\n    " : "    ") + std::string("{\"path\": \"") + json_escape(paths[i]) +
             "\", " + buf + "}";
    }
    return out;
  };
  json += "  \"inputs\": [\n" + hash_list(files.inputs) + "\n  ],\n";
  json += "  \"outputs\": [\n" + hash_list(files.outputs) + "\n  ],\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "  \"elapsed_ms\": %.1f\n", elapsed_ms);
  json += buf;
  json += "}\n";

  const std::string path = files.outputs.front() + ".manifest.json";
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) return;
  std::fwrite(json.data(), 1, json.size(), f);
  std::fclose(f);
  std::rename(tmp.c_str(), path.c_str());
}

bool parse_latlon(const std::string& s, double* lat, double* lon) {
  return std::sscanf(s.c_str(), "%lf,%lf", lat, lon) == 2;
}

int64_t parse_ts_or_die(const std::string& s, const char* flag) {
  blrn_status st = BLRN_OK;
  const int64_t ts = blrn_parse_rfc3339(s.c_str(), &st);
  if (st != BLRN_OK) {
    std::fprintf(stderr, "error: %s expects an RFC3339 timestamp, got '%s'\n", flag, s.c_str());
    std::exit(1);
  }
  return ts;
}

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blrn: blue-light routing and travel-time estimation engine"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (TOML-style); command-line flags win");

  std::vector<std::string> argv_echo(argv + 1, argv + argc);

  // ---- build-network ----
  auto* cmd_build = app.add_subcommand("build-network", "Build the road network from GeoJSON");
  std::string bn_input, bn_dump;
  cmd_build->add_option("--input", bn_input, "Network GeoJSON file")->required();
  cmd_build->add_option("--dump", bn_dump, "Write the deterministic link dump CSV here");

  // ---- synth ----
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic world with ground truth");
  std::string sy_grid = "20x20", sy_outdir = ".", sy_start = "2016-11-03T00:00:00Z";
  blrn_synth_params sy{};
  blrn_synth_params_init(&sy);
  cmd_synth->add_option("--grid", sy_grid, "Grid size WxH (default 20x20)");
  cmd_synth->add_option("--spacing-m", sy.spacing_m, "Node spacing in metres");
  cmd_synth->add_option("--journeys", sy.journeys, "Number of journeys");
  cmd_synth->add_option("--noise-m", sy.noise_m, "GPS noise sigma in metres");
  cmd_synth->add_option("--interval-s", sy.interval_s, "Fix cadence in seconds");
  cmd_synth->add_option("--seed", sy.seed, "Random seed");
  cmd_synth->add_option("--start", sy_start, "First departure (RFC3339)");
  cmd_synth->add_option("--journey-spacing-s", sy.journey_spacing_s, "Departure stagger");
  cmd_synth->add_option("--junction-pause-s", sy.junction_pause_s, "Per-junction stop");
  cmd_synth->add_option("--out-dir", sy_outdir, "Output directory");

  // ---- ingest ----
  auto* cmd_ingest = app.add_subcommand("ingest", "Parse, filter and aggregate AVLS telemetry");
  std::string in_avls, in_out, in_rejects, in_network, in_coverage;
  bool in_strict = false;
  cmd_ingest->add_option("--avls", in_avls, "AVLS CSV input")->required();
  cmd_ingest->add_option("--out", in_out, "Traces CSV output")->required();
  cmd_ingest->add_option("--rejects", in_rejects, "Reject report CSV");
  cmd_ingest->add_flag("--strict", in_strict, "Fail on the first malformed row");
  cmd_ingest->add_option("--network", in_network, "Network GeoJSON (for --coverage)");
  cmd_ingest->add_option("--coverage", in_coverage, "Monthly unique-link coverage CSV");

  // ---- match ----
  auto* cmd_match = app.add_subcommand("match", "Map-match traces to link-by-link routes");
  std::string ma_network, ma_traces, ma_out, ma_rejects, ma_coverage;
  blrn_match_params ma{};
  blrn_match_params_init(&ma);
  ma.threads = default_threads();
  cmd_match->add_option("--network", ma_network, "Network GeoJSON")->required();
  cmd_match->add_option("--traces", ma_traces, "Traces CSV from ingest")->required();
  cmd_match->add_option("--out", ma_out, "Matched route CSV output")->required();
  cmd_match->add_option("--rejects", ma_rejects, "Rejected trace report CSV");
  cmd_match->add_option("--coverage", ma_coverage, "Coverage-by-road-type CSV");
  cmd_match->add_option("--sigma-m", ma.sigma_m, "GPS noise sigma (m)");
  cmd_match->add_option("--beta-m", ma.beta_m, "Transition tolerance (m)");
  cmd_match->add_option("--cand-radius-m", ma.cand_radius_m, "Candidate radius (m)");
  cmd_match->add_option("--max-candidates", ma.max_candidates, "Candidates per fix");
  cmd_match->add_option("--threads", ma.threads, "Worker threads");

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "Train the speed model layers");
  std::string tr_network, tr_avls, tr_matched, tr_out, tr_tz = "Europe/London";
  std::string tr_from, tr_to;
  double tr_box = 250.0;
  cmd_train->add_option("--network", tr_network, "Network GeoJSON")->required();
  cmd_train->add_option("--avls", tr_avls, "Raw AVLS CSV (Metrics III/IV)");
  cmd_train->add_option("--matched", tr_matched, "Matched route CSV (Metric V)");
  cmd_train->add_option("--out", tr_out, "Model file output (.blsm)")->required();
  cmd_train->add_option("--timezone", tr_tz, "Civil timezone for binning");
  cmd_train->add_option("--box-half-side-m", tr_box, "Neighbourhood box half side (m)");
  cmd_train->add_option("--window-from", tr_from, "Training window start (RFC3339)");
  cmd_train->add_option("--window-to", tr_to, "Training window end (RFC3339)");

  // ---- route ----
  auto* cmd_route = app.add_subcommand("route", "Route and estimate arrival time");
  std::string ro_network, ro_model, ro_from, ro_to, ro_vehicle = "AEU", ro_metric = "V";
  std::string ro_at, ro_speed_set, ro_out, ro_batch;
  cmd_route->add_option("--network", ro_network, "Network GeoJSON")->required();
  cmd_route->add_option("--model", ro_model, "Trained model file (.blsm)");
  cmd_route->add_option("--from", ro_from, "Origin lat,lon");
  cmd_route->add_option("--to", ro_to, "Destination lat,lon");
  cmd_route->add_option("--vehicle", ro_vehicle, "AEU or FRU");
  cmd_route->add_option("--metric", ro_metric, "I, II, III, IV, V or HYBRID");
  cmd_route->add_option("--at", ro_at, "Departure (RFC3339)");
  cmd_route->add_option("--speed-set", ro_speed_set,
                        "Metric II speed set: las, nm or a table CSV path");
  cmd_route->add_option("--out", ro_out, "Write the route JSON / batch CSV here");
  cmd_route->add_option("--batch", ro_batch, "Batch requests CSV (row-aligned output)");

  // ---- calibrate ----
  auto* cmd_cal = app.add_subcommand("calibrate", "Nelder-Mead calibration of Metric II speeds");
  std::string ca_network, ca_corpus, ca_table, ca_report, ca_initial = "las";
  blrn_calibrate_params ca{};
  blrn_calibrate_params_init(&ca);
  ca.threads = default_threads();
  cmd_cal->add_option("--network", ca_network, "Network GeoJSON")->required();
  cmd_cal->add_option("--corpus", ca_corpus, "Reference route corpus CSV")->required();
  cmd_cal->add_option("--out-table", ca_table, "Calibrated speed table CSV")->required();
  cmd_cal->add_option("--report", ca_report, "Calibration report JSON");
  cmd_cal->add_option("--max-iter", ca.max_iter, "Iteration budget");
  cmd_cal->add_option("--tol", ca.tol, "Objective spread tolerance");
  cmd_cal->add_option("--sample", ca.sample, "Corpus subsample size (0 = all)");
  cmd_cal->add_option("--sample-seed", ca.sample_seed, "Subsample seed");
  cmd_cal->add_option("--threads", ca.threads, "Worker threads");
  cmd_cal->add_option("--initial", ca_initial, "Initial table: las, nm or CSV path");

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "Score predictions against references");
  std::string ev_pred, ev_ref, ev_axis = "hour_of_day", ev_value = "error_beta";
  std::string ev_regions, ev_out, ev_skipped, ev_centre = "51.5073,-0.1276", ev_tz = "UTC";
  cmd_eval->add_option("--pred", ev_pred, "Predictions CSV (route --batch output)")->required();
  cmd_eval->add_option("--ref", ev_ref, "Reference journeys CSV")->required();
  cmd_eval->add_option("--axis", ev_axis, "duration, centre_distance, hour_of_day or region");
  cmd_eval->add_option("--value", ev_value, "error_beta or error_chi");
  cmd_eval->add_option("--regions", ev_regions, "Region polygons GeoJSON (axis=region)");
  cmd_eval->add_option("--centre", ev_centre, "Centre lat,lon for distance bands");
  cmd_eval->add_option("--timezone", ev_tz, "Timezone for hour binning");
  cmd_eval->add_option("--out", ev_out, "Summary CSV output")->required();
  cmd_eval->add_option("--skipped", ev_skipped, "Unmatched journey report CSV");

  // ---- corpus / ref helpers ----
  auto* cmd_corpus = app.add_subcommand("corpus-from-truth",
                                        "Build a calibration corpus from a synth truth file");
  std::string co_network, co_truth, co_out;
  int co_sample = 0;
  uint64_t co_seed = 1;
  cmd_corpus->add_option("--network", co_network, "Network GeoJSON")->required();
  cmd_corpus->add_option("--truth", co_truth, "Truth CSV from synth")->required();
  cmd_corpus->add_option("--out", co_out, "Corpus CSV output")->required();
  cmd_corpus->add_option("--sample", co_sample, "Subsample size (0 = all)");
  cmd_corpus->add_option("--seed", co_seed, "Subsample seed");

  auto* cmd_ref = app.add_subcommand("ref-from-truth",
                                     "Build an evaluation reference from a synth truth file");
  std::string rf_network, rf_truth, rf_out;
  cmd_ref->add_option("--network", rf_network, "Network GeoJSON")->required();
  cmd_ref->add_option("--truth", rf_truth, "Truth CSV from synth")->required();
  cmd_ref->add_option("--out", rf_out, "Reference CSV output")->required();

  // ---- model-inspect ----
  auto* cmd_inspect = app.add_subcommand("model-inspect", "Dump a model layer to CSV");
  std::string mi_model, mi_layer = "v", mi_out;
  cmd_inspect->add_option("--model", mi_model, "Model file (.blsm)")->required();
  cmd_inspect->add_option("--layer", mi_layer, "i, ii, iii, iv, v or meta");
  cmd_inspect->add_option("--out", mi_out, "Layer CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints usage, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;  // validation failure
  }

  const auto t0 = std::chrono::steady_clock::now();
  RunFiles files;
  std::string subcommand;

  if (*cmd_build) {
    subcommand = "build-network";
    files.inputs = {bn_input};
    blrn_network* net = nullptr;
    check(blrn_network_build(bn_input.c_str(), &net), "build-network");
    std::fprintf(stderr, "network: %llu nodes, %llu directed links\n",
                 static_cast<unsigned long long>(blrn_network_node_count(net)),
                 static_cast<unsigned long long>(blrn_network_link_count(net)));
    if (!bn_dump.empty()) {
      check(blrn_network_dump_csv(net, bn_dump.c_str()), "network dump");
      files.outputs.push_back(bn_dump);
    }
    blrn_network_free(net);
  } else if (*cmd_synth) {
    subcommand = "synth";
    if (std::sscanf(sy_grid.c_str(), "%dx%d", &sy.grid_w, &sy.grid_h) != 2) {
      std::fprintf(stderr, "error: --grid expects WxH, got '%s'\n", sy_grid.c_str());
      return 1;
    }
    sy.start_epoch_s = parse_ts_or_die(sy_start, "--start");
    const std::string net_path = sy_outdir + "/network.geojson";
    const std::string truth_path = sy_outdir + "/truth.csv";
    const std::string avls_path = sy_outdir + "/avls.csv";
    check(blrn_synth_generate(&sy, net_path.c_str(), truth_path.c_str(), avls_path.c_str()),
          "synth");
    files.outputs = {net_path, truth_path, avls_path};
    std::fprintf(stderr, "synth: wrote %s, %s, %s\n", net_path.c_str(), truth_path.c_str(),
                 avls_path.c_str());
  } else if (*cmd_ingest) {
    subcommand = "ingest";
    files.inputs = {in_avls};
    blrn_ingest_stats stats{};
    check(blrn_ingest_run(in_avls.c_str(), in_out.c_str(),
                          in_rejects.empty() ? nullptr : in_rejects.c_str(), in_strict ? 1 : 0,
                          &stats),
          "ingest");
    files.outputs.push_back(in_out);
    if (!in_rejects.empty()) files.outputs.push_back(in_rejects);
    std::fprintf(stderr,
                 "ingest: %llu records in %llu traces (%llu rejects, %llu stale, %llu short)\n",
                 static_cast<unsigned long long>(stats.records),
                 static_cast<unsigned long long>(stats.traces),
                 static_cast<unsigned long long>(stats.parse_rejects),
                 static_cast<unsigned long long>(stats.stale_removed),
                 static_cast<unsigned long long>(stats.short_discarded));
    if (!in_coverage.empty()) {
      if (in_network.empty()) {
        std::fprintf(stderr, "error: --coverage needs --network\n");
        return 1;
      }
      blrn_network* net = nullptr;
      check(blrn_network_build(in_network.c_str(), &net), "build-network");
      check(blrn_coverage_run(net, in_avls.c_str(), in_coverage.c_str()), "coverage");
      blrn_network_free(net);
      files.inputs.push_back(in_network);
      files.outputs.push_back(in_coverage);
    }
  } else if (*cmd_match) {
    subcommand = "match";
    files.inputs = {ma_network, ma_traces};
    blrn_network* net = nullptr;
    check(blrn_network_build(ma_network.c_str(), &net), "build-network");
    blrn_match_stats stats{};
    check(blrn_match_run(net, ma_traces.c_str(), &ma, ma_out.c_str(),
                         ma_rejects.empty() ? nullptr : ma_rejects.c_str(), &stats),
          "match");
    files.outputs.push_back(ma_out);
    if (!ma_rejects.empty()) files.outputs.push_back(ma_rejects);
    std::fprintf(stderr, "match: %llu traces, %llu matched, %llu rejected\n",
                 static_cast<unsigned long long>(stats.traces),
                 static_cast<unsigned long long>(stats.matched),
                 static_cast<unsigned long long>(stats.rejected));
    if (!ma_coverage.empty()) {
      check(blrn_match_coverage_run(net, ma_out.c_str(), ma_coverage.c_str()), "coverage");
      files.outputs.push_back(ma_coverage);
    }
    blrn_network_free(net);
  } else if (*cmd_train) {
    subcommand = "train";
    files.inputs = {tr_network};
    if (tr_avls.empty() && tr_matched.empty()) {
      std::fprintf(stderr, "error: train needs --avls and/or --matched\n");
      return 1;
    }
    blrn_network* net = nullptr;
    check(blrn_network_build(tr_network.c_str(), &net), "build-network");
    blrn_train_params params{};
    blrn_train_params_init(&params);
    params.timezone = tr_tz.c_str();
    params.box_half_side_m = tr_box;
    if (!tr_from.empty()) params.window_from_epoch_s = parse_ts_or_die(tr_from, "--window-from");
    if (!tr_to.empty()) params.window_to_epoch_s = parse_ts_or_die(tr_to, "--window-to");
    blrn_model* model = nullptr;
    if (!tr_avls.empty()) files.inputs.push_back(tr_avls);
    if (!tr_matched.empty()) files.inputs.push_back(tr_matched);
    check(blrn_train_run(net, tr_avls.empty() ? nullptr : tr_avls.c_str(),
                         tr_matched.empty() ? nullptr : tr_matched.c_str(), &params, &model),
          "train");
    check(blrn_model_save(model, tr_out.c_str()), "model save");
    files.outputs.push_back(tr_out);
    std::fprintf(stderr, "train: model written to %s\n", tr_out.c_str());
    blrn_model_free(model);
    blrn_network_free(net);
  } else if (*cmd_route) {
    subcommand = "route";
    files.inputs = {ro_network};
    blrn_network* net = nullptr;
    check(blrn_network_build(ro_network.c_str(), &net), "build-network");
    blrn_model* model = nullptr;
    if (!ro_model.empty()) {
      check(blrn_model_load(ro_model.c_str(), &model), "model load");
      files.inputs.push_back(ro_model);
    }
    if (!ro_batch.empty()) {
      if (ro_out.empty()) {
        std::fprintf(stderr, "error: --batch needs --out\n");
        return 1;
      }
      files.inputs.push_back(ro_batch);
      check(blrn_route_batch(net, model, ro_batch.c_str(),
                             ro_speed_set.empty() ? nullptr : ro_speed_set.c_str(),
                             ro_out.c_str()),
            "route batch");
      files.outputs.push_back(ro_out);
    } else {
      if (ro_from.empty() || ro_to.empty() || ro_at.empty()) {
        std::fprintf(stderr, "error: route needs --from, --to and --at (or --batch)\n");
        return 1;
      }
      blrn_route_request req{};
      if (!parse_latlon(ro_from, &req.origin_lat, &req.origin_lon)) {
        std::fprintf(stderr, "error: --from expects lat,lon\n");
        return 1;
      }
      if (!parse_latlon(ro_to, &req.dest_lat, &req.dest_lon)) {
        std::fprintf(stderr, "error: --to expects lat,lon\n");
        return 1;
      }
      req.vehicle = ro_vehicle.c_str();
      req.metric = ro_metric.c_str();
      req.departure_utc = ro_at.c_str();
      req.speed_set = ro_speed_set.empty() ? nullptr : ro_speed_set.c_str();
      blrn_route_result* result = nullptr;
      check(blrn_route_query(net, model, &req, &result), "route");
      const char* json = blrn_route_json(result);
      std::fputs(json, stdout);
      if (!ro_out.empty()) {
        std::FILE* f = std::fopen((ro_out + ".tmp").c_str(), "wb");
        if (f) {
          std::fwrite(json, 1, std::strlen(json), f);
          std::fclose(f);
          std::rename((ro_out + ".tmp").c_str(), ro_out.c_str());
        }
        files.outputs.push_back(ro_out);
      }
      blrn_route_result_free(result);
    }
    blrn_model_free(model);
    blrn_network_free(net);
  } else if (*cmd_cal) {
    subcommand = "calibrate";
    files.inputs = {ca_network, ca_corpus};
    blrn_network* net = nullptr;
    check(blrn_network_build(ca_network.c_str(), &net), "build-network");
    ca.initial = ca_initial.c_str();
    check(blrn_calibrate_run(net, ca_corpus.c_str(), &ca, ca_table.c_str(),
                             ca_report.empty() ? nullptr : ca_report.c_str()),
          "calibrate");
    files.outputs.push_back(ca_table);
    if (!ca_report.empty()) files.outputs.push_back(ca_report);
    std::fprintf(stderr, "calibrate: table written to %s\n", ca_table.c_str());
    blrn_network_free(net);
  } else if (*cmd_eval) {
    subcommand = "eval";
    files.inputs = {ev_pred, ev_ref};
    double clat = 51.5073, clon = -0.1276;
    if (!parse_latlon(ev_centre, &clat, &clon)) {
      std::fprintf(stderr, "error: --centre expects lat,lon\n");
      return 1;
    }
    if (!ev_regions.empty()) files.inputs.push_back(ev_regions);
    check(blrn_eval_run(ev_pred.c_str(), ev_ref.c_str(), ev_axis.c_str(), ev_value.c_str(),
                        ev_regions.empty() ? nullptr : ev_regions.c_str(), clat, clon,
                        ev_tz.c_str(), ev_out.c_str(),
                        ev_skipped.empty() ? nullptr : ev_skipped.c_str()),
          "eval");
    files.outputs.push_back(ev_out);
    if (!ev_skipped.empty()) files.outputs.push_back(ev_skipped);
  } else if (*cmd_corpus) {
    subcommand = "corpus-from-truth";
    files.inputs = {co_network, co_truth};
    blrn_network* net = nullptr;
    check(blrn_network_build(co_network.c_str(), &net), "build-network");
    check(blrn_corpus_from_truth(net, co_truth.c_str(), co_out.c_str(), co_sample, co_seed),
          "corpus");
    files.outputs.push_back(co_out);
    blrn_network_free(net);
  } else if (*cmd_ref) {
    subcommand = "ref-from-truth";
    files.inputs = {rf_network, rf_truth};
    blrn_network* net = nullptr;
    check(blrn_network_build(rf_network.c_str(), &net), "build-network");
    check(blrn_ref_from_truth(net, rf_truth.c_str(), rf_out.c_str()), "ref");
    files.outputs.push_back(rf_out);
    blrn_network_free(net);
  } else if (*cmd_inspect) {
    subcommand = "model-inspect";
    files.inputs = {mi_model};
    blrn_model* model = nullptr;
    check(blrn_model_load(mi_model.c_str(), &model), "model load");
    check(blrn_model_inspect(model, mi_layer.c_str(), mi_out.c_str()), "inspect");
    files.outputs.push_back(mi_out);
    blrn_model_free(model);
  }

  const auto t1 = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  write_manifest(subcommand, argv_echo, files, ms);
  return 0;
}
