/* Copyright 2026 The blrn Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C API of the blue-light routing engine. Opaque handles, status codes, and
 * file-granular pipeline stages; every declared output is written atomically
 * (temp file + rename). Handles are safe to share across threads for reads.
 * On any failure blrn_last_error() carries a human-readable message for the
 * calling thread.
 */

#ifndef BLRN_H_
#define BLRN_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum blrn_status {
  BLRN_OK = 0,
  BLRN_E_IO = 1,
  BLRN_E_PARSE = 2,
  BLRN_E_BUILD = 3,
  BLRN_E_FORMAT = 4,
  BLRN_E_VERSION = 5,
  BLRN_E_CHECKSUM = 6,
  BLRN_E_NO_ROUTE = 7,
  BLRN_E_SNAP = 8,
  BLRN_E_INVALID_ARG = 9,
  BLRN_E_INTERNAL = 10
} blrn_status;

const char* blrn_version(void);
const char* blrn_status_name(blrn_status status);
/* Message for the last failing call on this thread; empty when none. */
const char* blrn_last_error(void);

uint32_t blrn_file_crc32(const char* path, blrn_status* status_out);

/* RFC3339 timestamp ("2016-11-03T08:15:00Z") to seconds since the epoch. */
int64_t blrn_parse_rfc3339(const char* s, blrn_status* status_out);

/* ------------------------------------------------------------------ */
/* Road network                                                        */

typedef struct blrn_network blrn_network;

blrn_status blrn_network_build(const char* geojson_path, blrn_network** out);
/* Rebuild topology and attributes from a dump written by
 * blrn_network_dump_csv; spatial queries are unavailable on the result. */
blrn_status blrn_network_load_dump(const char* csv_path, blrn_network** out);
void blrn_network_free(blrn_network* net);
uint64_t blrn_network_node_count(const blrn_network* net);
uint64_t blrn_network_link_count(const blrn_network* net);
blrn_status blrn_network_dump_csv(const blrn_network* net, const char* out_path);
blrn_status blrn_network_nearest_link(const blrn_network* net, double lat, double lon,
                                      uint64_t* link_out, double* distance_m_out);

/* ------------------------------------------------------------------ */
/* Synthetic worlds                                                    */

typedef struct blrn_synth_params {
  int grid_w;
  int grid_h;
  double spacing_m;
  int journeys;
  double noise_m;
  double interval_s;
  uint64_t seed;
  int64_t start_epoch_s;
  int64_t journey_spacing_s;
  double junction_pause_s;
} blrn_synth_params;

void blrn_synth_params_init(blrn_synth_params* params);
blrn_status blrn_synth_generate(const blrn_synth_params* params, const char* network_out,
                                const char* truth_out, const char* avls_out);

/* ------------------------------------------------------------------ */
/* Telemetry ingestion                                                 */

typedef struct blrn_ingest_stats {
  uint64_t records;
  uint64_t parse_rejects;
  uint64_t stale_removed;
  uint64_t traces;
  uint64_t short_discarded;
} blrn_ingest_stats;

/* Parses the AVLS CSV, filters stale fixes, aggregates journeys and writes
 * a traces CSV (journey_id + the AVLS columns) plus a reject report
 * (row_no,reason). rejects_out may be NULL. */
blrn_status blrn_ingest_run(const char* avls_csv, const char* traces_out, const char* rejects_out,
                            int strict, blrn_ingest_stats* stats_out);

/* Cumulative unique-link coverage per calendar month (month,cumulative). */
blrn_status blrn_coverage_run(const blrn_network* net, const char* avls_csv, const char* out_csv);

/* ------------------------------------------------------------------ */
/* Map-matching                                                        */

typedef struct blrn_match_params {
  double sigma_m;
  double beta_m;
  double cand_radius_m;
  int max_candidates;
  int threads;
} blrn_match_params;

void blrn_match_params_init(blrn_match_params* params);

typedef struct blrn_match_stats {
  uint64_t traces;
  uint64_t matched;
  uint64_t rejected;
} blrn_match_stats;

/* Reads a traces CSV, reconstructs routes, writes matched.csv rows
 * (journey_id,vehicle,link_id,entry_ts,exit_ts,speed_mph; speed empty unless
 * the link was fully traversed) and a reject report (journey_id,reason).
 * rejects_out may be NULL. */
blrn_status blrn_match_run(const blrn_network* net, const char* traces_csv,
                           const blrn_match_params* params, const char* matched_out,
                           const char* rejects_out, blrn_match_stats* stats_out);

/* Coverage by road type over matched routes (road_type,links,used,fraction). */
blrn_status blrn_match_coverage_run(const blrn_network* net, const char* matched_csv,
                                    const char* out_csv);

/* ------------------------------------------------------------------ */
/* Speed model                                                         */

typedef struct blrn_model blrn_model;

typedef struct blrn_train_params {
  const char* timezone; /* "UTC", "Europe/London" or "+HH:MM" */
  double box_half_side_m;
  int64_t window_from_epoch_s; /* 0 = open */
  int64_t window_to_epoch_s;   /* 0 = open */
} blrn_train_params;

void blrn_train_params_init(blrn_train_params* params);

/* Trains Metrics III/IV from snapped raw AVLS records (avls_csv) and Metric V
 * from map-matched traversal speeds (matched_csv). Either input may be NULL
 * to skip its layers. */
blrn_status blrn_train_run(const blrn_network* net, const char* avls_csv, const char* matched_csv,
                           const blrn_train_params* params, blrn_model** out);

blrn_status blrn_model_save(const blrn_model* model, const char* path);
blrn_status blrn_model_load(const char* path, blrn_model** out);
void blrn_model_free(blrn_model* model);
/* layer: "i", "ii", "iii", "iv", "v" or "meta". */
blrn_status blrn_model_inspect(const blrn_model* model, const char* layer, const char* out_csv);

/* ------------------------------------------------------------------ */
/* Routing                                                             */

typedef struct blrn_route_request {
  double origin_lat, origin_lon;
  double dest_lat, dest_lon;
  const char* vehicle;       /* "AEU" or "FRU" */
  const char* metric;        /* "I".."V" or "HYBRID" */
  const char* departure_utc; /* RFC3339 */
  /* Metric II speed set: a preset name ("las" or "nm") or a path to a speed
   * table CSV. NULL keeps the model default (HYBRID then uses "nm"). */
  const char* speed_set;
} blrn_route_request;

typedef struct blrn_route_result blrn_route_result;

blrn_status blrn_route_query(const blrn_network* net, const blrn_model* model,
                             const blrn_route_request* request, blrn_route_result** out);
void blrn_route_result_free(blrn_route_result* result);
double blrn_route_t_beta_s(const blrn_route_result* result);
double blrn_route_t_chi_s(const blrn_route_result* result);
double blrn_route_distance_m(const blrn_route_result* result);
int blrn_route_junctions(const blrn_route_result* result);
size_t blrn_route_link_count(const blrn_route_result* result);
uint64_t blrn_route_link_at(const blrn_route_result* result, size_t index);
/* JSON object with links, distance_m, t_beta_s, t_chi_s, junctions, metric
 * and provenance counts; owned by the result. */
const char* blrn_route_json(const blrn_route_result* result);

/* Batch: requests CSV (journey_id,origin_lat,origin_lon,dest_lat,dest_lon,
 * vehicle,departure_utc,metric) -> row-aligned predictions CSV. Per-row
 * failures land in the row's status column. */
blrn_status blrn_route_batch(const blrn_network* net, const blrn_model* model,
                             const char* requests_csv, const char* speed_set, const char* out_csv);

/* ------------------------------------------------------------------ */
/* Calibration                                                         */

typedef struct blrn_calibrate_params {
  int max_iter;
  double tol;
  int sample; /* corpus subsample size, 0 = use all rows */
  uint64_t sample_seed;
  int threads;
  const char* initial; /* "las", "nm" or a speed table CSV path */
} blrn_calibrate_params;

void blrn_calibrate_params_init(blrn_calibrate_params* params);

blrn_status blrn_calibrate_run(const blrn_network* net, const char* corpus_csv,
                               const blrn_calibrate_params* params, const char* table_out,
                               const char* report_json_out);

/* Builds a calibration corpus / evaluation reference from a truth file. */
blrn_status blrn_corpus_from_truth(const blrn_network* net, const char* truth_csv,
                                   const char* out_csv, int sample, uint64_t seed);
blrn_status blrn_ref_from_truth(const blrn_network* net, const char* truth_csv,
                                const char* out_csv);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */

/* axis: "duration", "centre_distance", "hour_of_day" or "region" (the last
 * needs regions_geojson); value: "error_beta" or "error_chi". pred CSV needs
 * journey_id,t_beta_s,t_chi_s columns (route_batch output works); ref CSV is
 * journey_id,vehicle,departure_utc,origin_lat,origin_lon,dest_lat,dest_lon,
 * actual_s (blrn_ref_from_truth output). */
blrn_status blrn_eval_run(const char* pred_csv, const char* ref_csv, const char* axis,
                          const char* value, const char* regions_geojson, double centre_lat,
                          double centre_lon, const char* timezone, const char* out_csv,
                          const char* skipped_out /* may be NULL */);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BLRN_H_ */
