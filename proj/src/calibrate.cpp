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

#include "blrn/calibrate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "blrn/errors.hpp"
#include "blrn/eval.hpp"
#include "blrn/io.hpp"
#include "blrn/routing.hpp"

namespace blrn {

namespace {

std::vector<double> clip_to_box(std::vector<double> x, const NmBounds& b) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], b.lo[i], b.hi[i]);
  return x;
}

}  // namespace

NmResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& objective,
                              std::vector<double> x0, const NmBounds& bounds,
                              const NmOptions& options) {
  const std::size_t dim = x0.size();
  if (bounds.lo.size() != dim || bounds.hi.size() != dim)
    throw Error(Errc::kInvalidArg, "bounds dimension mismatch");

  auto eval = [&](const std::vector<double>& x) {
    const double f = objective(x);
    if (!std::isfinite(f)) {
      std::string msg = "objective is not finite at [";
      for (std::size_t i = 0; i < x.size(); ++i)
        msg += (i ? "," : "") + std::to_string(x[i]);
      throw Error(Errc::kInvalidArg, msg + "]");
    }
    return f;
  };

  struct Vertex {
    std::vector<double> x;
    double f;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  x0 = clip_to_box(std::move(x0), bounds);
  simplex.push_back({x0, eval(x0)});
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> x = x0;
    x[i] += options.init_step;
    x = clip_to_box(std::move(x), bounds);
    simplex.push_back({x, eval(x)});
  }

  NmResult result;
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };
  order();

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (simplex.back().f - simplex.front().f < options.tol) {
      result.converged = true;
      break;
    }

    // Centroid of all but the worst vertex.
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t v = 0; v < dim; ++v)
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i];
    for (double& c : centroid) c /= static_cast<double>(dim);

    const Vertex& worst = simplex.back();
    auto blend = [&](double coef) {
      std::vector<double> x(dim);
      for (std::size_t i = 0; i < dim; ++i) x[i] = centroid[i] + coef * (centroid[i] - worst.x[i]);
      return clip_to_box(std::move(x), bounds);
    };

    std::string op;
    const auto xr = blend(options.reflection);
    const double fr = eval(xr);
    if (fr < simplex.front().f) {
      const auto xe = blend(options.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex.back() = {xe, fe};
        op = "expand";
      } else {
        simplex.back() = {xr, fr};
        op = "reflect";
      }
    } else if (fr < simplex[dim - 1].f) {
      simplex.back() = {xr, fr};
      op = "reflect";
    } else {
      const bool outside = fr < worst.f;
      const auto xc = blend(outside ? options.contraction : -options.contraction);
      const double fc = eval(xc);
      if (fc < std::min(fr, worst.f)) {
        simplex.back() = {xc, fc};
        op = "contract";
      } else {
        for (std::size_t v = 1; v <= dim; ++v) {
          std::vector<double> x(dim);
          for (std::size_t i = 0; i < dim; ++i)
            x[i] = simplex[0].x[i] + options.shrink * (simplex[v].x[i] - simplex[0].x[i]);
          x = clip_to_box(std::move(x), bounds);
          simplex[v] = {x, eval(x)};
        }
        op = "shrink";
      }
    }
    order();
    result.trace.push_back({iter + 1, op, simplex.front().f});
  }

  result.best_x = simplex.front().x;
  result.best_f = simplex.front().f;
  result.iterations = iter;
  return result;
}

std::vector<double> speed_vector_from_table(const MetricIISpeeds& t) {
  std::vector<double> v;
  v.reserve(1 + kRoadTypeCount);
  v.push_back(t.junction_delay_s);
  for (const double s : t.mph) v.push_back(s);
  return v;
}

MetricIISpeeds table_from_speed_vector(std::span<const double> v) {
  if (v.size() != 1 + kRoadTypeCount) throw Error(Errc::kInvalidArg, "speed vector needs 10 values");
  MetricIISpeeds t;
  t.junction_delay_s = v[0];
  for (std::size_t i = 0; i < kRoadTypeCount; ++i) t.mph[i] = v[1 + i];
  return t;
}

NmBounds calibration_bounds(const MetricIISpeeds& initial) {
  NmBounds b;
  b.lo.push_back(0.0);
  b.hi.push_back(30.0);
  for (const double s : initial.mph) {
    b.lo.push_back(std::max(0.5, s - 20.0));
    b.hi.push_back(s + 20.0);
  }
  return b;
}

double corpus_objective(const RoadNetwork& net, const SpeedModel& model,
                        std::span<const CorpusEntry> corpus, const MetricIISpeeds& table,
                        int threads) {
  if (corpus.empty()) throw Error(Errc::kInvalidArg, "calibration corpus is empty");
  std::vector<double> scores(corpus.size(), 0.0);
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const CorpusEntry& e = corpus[i];
    RouteRequest req;
    req.origin = e.origin;
    req.destination = e.destination;
    req.vehicle = e.vehicle;
    req.departure = e.departure;
    req.metric = Metric::kII;
    req.metric_ii_table = &table;
    try {
      const RoutePrediction pred = shortest_route(net, model, req);
      scores[i] = path_coincidence(net, e.actual_links, pred.links).whole;
    } catch (const Error&) {
      scores[i] = 0.0;  // routing failures fold into the objective
    }
  });
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(corpus.size());
}

CalibrationReport calibrate_metric_ii(const RoadNetwork& net, const SpeedModel& model,
                                      std::span<const CorpusEntry> corpus,
                                      const MetricIISpeeds& initial, const NmOptions& options,
                                      int threads) {
  CalibrationReport report;
  report.initial_table = initial;
  report.initial_objective = corpus_objective(net, model, corpus, initial, threads);

  const auto objective = [&](std::span<const double> x) {
    return -corpus_objective(net, model, corpus, table_from_speed_vector(x), threads);
  };
  const NmResult nm = nelder_mead_minimize(objective, speed_vector_from_table(initial),
                                           calibration_bounds(initial), options);

  report.final_table = table_from_speed_vector(nm.best_x);
  report.final_objective = -nm.best_f;
  report.iterations = nm.iterations;
  report.converged = nm.converged;
  report.trace = nm.trace;
  for (auto& row : report.trace) row.best_f = -row.best_f;  // back to coincidence
  return report;
}

std::vector<CorpusEntry> parse_corpus_csv(const std::string& text) {
  std::vector<CorpusEntry> out;
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
    if (f.size() != 8)
      throw Error(Errc::kParse, "corpus row " + std::to_string(row_no) + ": expected 8 fields");
    CorpusEntry e;
    e.journey_id = std::string(f[0]);
    auto num = [&](std::string_view s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc())
        throw Error(Errc::kParse, "corpus row " + std::to_string(row_no) + ": bad number");
      return v;
    };
    e.origin = {num(f[1]), num(f[2])};
    e.destination = {num(f[3]), num(f[4])};
    const auto vc = vehicle_class_from_name(f[5]);
    if (!vc)
      throw Error(Errc::kParse, "corpus row " + std::to_string(row_no) + ": bad vehicle class");
    e.vehicle = *vc;
    const auto ts = parse_rfc3339(f[6]);
    if (!ts) throw Error(Errc::kParse, "corpus row " + std::to_string(row_no) + ": bad timestamp");
    e.departure = *ts;
    for (const auto part : split_fields(f[7], '|')) {
      if (part.empty()) continue;
      LinkId id = 0;
      const auto res = std::from_chars(part.data(), part.data() + part.size(), id);
      if (res.ec != std::errc())
        throw Error(Errc::kParse, "corpus row " + std::to_string(row_no) + ": bad link id");
      e.actual_links.push_back(id);
    }
    if (e.actual_links.empty())
      throw Error(Errc::kParse, "corpus row " + std::to_string(row_no) + ": empty link path");
    out.push_back(std::move(e));
  }
  return out;
}

std::string corpus_to_csv(std::span<const CorpusEntry> corpus) {
  std::string out =
      "journey_id,origin_lat,origin_lon,dest_lat,dest_lon,vehicle,departure_utc,links\n";
  for (const auto& e : corpus) {
    out += e.journey_id;
    out += ',';
    out += format_double(e.origin.lat, 7);
    out += ',';
    out += format_double(e.origin.lon, 7);
    out += ',';
    out += format_double(e.destination.lat, 7);
    out += ',';
    out += format_double(e.destination.lon, 7);
    out += ',';
    out += vehicle_class_name(e.vehicle);
    out += ',';
    out += format_rfc3339(e.departure);
    out += ',';
    for (std::size_t i = 0; i < e.actual_links.size(); ++i) {
      if (i) out += '|';
      out += std::to_string(e.actual_links[i]);
    }
    out += '\n';
  }
  return out;
}

std::string calibration_report_json(const CalibrationReport& report) {
  nlohmann::json j;
  auto table_json = [](const MetricIISpeeds& t) {
    nlohmann::json e;
    for (std::size_t i = 0; i < kRoadTypeCount; ++i)
      e[std::string(road_type_name(static_cast<RoadType>(i)))] = t.mph[i];
    e["junction_delay_s"] = t.junction_delay_s;
    return e;
  };
  j["initial_table"] = table_json(report.initial_table);
  j["final_table"] = table_json(report.final_table);
  j["initial_objective"] = report.initial_objective;
  j["final_objective"] = report.final_objective;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& row : report.trace)
    trace.push_back({{"iteration", row.iteration}, {"op", row.operation}, {"best", row.best_f}});
  j["trace"] = std::move(trace);
  return j.dump(2) + "\n";
}

}  // namespace blrn
