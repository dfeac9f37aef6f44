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

#include "blrn/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "blrn/errors.hpp"
#include "blrn/io.hpp"

namespace blrn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Bounded one-to-many Dijkstra on link lengths. Returns node -> distance for
// every node settled within the cutoff, optionally with predecessor links.
void bounded_dijkstra(const RoadNetwork& net, NodeId source, double cutoff_m,
                      std::unordered_map<NodeId, double>& dist,
                      std::unordered_map<NodeId, LinkId>* pred = nullptr) {
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist.clear();
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    const auto it = dist.find(u);
    if (it == dist.end() || d > it->second) continue;
    for (const LinkId lid : net.out_links(u)) {
      const RoadLink& l = net.link(lid);
      const double nd = d + l.length_m;
      if (nd > cutoff_m) continue;
      const auto vit = dist.find(l.to);
      if (vit == dist.end() || nd < vit->second) {
        dist[l.to] = nd;
        if (pred) (*pred)[l.to] = lid;
        heap.push({nd, l.to});
      }
    }
  }
}

// Links forming the shortest node path source -> target within cutoff.
std::optional<std::vector<LinkId>> shortest_link_path(const RoadNetwork& net, NodeId source,
                                                      NodeId target, double cutoff_m) {
  if (source == target) return std::vector<LinkId>{};
  std::unordered_map<NodeId, double> dist;
  std::unordered_map<NodeId, LinkId> pred;
  bounded_dijkstra(net, source, cutoff_m, dist, &pred);
  if (dist.find(target) == dist.end()) return std::nullopt;
  std::vector<LinkId> path;
  NodeId n = target;
  while (n != source) {
    const LinkId lid = pred.at(n);
    path.push_back(lid);
    n = net.link(lid).from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

struct Stage {
  const AvlsRecord* fix;
  std::vector<Candidate> candidates;
};

struct ViterbiResult {
  std::vector<int> chosen;  // candidate index per stage
  double score = 0.0;
  int broken_stage = -1;  // stage with no feasible inbound transition
};

double emission_logp(double dist_m, double sigma_m) {
  const double r = dist_m / sigma_m;
  return -0.5 * r * r;
}

ViterbiResult run_viterbi(const RoadNetwork& net, const std::vector<Stage>& stages,
                          const MatchParams& params) {
  ViterbiResult result;
  const std::size_t n = stages.size();
  std::vector<std::vector<double>> score(n);
  std::vector<std::vector<int>> back(n);

  score[0].resize(stages[0].candidates.size());
  back[0].assign(stages[0].candidates.size(), -1);
  for (std::size_t j = 0; j < stages[0].candidates.size(); ++j)
    score[0][j] = emission_logp(stages[0].candidates[j].emission_dist_m, params.sigma_m);

  for (std::size_t t = 1; t < n; ++t) {
    const auto& prev = stages[t - 1];
    const auto& cur = stages[t];
    const double gc = haversine_m(prev.fix->position, cur.fix->position);
    const double cutoff = gc * params.cutoff_factor + params.cutoff_slack_m;

    score[t].assign(cur.candidates.size(), kNegInf);
    back[t].assign(cur.candidates.size(), -1);

    // One bounded search per previous candidate covers all current ones.
    for (std::size_t i = 0; i < prev.candidates.size(); ++i) {
      if (score[t - 1][i] == kNegInf) continue;
      const Candidate& a = prev.candidates[i];
      const RoadLink& la = net.link(a.link);
      std::unordered_map<NodeId, double> dist;
      bounded_dijkstra(net, la.to, cutoff, dist);
      for (std::size_t j = 0; j < cur.candidates.size(); ++j) {
        const Candidate& b = cur.candidates[j];
        double route = std::numeric_limits<double>::infinity();
        if (a.link == b.link && b.offset_m >= a.offset_m) route = b.offset_m - a.offset_m;
        const auto it = dist.find(net.link(b.link).from);
        if (it != dist.end())
          route = std::min(route, (la.length_m - a.offset_m) + it->second + b.offset_m);
        if (!(route <= cutoff)) continue;
        const double trans = -std::abs(route - gc) / params.beta_m;
        const double cand =
            score[t - 1][i] + trans + emission_logp(b.emission_dist_m, params.sigma_m);
        if (cand > score[t][j]) {
          score[t][j] = cand;
          back[t][j] = static_cast<int>(i);
        }
      }
    }

    bool any = false;
    for (const double s : score[t]) any = any || s != kNegInf;
    if (!any) {
      result.broken_stage = static_cast<int>(t);
      return result;
    }
  }

  // Backtrack from the best final state; ties go to the smaller index.
  int best = 0;
  for (std::size_t j = 1; j < score[n - 1].size(); ++j)
    if (score[n - 1][j] > score[n - 1][best]) best = static_cast<int>(j);
  result.score = score[n - 1][best];
  result.chosen.assign(n, -1);
  int cur = best;
  for (std::size_t t = n; t-- > 0;) {
    result.chosen[t] = cur;
    cur = back[t][cur];
  }
  return result;
}

}  // namespace

std::vector<Candidate> match_candidates(const RoadNetwork& net, const LatLon& pos,
                                        const MatchParams& params) {
  std::vector<Candidate> out;
  for (const LinkId id : net.links_in_box(pos, params.cand_radius_m)) {
    const PolylineHit hit = project_to_polyline(net.link(id).geometry, pos);
    if (hit.distance_m <= params.cand_radius_m)
      out.push_back({id, hit.offset_m, hit.point, hit.distance_m});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.emission_dist_m != b.emission_dist_m) return a.emission_dist_m < b.emission_dist_m;
    return a.link < b.link;
  });
  if (out.size() > static_cast<std::size_t>(params.max_candidates))
    out.resize(static_cast<std::size_t>(params.max_candidates));
  return out;
}

std::optional<double> route_distance(const RoadNetwork& net, const Candidate& a,
                                     const Candidate& b, double cutoff_m) {
  double route = std::numeric_limits<double>::infinity();
  if (a.link == b.link && b.offset_m >= a.offset_m) route = b.offset_m - a.offset_m;
  const RoadLink& la = net.link(a.link);
  std::unordered_map<NodeId, double> dist;
  bounded_dijkstra(net, la.to, cutoff_m, dist);
  const auto it = dist.find(net.link(b.link).from);
  if (it != dist.end())
    route = std::min(route, (la.length_m - a.offset_m) + it->second + b.offset_m);
  if (!(route <= cutoff_m)) return std::nullopt;
  return route;
}

namespace {

// Expands the winning candidate chain into route elements, interpolating
// entry/exit instants by distance at constant speed within each fix interval.
std::optional<MatchedRoute> expand_route(const RoadNetwork& net, const std::vector<Stage>& stages,
                                         const std::vector<int>& chosen,
                                         const MatchParams& params) {
  MatchedRoute route;
  std::vector<RouteElement>& elems = route.elements;
  constexpr double kOffsetEps = 1e-4;  // metres

  auto add_piece = [&](LinkId link, double from_off, double to_off, double t_from, double t_to) {
    if (to_off - from_off <= 0.0) return;
    if (!elems.empty() && elems.back().link == link &&
        std::abs(elems.back().exit_offset_m - from_off) < kOffsetEps) {
      elems.back().exit_offset_m = to_off;
      elems.back().exit_s = t_to;
      return;
    }
    elems.push_back({link, t_from, t_to, from_off, to_off});
  };

  for (std::size_t t = 0; t + 1 < stages.size(); ++t) {
    const Candidate& a = stages[t].candidates[static_cast<std::size_t>(chosen[t])];
    const Candidate& b = stages[t + 1].candidates[static_cast<std::size_t>(chosen[t + 1])];
    const double t0 = static_cast<double>(stages[t].fix->timestamp);
    const double t1 = static_cast<double>(stages[t + 1].fix->timestamp);
    const double gc = haversine_m(stages[t].fix->position, stages[t + 1].fix->position);
    const double cutoff = gc * params.cutoff_factor + params.cutoff_slack_m;

    // Piece list covering a -> b.
    struct Piece {
      LinkId link;
      double from_off, to_off;
    };
    std::vector<Piece> pieces;
    const RoadLink& la = net.link(a.link);

    double direct = std::numeric_limits<double>::infinity();
    if (a.link == b.link && b.offset_m >= a.offset_m) direct = b.offset_m - a.offset_m;
    double via = std::numeric_limits<double>::infinity();
    const auto node_path = shortest_link_path(net, la.to, net.link(b.link).from, cutoff);
    if (node_path) {
      via = la.length_m - a.offset_m + b.offset_m;
      for (const LinkId lid : *node_path) via += net.link(lid).length_m;
    }
    if (direct <= via) {
      if (direct == std::numeric_limits<double>::infinity()) return std::nullopt;
      pieces.push_back({a.link, a.offset_m, b.offset_m});
    } else {
      pieces.push_back({a.link, a.offset_m, la.length_m});
      for (const LinkId lid : *node_path) pieces.push_back({lid, 0.0, net.link(lid).length_m});
      pieces.push_back({b.link, 0.0, b.offset_m});
    }

    double total = 0.0;
    for (const auto& p : pieces) total += p.to_off - p.from_off;

    if (total <= kOffsetEps) {
      // Stationary interval: time accrues on the current element.
      if (!elems.empty()) elems.back().exit_s = t1;
      continue;
    }
    const double dt = t1 - t0;
    double consumed = 0.0;
    double tcur = t0;
    for (const auto& p : pieces) {
      const double len = p.to_off - p.from_off;
      if (len <= 0.0) continue;
      consumed += len;
      const double tnext = (consumed >= total) ? t1 : t0 + dt * (consumed / total);
      add_piece(p.link, p.from_off, p.to_off, tcur, tnext);
      tcur = tnext;
    }
  }

  if (elems.empty()) return std::nullopt;

  route.fix_assignments.reserve(stages.size());
  for (std::size_t t = 0; t < stages.size(); ++t) {
    const Candidate& c = stages[t].candidates[static_cast<std::size_t>(chosen[t])];
    route.fix_assignments.emplace_back(c.link, c.offset_m);
  }
  return route;
}

}  // namespace

MatchOutcome match_trace(const RoadNetwork& net, const Trace& trace, const MatchParams& params) {
  if (!params.valid()) throw Error(Errc::kInvalidArg, "invalid match params");
  if (trace.fixes.size() < 2) return {std::nullopt, "degenerate"};

  std::vector<const AvlsRecord*> fixes;
  fixes.reserve(trace.fixes.size());
  for (const auto& f : trace.fixes) fixes.push_back(&f);

  std::size_t dropped = 0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<Stage> stages;
    stages.reserve(fixes.size());
    for (const AvlsRecord* fix : fixes) {
      Stage s;
      s.fix = fix;
      s.candidates = match_candidates(net, fix->position, params);
      if (s.candidates.empty()) return {std::nullopt, "no candidate"};
      stages.push_back(std::move(s));
    }

    bool spread = false;
    for (const auto& s : stages)
      spread = spread || haversine_m(stages[0].candidates[0].point, s.candidates[0].point) > 0.5;
    if (!spread) return {std::nullopt, "degenerate"};

    const ViterbiResult vit = run_viterbi(net, stages, params);
    if (vit.broken_stage >= 0) {
      if (attempt == 1 || fixes.size() <= 2) return {std::nullopt, "broken chain"};
      fixes.erase(fixes.begin() + vit.broken_stage);
      ++dropped;
      continue;
    }

    auto route = expand_route(net, stages, vit.chosen, params);
    if (!route) return {std::nullopt, "degenerate"};
    route->journey_id = trace.journey_id;
    route->vehicle = trace.vehicle;
    route->fixes_dropped = dropped;
    route->score = vit.score;
    return {std::move(route), ""};
  }
  return {std::nullopt, "broken chain"};
}

std::vector<MatchOutcome> match_traces(const RoadNetwork& net, std::span<const Trace> traces,
                                       const MatchParams& params, int threads) {
  std::vector<MatchOutcome> out(traces.size());
  parallel_for(traces.size(), threads,
               [&](std::size_t i) { out[i] = match_trace(net, traces[i], params); });
  return out;
}

std::vector<LinkSpeedObservation> extract_speeds(const MatchedRoute& route, const RoadNetwork& net,
                                                 double min_traversal_s, std::size_t* skipped) {
  std::vector<LinkSpeedObservation> out;
  constexpr double kOffsetEps = 1e-4;
  for (const auto& e : route.elements) {
    const RoadLink& l = net.link(e.link);
    const bool full =
        e.entry_offset_m <= kOffsetEps && e.exit_offset_m >= l.length_m - kOffsetEps;
    if (!full) continue;
    const double dt = e.exit_s - e.entry_s;
    if (dt < min_traversal_s) {
      if (skipped) ++*skipped;
      continue;
    }
    out.push_back({e.link, route.vehicle, static_cast<std::int64_t>(e.entry_s),
                   mps_to_mph(l.length_m / dt)});
  }
  return out;
}

std::vector<CoverageRow> coverage_by_road_type(std::span<const MatchedRoute> routes,
                                               const RoadNetwork& net) {
  std::vector<std::vector<bool>> used(kRoadTypeCount);
  std::vector<CoverageRow> rows(kRoadTypeCount);
  for (std::size_t i = 0; i < kRoadTypeCount; ++i) {
    rows[i].road_type = static_cast<RoadType>(i);
    used[i].assign(net.link_count(), false);
  }
  for (LinkId id = 0; id < net.link_count(); ++id)
    ++rows[static_cast<std::size_t>(net.link(id).road_type)].links_total;
  for (const auto& r : routes)
    for (const auto& e : r.elements) {
      const auto t = static_cast<std::size_t>(net.link(e.link).road_type);
      if (!used[t][e.link]) {
        used[t][e.link] = true;
        ++rows[t].links_used;
      }
    }
  for (auto& row : rows)
    row.fraction = row.links_total == 0
                       ? 0.0
                       : static_cast<double>(row.links_used) / static_cast<double>(row.links_total);
  return rows;
}

}  // namespace blrn
