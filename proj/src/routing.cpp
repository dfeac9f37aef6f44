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

#include "blrn/routing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <queue>

#include "blrn/errors.hpp"

namespace blrn {

double bias_correct(double t_beta_s) {
  return std::max(0.0, t_beta_s / kBiasSlope - kBiasInterceptS);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEndEps = 1e-6;  // metres; offsets this close to an end snap to the node

struct MidAnchor {
  LinkId link = kInvalidLink;
  double offset_m = 0.0;
};

struct Anchors {
  std::vector<NodeId> nodes;
  std::vector<MidAnchor> mids;
};

Anchors make_anchors(const RoadNetwork& net, const RoadNetwork::NearestHit& hit) {
  Anchors a;
  const RoadLink& l = net.link(hit.link);
  if (hit.offset_m <= kEndEps) {
    a.nodes.push_back(l.from);
  } else if (hit.offset_m >= l.length_m - kEndEps) {
    a.nodes.push_back(l.to);
  } else {
    a.mids.push_back({hit.link, hit.offset_m});
    if (const auto twin = net.reverse_of(hit.link)) {
      const RoadLink& t = net.link(*twin);
      a.mids.push_back({*twin, std::max(0.0, t.length_m - hit.offset_m)});
    }
  }
  return a;
}

// Per-query cost view: travel seconds per link at the frozen departure bin,
// plus the junction delay folded into every link (one delay is subtracted
// from the final total, which makes the delay count interior nodes exactly).
class CostView {
 public:
  CostView(const RoadNetwork& net, const SpeedModel& model, Metric metric, VehicleClass vehicle,
           std::int64_t departure, const MetricIISpeeds* table)
      : net_(net),
        model_(model),
        metric_(metric),
        vehicle_(vehicle),
        departure_(departure),
        table_(table),
        delay_s_(metric == Metric::kII
                     ? (table ? table->junction_delay_s : model.metric_ii.junction_delay_s)
                     : 0.0),
        speed_mps_(net.link_count(), -1.0) {}

  double delay_s() const { return delay_s_; }

  double speed_mps(LinkId l) const {
    double& cached = speed_mps_[l];
    if (cached < 0.0)
      cached = mph_to_mps(link_speed(net_, model_, metric_, l, vehicle_, departure_, table_).mph);
    return cached;
  }

  // Augmented cost: full-link travel time plus one junction delay.
  double link_cost(LinkId l) const { return net_.link(l).length_m / speed_mps(l) + delay_s_; }
  double stretch_cost(LinkId l, double meters) const { return meters / speed_mps(l) + delay_s_; }

 private:
  const RoadNetwork& net_;
  const SpeedModel& model_;
  Metric metric_;
  VehicleClass vehicle_;
  std::int64_t departure_;
  const MetricIISpeeds* table_;
  double delay_s_;
  mutable std::vector<double> speed_mps_;
};

void dijkstra(const RoadNetwork& net, const CostView& cost,
              const std::vector<std::pair<NodeId, double>>& seeds, bool backward,
              std::vector<double>& dist) {
  dist.assign(net.node_count(), kInf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (const auto& [n, d] : seeds) {
    if (d < dist[n]) {
      dist[n] = d;
      heap.push({d, n});
    }
  }
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    const auto links = backward ? net.in_links(u) : net.out_links(u);
    for (const LinkId lid : links) {
      const NodeId v = backward ? net.link(lid).from : net.link(lid).to;
      const double nd = d + cost.link_cost(lid);
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.push({nd, v});
      }
    }
  }
}

struct PathElement {
  LinkId link;
  double from_off, to_off;
};

}  // namespace

RoutePrediction shortest_route(const RoadNetwork& net, const SpeedModel& model,
                               const RouteRequest& request) {
  if (request.metric == Metric::kHybrid) return hybrid_route(net, model, request);

  const auto o_hit = net.nearest_link(request.origin);
  const auto d_hit = net.nearest_link(request.destination);
  if (!o_hit || !d_hit) throw Error(Errc::kSnap, "no road link to snap to (empty network)");
  auto snap_error = [](const char* which, double dist) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s snaps %.1f m from the nearest link (max %.0f m)", which,
                  dist, kSnapMaxM);
    return Error(Errc::kSnap, buf);
  };
  if (o_hit->distance_m > kSnapMaxM) throw snap_error("origin", o_hit->distance_m);
  if (d_hit->distance_m > kSnapMaxM) throw snap_error("destination", d_hit->distance_m);
  if (haversine_m(o_hit->point, d_hit->point) < 1e-3)
    throw Error(Errc::kInvalidArg, "origin and destination are identical after snapping");

  const Anchors origin = make_anchors(net, *o_hit);
  const Anchors dest = make_anchors(net, *d_hit);
  const CostView cost(net, model, request.metric, request.vehicle, request.departure,
                      request.metric_ii_table);

  // Forward / backward node distances in augmented cost.
  std::vector<std::pair<NodeId, double>> fwd_seeds;
  for (const NodeId n : origin.nodes) fwd_seeds.emplace_back(n, 0.0);
  for (const auto& m : origin.mids) {
    const RoadLink& l = net.link(m.link);
    fwd_seeds.emplace_back(l.to, cost.stretch_cost(m.link, l.length_m - m.offset_m));
  }
  std::vector<std::pair<NodeId, double>> bwd_seeds;
  for (const NodeId n : dest.nodes) bwd_seeds.emplace_back(n, 0.0);
  for (const auto& m : dest.mids)
    bwd_seeds.emplace_back(net.link(m.link).from, cost.stretch_cost(m.link, m.offset_m));

  std::vector<double> fwd, bwd;
  dijkstra(net, cost, fwd_seeds, false, fwd);
  dijkstra(net, cost, bwd_seeds, true, bwd);

  // Optimal augmented total: best node-path completion or same-link stretch.
  double total = kInf;
  for (const NodeId n : origin.nodes) total = std::min(total, bwd[n]);
  for (const auto& m : origin.mids) {
    const RoadLink& l = net.link(m.link);
    total = std::min(total, cost.stretch_cost(m.link, l.length_m - m.offset_m) + bwd[l.to]);
  }
  struct Direct {
    LinkId link;
    double from_off, to_off;
    double cost;
  };
  std::vector<Direct> directs;
  for (const auto& om : origin.mids)
    for (const auto& dm : dest.mids)
      if (om.link == dm.link && dm.offset_m >= om.offset_m - kEndEps) {
        const double c = cost.stretch_cost(om.link, std::max(0.0, dm.offset_m - om.offset_m));
        directs.push_back({om.link, om.offset_m, dm.offset_m, c});
        total = std::min(total, c);
      }
  if (!std::isfinite(total)) throw Error(Errc::kNoRoute, "destination unreachable from origin");

  const double eps = 1e-9 * std::max(1.0, total);
  auto tight = [&](double value) { return std::abs(value - total) <= eps; };

  // Lexicographically smallest link sequence among optimal paths: greedy walk
  // over tight options, smaller link id first, finishing beats continuing on
  // the same id.
  std::vector<PathElement> elems;
  bool done = false;

  // Choose the starting option across all origin anchors.
  struct Start {
    LinkId first_link;
    bool finish;       // complete path in one stretch
    bool from_node;    // node anchor start (first link is a full link)
    NodeId node;       // for node starts
    double from_off, to_off;
  };
  std::optional<Start> start;
  auto consider_start = [&](const Start& s) {
    if (!start || s.first_link < start->first_link ||
        (s.first_link == start->first_link && s.finish && !start->finish))
      start = s;
  };
  for (const auto& d : directs)
    if (tight(d.cost)) consider_start({d.link, true, false, 0, d.from_off, d.to_off});
  for (const auto& m : origin.mids) {
    const RoadLink& l = net.link(m.link);
    const double c0 = cost.stretch_cost(m.link, l.length_m - m.offset_m);
    if (std::isfinite(bwd[l.to]) && tight(c0 + bwd[l.to]))
      consider_start({m.link, false, false, 0, m.offset_m, l.length_m});
  }
  for (const NodeId n : origin.nodes) {
    // Finishing straight onto the destination's partial link.
    for (const auto& dm : dest.mids)
      if (net.link(dm.link).from == n && tight(cost.stretch_cost(dm.link, dm.offset_m)))
        consider_start({dm.link, true, true, n, 0.0, dm.offset_m});
    for (const LinkId lid : net.out_links(n))
      if (std::isfinite(bwd[net.link(lid).to]) && tight(cost.link_cost(lid) + bwd[net.link(lid).to]))
        consider_start({lid, false, true, n, 0.0, net.link(lid).length_m});
  }
  if (!start) throw Error(Errc::kNoRoute, "destination unreachable from origin");

  elems.push_back({start->first_link, start->from_off, start->to_off});
  NodeId u = net.link(start->first_link).to;
  double consumed = cost.stretch_cost(start->first_link, start->to_off - start->from_off);
  done = start->finish;

  while (!done) {
    // Finish here via a destination anchor?
    LinkId best_next = kInvalidLink;
    bool best_is_finish = false;
    double best_to_off = 0.0;
    for (const NodeId n : dest.nodes)
      if (n == u && tight(consumed)) {
        done = true;
        break;
      }
    if (done) break;
    for (const auto& dm : dest.mids) {
      if (net.link(dm.link).from != u) continue;
      if (!tight(consumed + cost.stretch_cost(dm.link, dm.offset_m))) continue;
      if (dm.link < best_next || (dm.link == best_next && !best_is_finish)) {
        best_next = dm.link;
        best_is_finish = true;
        best_to_off = dm.offset_m;
      }
    }
    for (const LinkId lid : net.out_links(u)) {
      if (!std::isfinite(bwd[net.link(lid).to])) continue;
      if (!tight(consumed + cost.link_cost(lid) + bwd[net.link(lid).to])) continue;
      if (lid < best_next) {
        best_next = lid;
        best_is_finish = false;
      }
      break;  // out_links are sorted; the first tight one is the smallest
    }
    if (best_next == kInvalidLink)
      throw Error(Errc::kInternal, "optimal path reconstruction lost the trail");
    if (best_is_finish) {
      elems.push_back({best_next, 0.0, best_to_off});
      done = true;
    } else {
      elems.push_back({best_next, 0.0, net.link(best_next).length_m});
      consumed += cost.link_cost(best_next);
      u = net.link(best_next).to;
    }
  }

  RoutePrediction out;
  out.metric = request.metric;
  for (const auto& e : elems) {
    RouteLeg leg;
    leg.link = e.link;
    leg.meters = e.to_off - e.from_off;
    leg.seconds = leg.meters / cost.speed_mps(e.link);
    leg.partial = e.from_off > kEndEps || e.to_off < net.link(e.link).length_m - kEndEps;
    out.legs.push_back(leg);
    out.links.push_back(e.link);
    out.distance_m += leg.meters;
    out.t_beta_s += leg.seconds;
    const auto lookup = link_speed(net, model, request.metric, e.link, request.vehicle,
                                   request.departure, request.metric_ii_table);
    ++out.provenance_counts[std::string(lookup.provenance)];
  }
  out.junctions = static_cast<int>(out.legs.size()) - 1;
  out.t_beta_s += cost.delay_s() * out.junctions;
  out.t_chi_s = request.metric == Metric::kV ? bias_correct(out.t_beta_s) : out.t_beta_s;
  return out;
}

RoutePrediction hybrid_route(const RoadNetwork& net, const SpeedModel& model,
                             const RouteRequest& request) {
  const MetricIISpeeds nm = nelder_mead_metric_ii();
  RouteRequest selection = request;
  selection.metric = Metric::kII;
  if (!selection.metric_ii_table) selection.metric_ii_table = &nm;

  RoutePrediction out = shortest_route(net, model, selection);

  // Same links, times from Metric V along the fixed sequence; no junction
  // delay, the data-derived speeds already embody junction slowdowns.
  out.metric = Metric::kHybrid;
  out.t_beta_s = 0.0;
  out.provenance_counts.clear();
  for (auto& leg : out.legs) {
    const auto lookup =
        link_speed(net, model, Metric::kV, leg.link, request.vehicle, request.departure);
    leg.seconds = leg.meters / mph_to_mps(lookup.mph);
    out.t_beta_s += leg.seconds;
    ++out.provenance_counts[std::string(lookup.provenance)];
  }
  out.t_chi_s = bias_correct(out.t_beta_s);
  return out;
}

double estimate_on_fixed_path(const RoadNetwork& net, const SpeedModel& model,
                              std::span<const LinkId> links, VehicleClass vehicle,
                              std::int64_t departure, Metric metric,
                              const MetricIISpeeds* metric_ii_table) {
  if (links.empty()) return 0.0;
  for (std::size_t i = 0; i + 1 < links.size(); ++i)
    if (net.link(links[i]).to != net.link(links[i + 1]).from)
      throw Error(Errc::kInvalidArg, "links do not form a connected directed path (at position " +
                                         std::to_string(i) + ")");
  double total = 0.0;
  for (const LinkId l : links) {
    const auto lookup = link_speed(net, model, metric, l, vehicle, departure, metric_ii_table);
    total += net.link(l).length_m / mph_to_mps(lookup.mph);
  }
  if (metric == Metric::kII) {
    const double delay =
        metric_ii_table ? metric_ii_table->junction_delay_s : model.metric_ii.junction_delay_s;
    total += delay * static_cast<double>(links.size() - 1);
  }
  return total;
}

}  // namespace blrn
