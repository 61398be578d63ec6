#include "namo/svg_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace namo::svg {

using geom::kEps;

NodeId SemanticGraph::add_node(GraphNode node) {
  node.id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(node);
  adjacency_.emplace_back();
  return node.id;
}

void SemanticGraph::add_edge(NodeId a, NodeId b) {
  const double len = geom::distance(nodes_.at(a).position, nodes_.at(b).position);
  edges_.push_back({a, b, len});
  adjacency_[a].push_back({b, len});
  adjacency_[b].push_back({a, len});
}

std::size_t SemanticGraph::passage_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const GraphNode& n) { return n.kind == NodeKind::Passage; }));
}

double passage_gamma(double first_mass, double second_mass) { return first_mass / (first_mass + second_mass); }

Point2 interpolate_passage_point(Point2 v_first, Point2 v_second, double first_mass, double second_mass) {
  return v_first + (v_second - v_first) * passage_gamma(first_mass, second_mass);
}

double passage_cost_from_distances(double d_first, double first_mass, double d_second, double second_mass,
                                   double r) {
  return std::max(0.0, 1.0 - d_first / r) * first_mass + std::max(0.0, 1.0 - d_second / r) * second_mass;
}

double passage_node_cost(Point2 node, const Polygon& first_hull, double first_mass, const Polygon& second_hull,
                         double second_mass, double r) {
  return passage_cost_from_distances(geom::point_to_polygon_distance(node, first_hull), first_mass,
                                     geom::point_to_polygon_distance(node, second_hull), second_mass, r);
}

namespace {

Polygon hull_of(const Obstacle& o) { return geom::convex_hull(o.world_shape().vertices()); }

struct Prepared {
  Polygon hull;
  Polygon inflated;
  double mass;
  ObstacleId id;
};

std::vector<Prepared> prepare(std::span<const Obstacle> obstacles, double r) {
  std::vector<Prepared> out;
  out.reserve(obstacles.size());
  for (const auto& o : obstacles) {
    Polygon hull = hull_of(o);
    Polygon inflated = geom::inflate(hull, r);
    out.push_back({std::move(hull), std::move(inflated), o.mass, o.id});
  }
  return out;
}

bool qualifies(const Prepared& a, const Prepared& b, double r, double max_mass) {
  if (a.mass > max_mass && b.mass > max_mass) return false;
  if (!a.inflated.bounds().overlaps(b.inflated.bounds())) return false;
  return geom::min_distance(a.hull, b.hull) < 2.0 * r;
}

struct Crossing {
  Point2 on_first;
  Point2 on_second;
  double length;
};

// Crossing of the gap along from -> to, where `from` lies on `from_hull`.
std::optional<Crossing> gap_crossing(Point2 from, Point2 to, const Polygon& from_hull, const Polygon& to_hull) {
  if (geom::distance(from, to) <= kEps) return Crossing{from, to, 0.0};
  double f0, f1, t0, t1;
  if (!geom::clip_segment_convex(from, to, from_hull, f0, f1)) f1 = 0.0;
  if (!geom::clip_segment_convex(from, to, to_hull, t0, t1)) return std::nullopt;
  if (t0 < f1 - 1e-12) return std::nullopt;  // hulls overlap along this line
  const Point2 d = to - from;
  const Point2 exit = from + d * f1;
  const Point2 entry = from + d * t0;
  return Crossing{exit, entry, geom::distance(exit, entry)};
}

std::vector<Crossing> stage_one_crossings(const Polygon& a, const Polygon& b, double r) {
  std::vector<Crossing> all;
  auto from_side = [&](const Polygon& from_hull, const Polygon& to_hull, bool from_is_first) {
    for (const auto& v : from_hull.vertices()) {
      std::vector<Point2> targets = to_hull.vertices();
      targets.push_back(geom::closest_point_on_boundary(v, to_hull));
      for (const auto& w : targets) {
        auto c = gap_crossing(v, w, from_hull, to_hull);
        if (!c) continue;
        if (!from_is_first) std::swap(c->on_first, c->on_second);
        all.push_back(*c);
      }
    }
  };
  from_side(a, b, true);
  from_side(b, a, false);
  std::vector<Crossing> kept;
  for (const auto& c : all) {
    if (c.length < 2.0 * r) kept.push_back(c);
  }
  return kept;
}

void push_unique(std::vector<Point2>& pts, Point2 p) {
  for (const auto& q : pts) {
    if (geom::distance(p, q) <= 1e-7) return;
  }
  pts.push_back(p);
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> find_passage_pairs(std::span<const Obstacle> obstacles, double r,
                                                                    double max_mass) {
  const auto prepared = prepare(obstacles, r);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    for (std::size_t j = i + 1; j < prepared.size(); ++j) {
      if (qualifies(prepared[i], prepared[j], r, max_mass)) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

namespace {

PassageSet construct_from_hulls(const Polygon& hull_a, double mass_a, ObstacleId id_a, const Polygon& hull_b,
                                double mass_b, ObstacleId id_b, double r, PassageCosting costing) {
  PassageSet set;
  const auto crossings = stage_one_crossings(hull_a, hull_b, r);
  if (crossings.empty()) {
    set.degenerate = true;
    return set;
  }
  std::vector<Point2> side_a, side_b;
  for (const auto& c : crossings) {
    push_unique(side_a, c.on_first);
    push_unique(side_b, c.on_second);
    push_unique(set.nearest_points, c.on_first);
    push_unique(set.nearest_points, c.on_second);
  }

  // Binary costing ignores masses, so gamma is pinned to the midpoint.
  const double gamma = costing == PassageCosting::Weighted ? passage_gamma(mass_a, mass_b) : 0.5;
  auto make_node = [&](Point2 va, Point2 vb, BoundaryKind kind) {
    PassageMeta meta{id_a, id_b, kind, gamma, va + (vb - va) * gamma, 0.5 * (va + vb)};
    GraphNode node;
    node.kind = NodeKind::Passage;
    node.passage = meta;
    if (costing == PassageCosting::Weighted) {
      node.position = meta.weighted_point;
      node.node_cost = passage_node_cost(node.position, hull_a, mass_a, hull_b, mass_b, r);
    } else {
      node.position = meta.midpoint;
      node.node_cost = 0.0;
    }
    set.nodes.push_back(node);
    set.boundaries.push_back({va, vb, mass_a, mass_b, kind});
  };

  std::optional<Polygon> region;
  try {
    region = geom::convex_hull(set.nearest_points);
  } catch (const geom::DegenerateInput&) {
    region.reset();
  }

  if (region) {
    // Side of each region vertex: the hull it lies on.
    const auto& rv = region->vertices();
    std::vector<int> side(rv.size());
    bool ambiguous = false;
    for (std::size_t k = 0; k < rv.size(); ++k) {
      const double da = geom::point_to_polygon_distance(rv[k], hull_a);
      const double db = geom::point_to_polygon_distance(rv[k], hull_b);
      if (std::abs(da - db) <= 1e-7) ambiguous = true;
      side[k] = da < db ? 0 : 1;
    }
    std::optional<std::pair<Point2, Point2>> entry, exit;
    for (std::size_t k = 0; k < rv.size() && !ambiguous; ++k) {
      const std::size_t n = (k + 1) % rv.size();
      if (side[k] == 0 && side[n] == 1 && !entry) entry = {{rv[k], rv[n]}};
      if (side[k] == 1 && side[n] == 0 && !exit) exit = {{rv[n], rv[k]}};
    }
    if (entry && exit) {
      make_node(entry->first, entry->second, BoundaryKind::Entry);
      make_node(exit->first, exit->second, BoundaryKind::Exit);
      return set;
    }
  }

  // Collinear nearest-point set (tip-to-tip or touching hulls): one node on
  // the shortest crossing.
  set.degenerate = true;
  const auto shortest = std::min_element(crossings.begin(), crossings.end(),
                                         [](const Crossing& x, const Crossing& y) { return x.length < y.length; });
  make_node(shortest->on_first, shortest->on_second, BoundaryKind::Entry);
  return set;
}

}  // namespace

PassageSet construct_passage_nodes(const Obstacle& first, const Obstacle& second, double r, PassageCosting costing) {
  return construct_from_hulls(hull_of(first), first.mass, first.id, hull_of(second), second.mass, second.id, r,
                              costing);
}

namespace {

struct NodeProbe {
  std::vector<Point2> probes;         // positions the visibility tests run from
  std::vector<std::size_t> breaches;  // obstacle indices whose margin may be entered
};

bool edge_clear(const NodeProbe& u, const NodeProbe& v, const std::vector<Prepared>& obs) {
  auto breached = [&](std::size_t k) {
    return std::find(u.breaches.begin(), u.breaches.end(), k) != u.breaches.end() ||
           std::find(v.breaches.begin(), v.breaches.end(), k) != v.breaches.end();
  };
  for (const auto& pu : u.probes) {
    for (const auto& pv : v.probes) {
      geom::Aabb seg{{std::min(pu.x, pv.x), std::min(pu.y, pv.y)}, {std::max(pu.x, pv.x), std::max(pu.y, pv.y)}};
      for (std::size_t k = 0; k < obs.size(); ++k) {
        const Polygon& poly = breached(k) ? obs[k].hull : obs[k].inflated;
        if (!seg.overlaps(poly.bounds())) continue;
        if (geom::segment_crosses_interior(pu, pv, poly)) return false;
      }
    }
  }
  return true;
}

bool inside_bounds(const std::optional<geom::Aabb>& bounds, Point2 p) {
  return !bounds || bounds->contains(p);
}

}  // namespace

SemanticGraph build_graph(std::span<const Obstacle> obstacles, Point2 start, Point2 goal,
                          const PlannerParams& params, PassageCosting costing, bool strict_endpoints) {
  if (!(params.margin > 0.0)) throw std::invalid_argument("build_graph: margin must be positive");
  const double r = params.margin;
  const auto obs = prepare(obstacles, r);

  SemanticGraph graph;
  std::vector<NodeProbe> probes;

  auto endpoint = [&](Point2 p, const char* what) {
    NodeProbe probe{{p}, {}};
    for (std::size_t k = 0; k < obs.size(); ++k) {
      if (!obs[k].inflated.strictly_contains(p)) continue;
      const bool movable = obs[k].mass <= params.max_mass;
      if (strict_endpoints && (!movable || obs[k].hull.strictly_contains(p))) {
        throw StartOrGoalBlocked(std::string(what) + " lies inside an inflated non-movable obstacle");
      }
      probe.breaches.push_back(k);
    }
    GraphNode node;
    node.position = p;
    probes.push_back(std::move(probe));
    return graph.add_node(node);
  };
  graph.start_id = endpoint(start, "start");
  graph.goal_id = start == goal ? graph.start_id : endpoint(goal, "goal");

  // Inflated hull vertices that are not swallowed by another inflation.
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (const auto& v : obs[i].inflated.vertices()) {
      if (!inside_bounds(params.bounds, v)) continue;
      bool covered = false;
      for (std::size_t k = 0; k < obs.size() && !covered; ++k) {
        covered = k != i && obs[k].inflated.strictly_contains(v);
      }
      if (covered) continue;
      GraphNode node;
      node.position = v;
      graph.add_node(node);
      probes.push_back({{v}, {}});
    }
  }

  if (costing != PassageCosting::None) {
    for (std::size_t i = 0; i < obs.size(); ++i) {
      for (std::size_t j = i + 1; j < obs.size(); ++j) {
        if (!qualifies(obs[i], obs[j], r, params.max_mass)) continue;
        const auto set = construct_from_hulls(obs[i].hull, obs[i].mass, obs[i].id, obs[j].hull, obs[j].mass,
                                              obs[j].id, r, costing);
        for (auto node : set.nodes) {
          // Both candidate placements must be admissible so that the binary
          // and weighted graphs share one topology.
          const std::vector<Point2> pts{node.passage->weighted_point, node.passage->midpoint};
          // A third movable obstacle whose margin covers the node joins the
          // breach set and adds its own cost term; non-movables still veto.
          bool ok = true;
          std::vector<std::size_t> breaches{i, j};
          for (const auto& p : pts) {
            if (!inside_bounds(params.bounds, p)) ok = false;
            for (std::size_t k = 0; k < obs.size() && ok; ++k) {
              if (k == i || k == j) {
                if (obs[k].hull.strictly_contains(p)) ok = false;
              } else if (obs[k].inflated.strictly_contains(p)) {
                if (obs[k].mass > params.max_mass || obs[k].hull.strictly_contains(p)) ok = false;
                else if (std::find(breaches.begin(), breaches.end(), k) == breaches.end()) breaches.push_back(k);
              }
            }
          }
          if (!ok) continue;
          if (costing == PassageCosting::Weighted) {
            for (std::size_t b = 2; b < breaches.size(); ++b) {
              const auto& o = obs[breaches[b]];
              const double d = geom::point_to_polygon_distance(node.position, o.hull);
              node.node_cost += std::max(0.0, 1.0 - d / r) * o.mass;
            }
          }
          graph.add_node(node);
          probes.push_back({pts, breaches});
        }
      }
    }
  }

  const std::size_t n = graph.size();
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (edge_clear(probes[a], probes[b], obs)) graph.add_edge(a, b);
    }
  }
  return graph;
}

SemanticGraph build_svg(std::span<const Obstacle> obstacles, Point2 start, Point2 goal, const PlannerParams& params) {
  return build_graph(obstacles, start, goal, params, PassageCosting::Weighted);
}

std::optional<PathResult> astar(const SemanticGraph& graph) {
  const NodeId start = graph.start_id, goal = graph.goal_id;
  if (start == goal) return PathResult{{start}, 0.0};
  const std::size_t n = graph.size();
  const Point2 goal_pos = graph.node(goal).position;
  auto h = [&](NodeId id) { return geom::distance(graph.node(id).position, goal_pos); };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, kInf);
  std::vector<NodeId> parent(n, start);
  std::vector<bool> closed(n, false);
  using Entry = std::tuple<double, double, NodeId>;  // f, h, id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g[start] = 0.0;
  open.emplace(h(start), h(start), start);
  while (!open.empty()) {
    const auto [f, hv, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = true;
    if (u == goal) break;
    for (const auto& nb : graph.neighbors(u)) {
      if (closed[nb.id]) continue;
      const double cand = g[u] + nb.length + graph.node(nb.id).node_cost;
      if (cand < g[nb.id]) {
        g[nb.id] = cand;
        parent[nb.id] = u;
        const double hn = h(nb.id);
        open.emplace(cand + hn, hn, nb.id);
      }
    }
  }
  if (!closed[goal]) return std::nullopt;
  PathResult out;
  out.cost = g[goal];
  for (NodeId v = goal;; v = parent[v]) {
    out.nodes.push_back(v);
    if (v == start) break;
  }
  std::reverse(out.nodes.begin(), out.nodes.end());
  return out;
}

Waypoints interpolate_waypoints(std::span<const Point2> path_positions, double spacing) {
  if (path_positions.empty()) throw std::invalid_argument("interpolate_waypoints: empty path");
  if (!(spacing > 0.0)) throw std::invalid_argument("interpolate_waypoints: spacing must be positive");
  Waypoints out;
  out.spacing = spacing;
  out.points.push_back(path_positions.front());
  for (std::size_t i = 1; i < path_positions.size(); ++i) {
    const Point2 a = path_positions[i - 1], b = path_positions[i];
    const double len = geom::distance(a, b);
    if (len <= kEps) continue;
    const auto pieces = static_cast<int>(std::ceil(len / spacing - 1e-12));
    for (int k = 1; k < pieces; ++k) out.points.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
    out.points.push_back(b);
  }
  return out;
}

std::vector<Point2> path_positions(const SemanticGraph& graph, const PathResult& path) {
  std::vector<Point2> out;
  out.reserve(path.nodes.size());
  for (NodeId id : path.nodes) out.push_back(graph.node(id).position);
  return out;
}

Waypoints replan(std::span<const Obstacle> obstacles, Point2 robot_position, Point2 goal,
                 const PlannerParams& params, PassageCosting costing) {
  const auto graph = build_graph(obstacles, robot_position, goal, params, costing, /*strict_endpoints=*/false);
  const auto path = astar(graph);
  if (!path) throw GoalUnreachable("no path from the current robot position to the goal");
  return interpolate_waypoints(path_positions(graph, *path), params.waypoint_spacing);
}

}  // namespace namo::svg
