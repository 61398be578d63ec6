#include "namo/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace namo::baselines {

using geom::Polygon;

std::string_view to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::NVG: return "nvg";
    case PlannerKind::BVG: return "bvg";
    case PlannerKind::BRRT: return "brrt";
    case PlannerKind::SVG: return "svg";
  }
  return "?";
}

std::optional<PlannerKind> parse_planner(std::string_view name) {
  for (auto k : kAllPlanners) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

SemanticGraph build_nvg(std::span<const Obstacle> obstacles, Point2 start, Point2 goal, const PlannerParams& params) {
  return svg::build_graph(obstacles, start, goal, params, svg::PassageCosting::None);
}

SemanticGraph build_bvg(std::span<const Obstacle> obstacles, Point2 start, Point2 goal, const PlannerParams& params) {
  return svg::build_graph(obstacles, start, goal, params, svg::PassageCosting::Binary);
}

RrtValidity::RrtValidity(std::span<const Obstacle> obstacles, Point2 start, Point2 goal, const PlannerParams& params,
                         bool strict_endpoints) {
  const double r = params.margin;
  box_ = params.bounds.value_or(geom::Aabb{{-1e3, -1e3}, {1e3, 1e3}});
  for (const auto& o : obstacles) {
    Polygon hull = geom::convex_hull(o.world_shape().vertices());
    Polygon inflated = geom::inflate(hull, r);
    const bool movable = o.movable_believed(params.max_mass);
    for (Point2 p : {start, goal}) {
      if (!inflated.strictly_contains(p)) continue;
      if (strict_endpoints && (!movable || hull.strictly_contains(p)))
        throw svg::StartOrGoalBlocked("endpoint lies inside an inflated non-movable obstacle");
      // A breached margin is treated as permeable, like the graph planners do.
      if (!movable) inflated = hull;
    }
    forbidden_.push_back(movable ? std::move(hull) : std::move(inflated));
    boxes_.push_back(forbidden_.back().bounds());
  }
}

bool RrtValidity::point_ok(Point2 p) const {
  if (!box_.contains(p)) return false;
  for (std::size_t k = 0; k < forbidden_.size(); ++k) {
    if (boxes_[k].contains(p) && forbidden_[k].strictly_contains(p)) return false;
  }
  return true;
}

bool RrtValidity::segment_ok(Point2 a, Point2 b) const {
  const geom::Aabb seg{{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
  for (std::size_t k = 0; k < forbidden_.size(); ++k) {
    if (!seg.overlaps(boxes_[k])) continue;
    if (geom::segment_crosses_interior(a, b, forbidden_[k])) return false;
  }
  return true;
}

std::vector<Point2> shortcut_path(std::span<const Point2> path, const RrtValidity& validity) {
  std::vector<Point2> out;
  if (path.empty()) return out;
  std::size_t i = 0;
  out.push_back(path[0]);
  while (i + 1 < path.size()) {
    std::size_t j = path.size() - 1;
    while (j > i + 1 && !validity.segment_ok(path[i], path[j])) --j;
    out.push_back(path[j]);
    i = j;
  }
  return out;
}

std::vector<Point2> build_brrt(std::span<const Obstacle> obstacles, Point2 start, Point2 goal,
                               const PlannerParams& params, const RrtParams& rrt, std::uint64_t seed,
                               bool strict_endpoints) {
  const RrtValidity valid(obstacles, start, goal, params, strict_endpoints);
  if (start == goal) return {start};
  if (valid.segment_ok(start, goal)) {
    return {start, goal};
  }
  std::mt19937_64 rng(seed);
  const auto& box = valid.sample_box();
  std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y), coin(0.0, 1.0);

  std::vector<Point2> nodes{start};
  std::vector<std::size_t> parent{0};
  for (int it = 0; it < rrt.max_iterations; ++it) {
    const Point2 target = coin(rng) < rrt.goal_bias ? goal : Point2{ux(rng), uy(rng)};
    std::size_t near = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Point2 d = nodes[k] - target;
      const double d2 = geom::dot(d, d);
      if (d2 < best) {
        best = d2;
        near = k;
      }
    }
    const Point2 from = nodes[near];
    const double len = std::sqrt(best);
    if (len <= geom::kEps) continue;
    const Point2 to = len <= rrt.step ? target : from + (target - from) * (rrt.step / len);
    if (!valid.point_ok(to) || !valid.segment_ok(from, to)) continue;
    nodes.push_back(to);
    parent.push_back(near);
    if (geom::distance(to, goal) <= rrt.step && valid.segment_ok(to, goal)) {
      std::vector<Point2> path{goal};
      for (std::size_t v = nodes.size() - 1;; v = parent[v]) {
        if (!(nodes[v] == path.back())) path.push_back(nodes[v]);
        if (v == 0) break;
      }
      std::reverse(path.begin(), path.end());
      return rrt.shortcut ? shortcut_path(path, valid) : path;
    }
  }
  throw NoPathFound("rrt: iteration cap reached");
}

namespace {

double polyline_length(std::span<const Point2> pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += geom::distance(pts[i - 1], pts[i]);
  return len;
}

}  // namespace

PlanOutcome plan(PlannerKind kind, std::span<const Obstacle> obstacles, const geom::Aabb& room, Point2 start,
                 Point2 goal, const PlannerParams& params, const RrtParams& rrt, std::uint64_t seed,
                 bool strict_endpoints) {
  std::vector<Obstacle> all(obstacles.begin(), obstacles.end());
  for (auto& w : geom::make_room_walls(room, params.wall_mass)) all.push_back(std::move(w));
  PlannerParams p = params;
  if (!p.bounds) p.bounds = room;

  PlanOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  if (kind == PlannerKind::BRRT) {
    try {
      out.path = build_brrt(all, start, goal, p, rrt, seed, strict_endpoints);
      out.found = true;
      out.cost = polyline_length(out.path);
    } catch (const NoPathFound&) {
      out.found = false;
    }
  } else {
    const auto costing = kind == PlannerKind::NVG   ? svg::PassageCosting::None
                         : kind == PlannerKind::BVG ? svg::PassageCosting::Binary
                                                    : svg::PassageCosting::Weighted;
    out.graph = svg::build_graph(all, start, goal, p, costing, strict_endpoints);
    if (auto path = svg::astar(*out.graph)) {
      out.found = true;
      out.cost = path->cost;
      out.path = svg::path_positions(*out.graph, *path);
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out.found) out.waypoints = svg::interpolate_waypoints(out.path, p.waypoint_spacing);
  return out;
}

std::vector<double> controller_masses(PlannerKind kind, std::span<const Obstacle> obstacles, double max_mass,
                                      double binary_mass) {
  std::vector<double> m;
  m.reserve(obstacles.size());
  for (const auto& o : obstacles) {
    switch (kind) {
      case PlannerKind::SVG: m.push_back(o.mass); break;
      case PlannerKind::NVG: m.push_back(std::numeric_limits<double>::infinity()); break;
      case PlannerKind::BVG:
      case PlannerKind::BRRT: m.push_back(o.movable_believed(max_mass) ? binary_mass : o.mass); break;
    }
  }
  return m;
}

}  // namespace namo::baselines
