#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "namo/svg_planner.hpp"

namespace namo::baselines {

using geom::Obstacle;
using geom::Point2;
using svg::PlannerParams;
using svg::SemanticGraph;

enum class PlannerKind { NVG, BVG, BRRT, SVG };
inline constexpr std::array<PlannerKind, 4> kAllPlanners{PlannerKind::NVG, PlannerKind::BVG, PlannerKind::BRRT,
                                                         PlannerKind::SVG};

std::string_view to_string(PlannerKind kind);  // "nvg", "bvg", "brrt", "svg"
std::optional<PlannerKind> parse_planner(std::string_view name);

// Every obstacle is an obstacle: no passage nodes, zero node costs.
SemanticGraph build_nvg(std::span<const Obstacle> obstacles, Point2 start, Point2 goal, const PlannerParams& params);
// SVG connectivity with passage nodes at boundary midpoints and zero cost.
SemanticGraph build_bvg(std::span<const Obstacle> obstacles, Point2 start, Point2 goal, const PlannerParams& params);

struct RrtParams {
  double step = 0.3;
  double goal_bias = 0.1;
  int max_iterations = 20000;
  bool shortcut = true;
};

class NoPathFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validity rule shared by sampling, steering and shortcutting: the inflated
// margins of believed-movable obstacles are permeable but their hulls are
// not; believed non-movable obstacles keep their full inflation.
class RrtValidity {
 public:
  RrtValidity(std::span<const Obstacle> obstacles, Point2 start, Point2 goal, const PlannerParams& params,
              bool strict_endpoints);
  bool point_ok(Point2 p) const;
  bool segment_ok(Point2 a, Point2 b) const;
  const geom::Aabb& sample_box() const { return box_; }

 private:
  std::vector<geom::Polygon> forbidden_;
  std::vector<geom::Aabb> boxes_;
  geom::Aabb box_;
};

// Plain RRT with goal bias; returns start .. goal. Throws NoPathFound after
// max_iterations, StartOrGoalBlocked like the graph planners.
std::vector<Point2> build_brrt(std::span<const Obstacle> obstacles, Point2 start, Point2 goal,
                               const PlannerParams& params, const RrtParams& rrt, std::uint64_t seed,
                               bool strict_endpoints = true);

// Greedy shortcutting: from each kept point jump to the farthest later point
// reachable by a valid straight segment.
std::vector<Point2> shortcut_path(std::span<const Point2> path, const RrtValidity& validity);

struct PlanOutcome {
  bool found = false;
  std::optional<SemanticGraph> graph;  // graph planners only
  std::vector<Point2> path;            // corner points, start .. goal
  double cost = 0.0;                   // A* cost or path length
  svg::Waypoints waypoints;
  double seconds = 0.0;                // build + search wall time
};

// Runs one planner over obstacles plus the room walls. No-path outcomes come
// back with found = false; StartOrGoalBlocked propagates.
PlanOutcome plan(PlannerKind kind, std::span<const Obstacle> obstacles, const geom::Aabb& room, Point2 start,
                 Point2 goal, const PlannerParams& params, const RrtParams& rrt, std::uint64_t seed,
                 bool strict_endpoints = true);

// Masses the controller's internal model uses under each planner's belief:
// believed masses for SVG, a single binary mass for every movable obstacle
// under BVG and B-RRT, and immovable everything under NVG.
std::vector<double> controller_masses(PlannerKind kind, std::span<const Obstacle> obstacles, double max_mass,
                                      double binary_mass);

}  // namespace namo::baselines
