#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "namo/geometry.hpp"

namespace namo::svg {

using geom::Obstacle;
using geom::ObstacleId;
using geom::Point2;
using geom::Polygon;

using NodeId = std::uint32_t;

enum class NodeKind { Free, Passage };
enum class BoundaryKind { Entry, Exit };

// How passage nodes are placed and priced.
//   None     - plain visibility graph, no passage nodes.
//   Binary   - passage nodes at boundary midpoints with zero cost.
//   Weighted - mass-interpolated placement and effort cost.
enum class PassageCosting { None, Binary, Weighted };

struct PassageMeta {
  ObstacleId first;
  ObstacleId second;
  BoundaryKind boundary = BoundaryKind::Entry;
  double gamma = 0.5;
  Point2 weighted_point;  // mass-interpolated location on the boundary
  Point2 midpoint;        // boundary midpoint
};

struct GraphNode {
  NodeId id = 0;
  Point2 position;
  NodeKind kind = NodeKind::Free;
  double node_cost = 0.0;
  std::optional<PassageMeta> passage;
};

struct GraphEdge {
  NodeId a = 0;
  NodeId b = 0;
  double length = 0.0;
};

// Weighted undirected graph of free-space and passage nodes.
class SemanticGraph {
 public:
  NodeId add_node(GraphNode node);
  // Length is the Euclidean distance between the endpoint positions.
  void add_edge(NodeId a, NodeId b);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const GraphNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  struct Neighbor {
    NodeId id;
    double length;
  };
  const std::vector<Neighbor>& neighbors(NodeId id) const { return adjacency_.at(id); }

  std::size_t passage_count() const;

  NodeId start_id = 0;
  NodeId goal_id = 0;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

struct PassageBoundary {
  Point2 first_end;   // on the first obstacle's side
  Point2 second_end;  // on the second obstacle's side
  double first_mass = 0.0;
  double second_mass = 0.0;
  BoundaryKind kind = BoundaryKind::Entry;
};

struct PassageSet {
  std::vector<GraphNode> nodes;
  std::vector<PassageBoundary> boundaries;
  std::vector<Point2> nearest_points;  // stage-I point set
  bool degenerate = false;             // collinear point set: single node
};

struct PlannerParams {
  double margin = 0.3;             // safety margin r
  double max_mass = 30.0;          // movability threshold (kg)
  double waypoint_spacing = 0.5;   // metres
  double wall_mass = 1000.0;       // mass assigned to room walls
  std::optional<geom::Aabb> bounds;  // nodes outside are dropped
};

class StartOrGoalBlocked : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GoalUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mass-interpolated point between boundary endpoints v_first and v_second.
// gamma = m_first / (m_first + m_second), so the point lands nearer the
// lighter obstacle.
double passage_gamma(double first_mass, double second_mass);
Point2 interpolate_passage_point(Point2 v_first, Point2 v_second, double first_mass, double second_mass);

// max(0, 1 - d_i/r) m_i + max(0, 1 - d_j/r) m_j
double passage_cost_from_distances(double d_first, double first_mass, double d_second, double second_mass,
                                   double r);
double passage_node_cost(Point2 node, const Polygon& first_hull, double first_mass, const Polygon& second_hull,
                         double second_mass, double r);

// Unordered index pairs (i < j) whose convex hulls are closer than 2r and at
// least one member has believed mass <= max_mass.
std::vector<std::pair<std::size_t, std::size_t>> find_passage_pairs(std::span<const Obstacle> obstacles, double r,
                                                                    double max_mass);

// Three-stage passage construction for one qualifying pair.
PassageSet construct_passage_nodes(const Obstacle& first, const Obstacle& second, double r,
                                   PassageCosting costing = PassageCosting::Weighted);

// Visibility graph over the inflated convex hulls of `obstacles`, plus passage
// nodes according to `costing`. With strict_endpoints, a start or goal inside
// an inflated non-movable obstacle throws StartOrGoalBlocked; otherwise the
// endpoint may breach any margin it currently sits in (used when replanning
// from a robot that is in contact).
SemanticGraph build_graph(std::span<const Obstacle> obstacles, Point2 start, Point2 goal,
                          const PlannerParams& params, PassageCosting costing, bool strict_endpoints = true);

SemanticGraph build_svg(std::span<const Obstacle> obstacles, Point2 start, Point2 goal, const PlannerParams& params);

struct PathResult {
  std::vector<NodeId> nodes;
  double cost = 0.0;
};

// A* minimising edge length plus the cost of every node entered. Ties on f
// are broken by lower heuristic, then lower node id.
std::optional<PathResult> astar(const SemanticGraph& graph);

struct Waypoints {
  std::vector<Point2> points;
  double spacing = 0.5;
};

// Each path segment is split into ceil(len / spacing) equal pieces; the input
// corner points are kept.
Waypoints interpolate_waypoints(std::span<const Point2> path_positions, double spacing);

std::vector<Point2> path_positions(const SemanticGraph& graph, const PathResult& path);

// Rebuilds the graph from the robot's current position and the obstacles'
// current poses and believed masses. Throws GoalUnreachable.
Waypoints replan(std::span<const Obstacle> obstacles, Point2 robot_position, Point2 goal,
                 const PlannerParams& params, PassageCosting costing = PassageCosting::Weighted);

}  // namespace namo::svg
