#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace namo::geom {

// Absolute tolerance for every geometric predicate. Points closer than this to
// a boundary are classified as lying on it.
inline constexpr double kEps = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2& operator+=(Point2 o) { x += o.x; y += o.y; return *this; }
  constexpr Point2& operator-=(Point2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Point2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }
  friend constexpr Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
// Signed area of the parallelogram (o->a, o->b); positive when o, a, b turn left.
constexpr double orient(Point2 o, Point2 a, Point2 b) { return cross(a - o, b - o); }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Maps an angle to (-pi, pi].
double wrap_angle(double a);

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Point2 position() const { return {x, y}; }
  // Body frame -> world frame.
  Point2 apply(Point2 p) const;
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

struct Aabb {
  Point2 lo;
  Point2 hi;

  bool overlaps(const Aabb& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
  bool contains(Point2 p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInput : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// Simple polygon with counter-clockwise vertex order. The constructor enforces
// the invariants (>= 3 vertices, finite, CCW, simple, no repeated consecutive
// vertices) and throws DegenerateInput otherwise.
class Polygon {
 public:
  explicit Polygon(std::vector<Point2> ccw_vertices);

  // Accepts either orientation and reverses clockwise input.
  static Polygon from_points(std::vector<Point2> vertices);
  // Axis-aligned rectangle centred at the origin.
  static Polygon rectangle(double size_x, double size_y);
  // Regular polygon centred at the origin with one vertex on the +x axis
  // rotated by `phase`.
  static Polygon regular(int sides, double circumradius, double phase = 0.0);

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  Point2 operator[](std::size_t i) const { return vertices_[i]; }
  Point2 vertex_wrapped(std::size_t i) const { return vertices_[i % vertices_.size()]; }

  double area() const;
  Point2 centroid() const;
  bool is_convex() const;
  Aabb bounds() const { return bounds_; }

  Polygon transformed(const Pose2& pose) const;
  Polygon translated(Point2 t) const;

  // Closed containment: boundary points (within kEps) count as contained.
  bool contains(Point2 p) const;
  // Open containment: inside and farther than kEps from the boundary.
  bool strictly_contains(Point2 p) const;

  friend bool operator==(const Polygon& a, const Polygon& b) { return a.vertices_ == b.vertices_; }

 private:
  struct Unchecked {};
  Polygon(std::vector<Point2> v, Unchecked);
  void compute_bounds();

  std::vector<Point2> vertices_;
  Aabb bounds_;
};

struct ObstacleId {
  std::uint32_t value = 0;
  friend auto operator<=>(const ObstacleId&, const ObstacleId&) = default;
};

// A movable-or-not polygonal obstacle. `mass` is the believed mass used by
// planners, `mass_true` is what the simulator uses as ground truth.
struct Obstacle {
  ObstacleId id;
  Polygon shape;  // body frame
  Pose2 pose;
  double mass = 1.0;
  double mass_true = 1.0;

  bool movable_believed(double max_mass) const { return mass <= max_mass; }
  Polygon world_shape() const { return shape.transformed(pose); }
};

// Four non-movable rectangles framing the room, ids from kWallIdBase.
inline constexpr std::uint32_t kWallIdBase = 1'000'000;
std::vector<Obstacle> make_room_walls(const Aabb& room, double wall_mass, double thickness = 1.0);
inline bool is_wall(ObstacleId id) { return id.value >= kWallIdBase; }

// Andrew's monotone chain. Collinear boundary points are dropped, so the hull
// vertices are the strictly extreme input points.
Polygon convex_hull(std::span<const Point2> points);

// Miter offset of a convex polygon: every edge moves outward by r and adjacent
// offset lines are intersected. Non-convex input is replaced by its hull.
Polygon inflate(const Polygon& polygon, double r);

Point2 closest_point_on_segment(Point2 p, Point2 a, Point2 b);
double point_segment_distance(Point2 p, Point2 a, Point2 b);
Point2 closest_point_on_boundary(Point2 p, const Polygon& poly);

// 0 when p is inside; otherwise distance to the nearest boundary point.
double point_to_polygon_distance(Point2 p, const Polygon& poly);

// Closed-segment intersection test (touching counts).
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

bool polygons_overlap(const Polygon& a, const Polygon& b);

// 0 when the polygons overlap or touch; symmetric.
double min_distance(const Polygon& a, const Polygon& b);

// True when the open segment (a, b) passes through the interior of `poly`.
// Boundary contact alone (grazing a vertex, running along an edge) does not
// count.
bool segment_crosses_interior(Point2 a, Point2 b, const Polygon& poly);

bool segment_clear(Point2 a, Point2 b, std::span<const Polygon> obstacles);

// Naive scan: the candidates w with segment_clear(v, w, obstacles).
std::vector<Point2> visible_vertices(Point2 v, std::span<const Point2> candidates,
                                     std::span<const Polygon> obstacles);

// Parameters t in [0, 1] along a->b where the segment enters and leaves a
// convex polygon; returns false when the segment misses it.
bool clip_segment_convex(Point2 a, Point2 b, const Polygon& convex, double& t_enter, double& t_exit);

}  // namespace namo::geom
