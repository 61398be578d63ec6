#include "namo/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace namo::geom {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

Point2 Pose2::apply(Point2 p) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {x + c * p.x - s * p.y, y + s * p.x + c * p.y};
}

namespace {

double signed_area(const std::vector<Point2>& v) {
  double a = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) a += cross(v[i], v[(i + 1) % n]);
  return 0.5 * a;
}

bool edges_adjacent(std::size_t i, std::size_t j, std::size_t n) {
  return i == j || (i + 1) % n == j || (j + 1) % n == i;
}

}  // namespace

Polygon::Polygon(std::vector<Point2> v, Unchecked) : vertices_(std::move(v)) { compute_bounds(); }

Polygon::Polygon(std::vector<Point2> ccw_vertices) : vertices_(std::move(ccw_vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw DegenerateInput("polygon needs at least 3 vertices");
  for (const auto& p : vertices_) {
    if (!is_finite(p)) throw DegenerateInput("polygon vertex is not finite");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (distance(vertices_[i], vertices_[(i + 1) % n]) <= kEps) {
      throw DegenerateInput("polygon has coincident consecutive vertices");
    }
  }
  if (signed_area(vertices_) <= 0.0) throw DegenerateInput("polygon is not counter-clockwise");
  for (std::size_t i = 0; i < n; ++i) {
    // A spike that doubles back along the previous edge.
    const Point2 a = vertices_[(i + n - 1) % n], b = vertices_[i], c = vertices_[(i + 1) % n];
    if (std::abs(orient(a, b, c)) <= kEps * distance(a, c) && dot(b - a, c - b) < 0.0) {
      throw DegenerateInput("polygon folds back on itself");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (edges_adjacent(i, j, n)) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j], vertices_[(j + 1) % n])) {
        throw DegenerateInput("polygon is not simple");
      }
    }
  }
  compute_bounds();
}

Polygon Polygon::from_points(std::vector<Point2> vertices) {
  if (vertices.size() >= 3 && signed_area(vertices) < 0.0) std::reverse(vertices.begin(), vertices.end());
  return Polygon(std::move(vertices));
}

Polygon Polygon::rectangle(double size_x, double size_y) {
  const double hx = 0.5 * size_x, hy = 0.5 * size_y;
  return Polygon({{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}});
}

Polygon Polygon::regular(int sides, double circumradius, double phase) {
  if (sides < 3) throw DegenerateInput("regular polygon needs at least 3 sides");
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(sides));
  for (int k = 0; k < sides; ++k) {
    const double a = phase + 2.0 * std::numbers::pi * k / sides;
    v.push_back({circumradius * std::cos(a), circumradius * std::sin(a)});
  }
  return Polygon(std::move(v));
}

void Polygon::compute_bounds() {
  bounds_.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  bounds_.hi = -bounds_.lo;
  for (const auto& p : vertices_) {
    bounds_.lo.x = std::min(bounds_.lo.x, p.x);
    bounds_.lo.y = std::min(bounds_.lo.y, p.y);
    bounds_.hi.x = std::max(bounds_.hi.x, p.x);
    bounds_.hi.y = std::max(bounds_.hi.y, p.y);
  }
}

double Polygon::area() const { return signed_area(vertices_); }

Point2 Polygon::centroid() const {
  double a = 0.0;
  Point2 c;
  for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
    const Point2 p = vertices_[i], q = vertices_[(i + 1) % n];
    const double w = cross(p, q);
    a += w;
    c += (p + q) * w;
  }
  return c / (3.0 * a);
}

bool Polygon::is_convex() const {
  for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
    if (orient(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n]) < -kEps) return false;
  }
  return true;
}

Polygon Polygon::transformed(const Pose2& pose) const {
  const double c = std::cos(pose.theta), s = std::sin(pose.theta);
  std::vector<Point2> v;
  v.reserve(vertices_.size());
  for (const auto& p : vertices_) v.push_back({pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y});
  return Polygon(std::move(v), Unchecked{});
}

Polygon Polygon::translated(Point2 t) const {
  std::vector<Point2> v = vertices_;
  for (auto& p : v) p += t;
  return Polygon(std::move(v), Unchecked{});
}

bool Polygon::contains(Point2 p) const {
  if (p.x < bounds_.lo.x - kEps || p.x > bounds_.hi.x + kEps || p.y < bounds_.lo.y - kEps ||
      p.y > bounds_.hi.y + kEps) {
    return false;
  }
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = vertices_[j], b = vertices_[i];
    if (point_segment_distance(p, a, b) <= kEps) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

bool Polygon::strictly_contains(Point2 p) const {
  if (p.x <= bounds_.lo.x || p.x >= bounds_.hi.x || p.y <= bounds_.lo.y || p.y >= bounds_.hi.y) return false;
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = vertices_[j], b = vertices_[i];
    if (point_segment_distance(p, a, b) <= kEps) return false;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

std::vector<Obstacle> make_room_walls(const Aabb& room, double wall_mass, double thickness) {
  const double t = thickness;
  const double w = room.hi.x - room.lo.x, h = room.hi.y - room.lo.y;
  const double cx = 0.5 * (room.lo.x + room.hi.x), cy = 0.5 * (room.lo.y + room.hi.y);
  auto wall = [&](std::uint32_t k, double sx, double sy, double x, double y) {
    return Obstacle{ObstacleId{kWallIdBase + k}, Polygon::rectangle(sx, sy), {x, y, 0.0}, wall_mass, wall_mass};
  };
  return {
      wall(0, w + 2 * t, t, cx, room.lo.y - 0.5 * t),
      wall(1, t, h + 2 * t, room.hi.x + 0.5 * t, cy),
      wall(2, w + 2 * t, t, cx, room.hi.y + 0.5 * t),
      wall(3, t, h + 2 * t, room.lo.x - 0.5 * t, cy),
  };
}

Polygon convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts;
  pts.reserve(points.size());
  for (const auto& p : points) {
    if (!is_finite(p)) throw DegenerateInput("convex_hull: non-finite point");
    pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Point2> uniq;
  for (const auto& p : pts) {
    if (uniq.empty() || distance(uniq.back(), p) > kEps) uniq.push_back(p);
  }
  if (uniq.size() < 3) throw DegenerateInput("convex_hull: fewer than 3 distinct points");

  std::vector<Point2> hull(2 * uniq.size());
  std::size_t k = 0;
  for (const auto& p : uniq) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = uniq.size() - 1, lower = k + 1; i-- > 0;) {
    const Point2 p = uniq[i];
    while (k >= lower && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegenerateInput("convex_hull: points are collinear");
  return Polygon(std::move(hull));
}

Polygon inflate(const Polygon& polygon, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DegenerateInput("inflate: margin must be finite and >= 0");
  const Polygon base = polygon.is_convex() ? polygon : convex_hull(polygon.vertices());
  if (r == 0.0) return base;
  const auto& v = base.vertices();
  const std::size_t n = v.size();
  std::vector<Point2> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e = v[(i + 1) % n] - v[i];
    normals[i] = Point2{e.y, -e.x} / norm(e);
  }
  std::vector<Point2> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point2 n_prev = normals[(k + n - 1) % n];
    const Point2 n_next = normals[k];
    out.push_back(v[k] + (n_prev + n_next) * (r / (1.0 + dot(n_prev, n_next))));
  }
  return Polygon(std::move(out));
}

Point2 closest_point_on_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 d = b - a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
  return a + d * t;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  return distance(p, closest_point_on_segment(p, a, b));
}

Point2 closest_point_on_boundary(Point2 p, const Polygon& poly) {
  double best = std::numeric_limits<double>::infinity();
  Point2 out;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point2 c = closest_point_on_segment(p, poly[i], poly.vertex_wrapped(i + 1));
    const double d = distance(p, c);
    if (d < best) {
      best = d;
      out = c;
    }
  }
  return out;
}

double point_to_polygon_distance(Point2 p, const Polygon& poly) {
  if (poly.contains(p)) return 0.0;
  return distance(p, closest_point_on_boundary(p, poly));
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (point_segment_distance(a, c, d) <= kEps) return true;
  if (point_segment_distance(b, c, d) <= kEps) return true;
  if (point_segment_distance(c, a, b) <= kEps) return true;
  if (point_segment_distance(d, a, b) <= kEps) return true;
  return false;
}

bool polygons_overlap(const Polygon& a, const Polygon& b) {
  const Aabb ba = a.bounds(), bb = b.bounds();
  if (ba.lo.x > bb.hi.x + kEps || bb.lo.x > ba.hi.x + kEps || ba.lo.y > bb.hi.y + kEps ||
      bb.lo.y > ba.hi.y + kEps) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a[i], a.vertex_wrapped(i + 1), b[j], b.vertex_wrapped(j + 1))) return true;
    }
  }
  return a.contains(b[0]) || b.contains(a[0]);
}

double min_distance(const Polygon& a, const Polygon& b) {
  if (polygons_overlap(a, b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      best = std::min(best, point_segment_distance(a[i], b[j], b.vertex_wrapped(j + 1)));
      best = std::min(best, point_segment_distance(b[j], a[i], a.vertex_wrapped(i + 1)));
    }
  }
  return best;
}

bool segment_crosses_interior(Point2 a, Point2 b, const Polygon& poly) {
  const Aabb box = poly.bounds();
  if (std::max(a.x, b.x) <= box.lo.x || std::min(a.x, b.x) >= box.hi.x || std::max(a.y, b.y) <= box.lo.y ||
      std::min(a.y, b.y) >= box.hi.y) {
    return false;
  }
  const Point2 d = b - a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return poly.strictly_contains(a);

  // Split the segment at every boundary contact; it crosses the interior iff
  // some piece between consecutive contacts has its midpoint strictly inside.
  std::vector<double> all;
  all.reserve(3 * poly.size() + 2);
  auto push = [&all](double t) { all.push_back(std::clamp(t, 0.0, 1.0)); };
  push(0.0);
  push(1.0);
  const double len = std::sqrt(len2);
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point2 p = poly[i], q = poly.vertex_wrapped(i + 1);
    const Point2 e = q - p;
    const double denom = cross(d, e);
    const double elen = norm(e);
    if (std::abs(denom) > 1e-12 * len * elen) {
      const double t = cross(p - a, e) / denom;
      const double u = cross(p - a, d) / denom;
      const double tol_t = kEps / len, tol_u = kEps / elen;
      if (t >= -tol_t && t <= 1.0 + tol_t && u >= -tol_u && u <= 1.0 + tol_u) push(t);
    } else if (std::abs(cross(p - a, d)) <= kEps * len) {
      push(dot(p - a, d) / len2);
      push(dot(q - a, d) / len2);
    }
    // Vertices lying on the segment split it as well.
    if (point_segment_distance(p, a, b) <= kEps) push(dot(p - a, d) / len2);
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    if (all[i + 1] - all[i] <= 1e-12) continue;
    if (poly.strictly_contains(a + d * (0.5 * (all[i] + all[i + 1])))) return true;
  }
  return false;
}

bool segment_clear(Point2 a, Point2 b, std::span<const Polygon> obstacles) {
  for (const auto& o : obstacles) {
    if (segment_crosses_interior(a, b, o)) return false;
  }
  return true;
}

std::vector<Point2> visible_vertices(Point2 v, std::span<const Point2> candidates,
                                     std::span<const Polygon> obstacles) {
  std::vector<Point2> out;
  for (const auto& w : candidates) {
    if (w == v) continue;
    if (segment_clear(v, w, obstacles)) out.push_back(w);
  }
  return out;
}

bool clip_segment_convex(Point2 a, Point2 b, const Polygon& convex, double& t_enter, double& t_exit) {
  t_enter = 0.0;
  t_exit = 1.0;
  const Point2 d = b - a;
  for (std::size_t i = 0, n = convex.size(); i < n; ++i) {
    const Point2 p = convex[i];
    const Point2 e = convex.vertex_wrapped(i + 1) - p;
    const Point2 outward{e.y, -e.x};
    const double num = dot(outward, a - p);
    const double den = dot(outward, d);
    if (std::abs(den) < 1e-15) {
      if (num > 0.0) return false;
      continue;
    }
    const double t = -num / den;
    if (den < 0.0) t_enter = std::max(t_enter, t);
    else t_exit = std::min(t_exit, t);
    if (t_enter > t_exit) return false;
  }
  return true;
}

}  // namespace namo::geom
