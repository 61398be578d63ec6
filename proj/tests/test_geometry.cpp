#include <doctest.h>

#include <random>

#include "namo/geometry.hpp"
#include "oracles.hpp"

using namespace namo::geom;
namespace oracle = namo::oracle;

namespace {

bool same_vertices(const Polygon& p, const std::vector<Point2>& want, double tol = 1e-12) {
  if (p.size() != want.size()) return false;
  // Same cyclic sequence, any starting vertex.
  for (std::size_t shift = 0; shift < want.size(); ++shift) {
    bool ok = true;
    for (std::size_t i = 0; i < want.size() && ok; ++i) ok = distance(p[(i + shift) % p.size()], want[i]) <= tol;
    if (ok) return true;
  }
  return false;
}

Polygon unit_square() { return Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

}  // namespace

TEST_CASE("convex hull drops interior points") {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  CHECK(same_vertices(convex_hull(pts), {{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
}

TEST_CASE("convex hull of a triangle is the triangle") {
  const std::vector<Point2> pts{{0, 0}, {2, 0}, {1, 1}};
  CHECK(same_vertices(convex_hull(pts), pts));
}

TEST_CASE("convex hull rejects degenerate input") {
  const std::vector<Point2> two{{0, 0}, {1, 1}};
  const std::vector<Point2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  const std::vector<Point2> repeated{{1, 1}, {1, 1}, {1, 1}};
  CHECK_THROWS_AS(convex_hull(two), DegenerateInput);
  CHECK_THROWS_AS(convex_hull(line), DegenerateInput);
  CHECK_THROWS_AS(convex_hull(repeated), DegenerateInput);
}

TEST_CASE("convex hull matches the brute-force oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> count(3, 50);
  for (int c = 0; c < 500; ++c) {
    std::vector<Point2> pts(static_cast<std::size_t>(count(rng)));
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto hull = convex_hull(pts);
    const auto edges = oracle::hull_edges(pts);
    REQUIRE(hull.size() == edges.size());
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const auto a = std::find(pts.begin(), pts.end(), hull[i]) - pts.begin();
      const auto b = std::find(pts.begin(), pts.end(), hull.vertex_wrapped(i + 1)) - pts.begin();
      CHECK(edges.count({static_cast<std::size_t>(a), static_cast<std::size_t>(b)}) == 1);
    }
  }
}

TEST_CASE("convex hull is idempotent") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int c = 0; c < 50; ++c) {
    std::vector<Point2> pts(20);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto h = convex_hull(pts);
    CHECK(convex_hull(h.vertices()) == h);
  }
}

TEST_CASE("polygon constructor enforces invariants") {
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}}), DegenerateInput);
  CHECK_THROWS_AS(Polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), DegenerateInput);  // clockwise
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), DegenerateInput);  // bow tie
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), DegenerateInput);  // repeated vertex
  CHECK_NOTHROW(Polygon::from_points({{0, 0}, {0, 1}, {1, 1}, {1, 0}}));
}

TEST_CASE("inflate examples") {
  CHECK(same_vertices(inflate(unit_square(), 0.0), unit_square().vertices()));
  CHECK(same_vertices(inflate(unit_square(), 0.3), {{-0.3, -0.3}, {1.3, -0.3}, {1.3, 1.3}, {-0.3, 1.3}}, 1e-12));
  const auto hex = inflate(Polygon::regular(6, 1.0), 0.3);
  const double want = 1.0 + 0.3 / std::cos(M_PI / 6);
  REQUIRE(hex.size() == 6);
  for (const auto& v : hex.vertices()) CHECK(norm(v) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("inflate contains the input and keeps edges at distance r") {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 100; ++c) {
    const Polygon p(oracle::random_convex(rng, {0, 0}, 1.0));
    const double r = 0.05 + 0.01 * c;
    const auto q = inflate(p, r);
    for (const auto& v : p.vertices()) CHECK(q.strictly_contains(v));
    // Every edge of q lies on a support line of p pushed out by exactly r.
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Point2 e = q.vertex_wrapped(i + 1) - q[i];
      const Point2 n = Point2{e.y, -e.x} / norm(e);
      double support = -1e300;
      for (const auto& v : p.vertices()) support = std::max(support, dot(n, v));
      CHECK(dot(n, q[i]) - support == doctest::Approx(r).epsilon(1e-9));
    }
  }
}

TEST_CASE("inflate is monotone in r") {
  std::mt19937_64 rng(6);
  for (int c = 0; c < 50; ++c) {
    const Polygon p(oracle::random_convex(rng, {0, 0}, 1.0));
    const auto small = inflate(p, 0.1), large = inflate(p, 0.25);
    for (const auto& v : small.vertices()) CHECK(large.contains(v));
  }
}

TEST_CASE("min_distance examples") {
  const auto a = unit_square();
  CHECK(min_distance(a, a.translated({3, 0})) == doctest::Approx(2.0));
  CHECK(min_distance(a, a.translated({0.5, 0.5})) == 0.0);
}

TEST_CASE("min_distance matches boundary sampling and is symmetric") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int c = 0; c < 200; ++c) {
    const auto va = oracle::random_convex(rng, {u(rng), u(rng)}, 1.0);
    const auto vb = oracle::random_convex(rng, {u(rng), u(rng)}, 1.0);
    const Polygon a(va), b(vb);
    const double d = min_distance(a, b);
    CHECK(d == doctest::Approx(min_distance(b, a)).epsilon(1e-12));
    CHECK(d >= 0.0);
    if (polygons_overlap(a, b)) {
      CHECK(d == 0.0);
    } else {
      CHECK(std::abs(d - oracle::sampled_distance(va, vb, 400)) < 1e-4);
    }
  }
}

TEST_CASE("min_distance changes by at most the translation") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int c = 0; c < 100; ++c) {
    const Polygon a(oracle::random_convex(rng, {0, 0}, 1.0));
    const Polygon b(oracle::random_convex(rng, {3, 0}, 1.0));
    const Point2 t{u(rng), u(rng)};
    CHECK(std::abs(min_distance(a, b.translated(t)) - min_distance(a, b)) <= norm(t) + 1e-12);
  }
}

TEST_CASE("point_to_polygon_distance examples") {
  CHECK(point_to_polygon_distance({0.5, 0.5}, unit_square()) == 0.0);
  CHECK(point_to_polygon_distance({2.0, 0.5}, unit_square()) == doctest::Approx(1.0));
}

TEST_CASE("point_to_polygon_distance matches per-edge projection") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int c = 0; c < 1000; ++c) {
    const auto v = oracle::random_convex(rng, {u(rng) * 0.25, u(rng) * 0.25}, 1.5);
    const Point2 p{u(rng), u(rng)};
    CHECK(std::abs(point_to_polygon_distance(p, Polygon(v)) - oracle::point_polygon(p, v)) <= 1e-9);
  }
}

TEST_CASE("segment_clear examples") {
  const std::vector<Polygon> obs{unit_square()};
  CHECK(segment_clear({-1, 2}, {2, 2}, obs));
  CHECK_FALSE(segment_clear({-1, 0.5}, {2, 0.5}, obs));
  CHECK(segment_clear({-1, 0}, {2, 0}, obs));  // along the bottom edge
  CHECK(segment_clear({-1, -1}, {1, 1}, std::vector<Polygon>{unit_square().translated({1, 1})}));
}

TEST_CASE("segment_crosses_interior matches the clipping oracle") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int c = 0; c < 2000; ++c) {
    const auto v = oracle::random_convex(rng, {0, 0}, 1.0);
    const Polygon p(v);
    Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    // Some segments run along an edge or end on a vertex.
    if (c % 5 == 0) {
      a = v[0];
      b = v[1] + (v[1] - v[0]) * 0.5;
    } else if (c % 5 == 1) {
      b = v[c % v.size()];
    }
    CHECK(segment_crosses_interior(a, b, p) == oracle::crosses_interior(a, b, v));
  }
}

TEST_CASE("visible_vertices: trivial cases") {
  const std::vector<Point2> cand{{5, 0}, {0, 5}};
  CHECK(visible_vertices({0, 0}, cand, {}).size() == 2);
  const std::vector<Polygon> wall{Polygon::rectangle(1, 1).translated({2.5, 0})};
  const std::vector<Point2> one{{5, 0}};
  CHECK(visible_vertices({0, 0}, one, wall).empty());
}

TEST_CASE("visibility is symmetric and matches the brute-force scan") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int c = 0; c < 200; ++c) {
    std::vector<Polygon> obs;
    std::vector<Point2> cand;
    while (obs.size() < 10) {
      const Polygon p(oracle::random_convex(rng, {u(rng), u(rng)}, 0.8));
      bool clash = false;
      for (const auto& q : obs) clash = clash || polygons_overlap(p, q);
      if (clash) continue;
      obs.push_back(inflate(p, 0.1));
    }
    for (const auto& o : obs)
      for (const auto& v : o.vertices()) cand.push_back(v);
    for (int k = 0; k < 5; ++k) cand.push_back({u(rng), u(rng)});
    const Point2 v = cand[static_cast<std::size_t>(c) % cand.size()];
    const auto vis = visible_vertices(v, cand, obs);
    for (const auto& w : cand) {
      if (w == v) continue;
      bool brute = true;
      for (const auto& o : obs) brute = brute && !oracle::crosses_interior(v, w, o.vertices());
      const bool listed = std::find(vis.begin(), vis.end(), w) != vis.end();
      CHECK(listed == brute);
      CHECK(segment_clear(v, w, obs) == segment_clear(w, v, obs));
    }
  }
}

TEST_CASE("clip_segment_convex reports the crossing interval") {
  double t0 = 0, t1 = 0;
  REQUIRE(clip_segment_convex({-1, 0.5}, {2, 0.5}, unit_square(), t0, t1));
  CHECK(t0 == doctest::Approx(1.0 / 3));
  CHECK(t1 == doctest::Approx(2.0 / 3));
  CHECK_FALSE(clip_segment_convex({-1, 2}, {2, 2}, unit_square(), t0, t1));
}

TEST_CASE("room walls frame the room without overlapping it") {
  const Aabb room{{0, 0}, {8, 4}};
  const auto walls = make_room_walls(room, 1000.0);
  REQUIRE(walls.size() == 4);
  for (const auto& w : walls) {
    CHECK(is_wall(w.id));
    CHECK_FALSE(w.world_shape().strictly_contains({4, 2}));
    CHECK(w.mass == 1000.0);
  }
  CHECK_FALSE(is_wall(ObstacleId{3}));
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
  CHECK(wrap_angle(0.1) == doctest::Approx(0.1));
}
