#include "namo/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace namo::bench {

using geom::Polygon;
using geom::Pose2;

namespace {

struct Sampler {
  std::mt19937_64 rng;
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  // (lo, hi]
  double uniform_left_open(double lo, double hi) { return hi - std::uniform_real_distribution<double>(0.0, hi - lo)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }
};

Polygon random_shape(Sampler& s, const GenerationParams& p) {
  const double radius = s.uniform(p.circumradius.lo, p.circumradius.hi);
  if (s.chance(p.rect_probability)) {
    const double phi = s.uniform(p.rect_aspect_deg.lo, p.rect_aspect_deg.hi) * std::numbers::pi / 180.0;
    return Polygon::rectangle(2.0 * radius * std::cos(phi), 2.0 * radius * std::sin(phi));
  }
  return Polygon::regular(s.integer(p.min_sides, p.max_sides), radius);
}

}  // namespace

Scenario generate_scenario(std::uint64_t seed, const GenerationParams& p) {
  Sampler s{std::mt19937_64(seed)};
  Scenario sc;
  sc.seed = seed;
  sc.room = {{0.0, 0.0}, {p.room_x, p.room_y}};
  sc.start = {p.endpoint_x, s.uniform(p.endpoint_y.lo, p.endpoint_y.hi)};
  sc.goal = {p.room_x - p.endpoint_x, s.uniform(p.endpoint_y.lo, p.endpoint_y.hi)};
  const double room_area = p.room_x * p.room_y;

  std::vector<Polygon> placed;
  int attempts = 0;
  auto fill = [&](double coverage, bool movable) {
    // Aim for the target, accept at most half a tolerance below it and
    // reject shapes that would overshoot by more than half a tolerance.
    const double want = coverage * room_area;
    const double slack = 0.5 * p.coverage_tolerance * room_area;
    double area = 0.0;
    while (area < want - 0.25 * slack) {
      if (++attempts > p.max_attempts) throw GenerationFailed(seed, "rejection budget exhausted");
      const Polygon shape = random_shape(s, p);
      const Pose2 pose{s.uniform(0.0, p.room_x), s.uniform(0.0, p.room_y), s.uniform(0.0, 2.0 * std::numbers::pi)};
      if (area + shape.area() > want + slack) continue;
      const Polygon world = shape.transformed(pose);
      const auto b = world.bounds();
      if (b.lo.x < p.min_gap || b.lo.y < p.min_gap || b.hi.x > p.room_x - p.min_gap ||
          b.hi.y > p.room_y - p.min_gap)
        continue;
      if (geom::point_to_polygon_distance(sc.start, world) < p.endpoint_clearance) continue;
      if (geom::point_to_polygon_distance(sc.goal, world) < p.endpoint_clearance) continue;
      bool clash = false;
      for (const auto& q : placed) {
        if (geom::min_distance(world, q) < p.min_gap) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      Obstacle o{geom::ObstacleId{static_cast<std::uint32_t>(sc.obstacles.size())}, shape, pose, 0.0, 0.0};
      if (movable) {
        o.mass = s.uniform(p.movable_mass.lo, p.movable_mass.hi);
        o.mass_true = s.chance(p.mass_belief_error) ? s.uniform(p.heavy_mass.lo, p.heavy_mass.hi) : o.mass;
      } else {
        o.mass = s.uniform_left_open(p.static_mass.lo, p.static_mass.hi);
        o.mass_true = o.mass;
      }
      sc.obstacles.push_back(std::move(o));
      placed.push_back(world);
      area += shape.area();
    }
  };
  fill(p.static_coverage, false);
  fill(p.movable_coverage, true);
  return sc;
}

double movable_fraction(const Scenario& s, double max_mass, bool truth) {
  double area = 0.0;
  for (const auto& o : s.obstacles) {
    if ((truth ? o.mass_true : o.mass) <= max_mass) area += o.shape.area();
  }
  const double room = (s.room.hi.x - s.room.lo.x) * (s.room.hi.y - s.room.lo.y);
  return area / room;
}

nlohmann::ordered_json point_json(Point2 p) { return nlohmann::ordered_json::array({p.x, p.y}); }
nlohmann::ordered_json pose_json(const Pose2& p) { return nlohmann::ordered_json::array({p.x, p.y, p.theta}); }

nlohmann::ordered_json to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["version"] = kScenarioVersion;
  j["seed"] = s.seed;
  j["room"] = {{"min", point_json(s.room.lo)}, {"max", point_json(s.room.hi)}};
  j["start"] = point_json(s.start);
  j["goal"] = point_json(s.goal);
  auto& obs = j["obstacles"] = nlohmann::ordered_json::array();
  for (const auto& o : s.obstacles) {
    nlohmann::ordered_json e;
    e["id"] = o.id.value;
    auto& v = e["vertices"] = nlohmann::ordered_json::array();
    for (const auto& p : o.shape.vertices()) v.push_back(point_json(p));
    e["pose"] = pose_json(o.pose);
    e["mass_true"] = o.mass_true;
    e["mass_believed"] = o.mass;
    obs.push_back(std::move(e));
  }
  return j;
}

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw ScenarioError("scenario schema: " + where + ": " + what);
}

double number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) schema(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema(where, "not finite");
  return v;
}

Point2 point(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) schema(where, "expected [x, y]");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) schema("$", "expected an object");
  const auto& ver = field(j, "version", "$");
  if (!ver.is_number_integer() || ver.get<int>() != kScenarioVersion)
    schema("version", "unsupported version (expected " + std::to_string(kScenarioVersion) + ")");
  Scenario s;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) schema("seed", "expected an integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  const auto& room = field(j, "room", "$");
  s.room = {point(field(room, "min", "room"), "room.min"), point(field(room, "max", "room"), "room.max")};
  if (!(s.room.hi.x > s.room.lo.x && s.room.hi.y > s.room.lo.y)) schema("room", "max must exceed min");
  s.start = point(field(j, "start", "$"), "start");
  s.goal = point(field(j, "goal", "$"), "goal");
  const auto& obs = field(j, "obstacles", "$");
  if (!obs.is_array()) schema("obstacles", "expected an array");
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const std::string where = "obstacles[" + std::to_string(k) + "]";
    const auto& e = obs[k];
    const auto& id = field(e, "id", where);
    if (!id.is_number_unsigned()) schema(where + ".id", "expected a non-negative integer");
    const auto& vs = field(e, "vertices", where);
    if (!vs.is_array() || vs.size() < 3) schema(where + ".vertices", "expected at least 3 points");
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < vs.size(); ++i) pts.push_back(point(vs[i], where + ".vertices[" + std::to_string(i) + "]"));
    const auto& pose = field(e, "pose", where);
    if (!pose.is_array() || pose.size() != 3) schema(where + ".pose", "expected [x, y, theta]");
    Obstacle o{geom::ObstacleId{id.get<std::uint32_t>()},
               [&] {
                 try {
                   return Polygon::from_points(pts);
                 } catch (const geom::GeometryError& err) {
                   schema(where + ".vertices", err.what());
                 }
               }(),
               {number(pose[0], where + ".pose[0]"), number(pose[1], where + ".pose[1]"),
                number(pose[2], where + ".pose[2]")},
               number(field(e, "mass_believed", where), where + ".mass_believed"),
               number(field(e, "mass_true", where), where + ".mass_true")};
    if (!(o.mass > 0.0) || !(o.mass_true > 0.0)) schema(where, "masses must be positive");
    if (geom::is_wall(o.id)) schema(where + ".id", "ids from " + std::to_string(geom::kWallIdBase) + " are reserved");
    for (const auto& prev : s.obstacles) {
      if (prev.id == o.id) schema(where + ".id", "duplicate id");
    }
    s.obstacles.push_back(std::move(o));
  }
  return s;
}

std::string dump_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump_scenario(s);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace namo::bench
