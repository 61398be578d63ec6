#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "namo/geometry.hpp"

namespace namo::bench {

using geom::Obstacle;
using geom::Point2;

inline constexpr int kScenarioVersion = 1;

struct Scenario {
  geom::Aabb room{{0.0, 0.0}, {8.0, 4.0}};
  std::vector<Obstacle> obstacles;
  Point2 start;
  Point2 goal;
  std::uint64_t seed = 0;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct GenerationParams {
  double room_x = 8.0;
  double room_y = 4.0;
  double movable_coverage = 0.20;
  double static_coverage = 0.05;
  double coverage_tolerance = 0.02;
  Range movable_mass{4.0, 30.0};
  Range static_mass{30.0, 36.0};  // sampled from (lo, hi]
  Range circumradius{0.2, 0.6};
  Range rect_aspect_deg{30.0, 60.0};  // half-diagonal angle of rectangles
  int min_sides = 3;
  int max_sides = 6;
  double rect_probability = 0.5;
  double min_gap = 0.02;
  double endpoint_clearance = 0.5;
  double endpoint_x = 0.5;       // start and goal distance from the short walls
  Range endpoint_y{0.6, 3.4};
  double mass_belief_error = 0.0;  // fraction of movables that are secretly heavy
  Range heavy_mass{50.0, 90.0};
  int max_attempts = 10000;
};

class GenerationFailed : public std::runtime_error {
 public:
  GenerationFailed(std::uint64_t seed, const std::string& why)
      : std::runtime_error("scenario generation failed for seed " + std::to_string(seed) + ": " + why),
        seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario generate_scenario(std::uint64_t seed, const GenerationParams& params = {});

// Area of obstacles believed movable (or with mass in the movable range when
// `truth` is set), divided by room area.
double movable_fraction(const Scenario& s, double max_mass, bool truth = false);

nlohmann::ordered_json to_json(const Scenario& s);
// Validates the schema; throws ScenarioError naming the offending field.
Scenario scenario_from_json(const nlohmann::json& j);

std::string dump_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::ordered_json point_json(Point2 p);
nlohmann::ordered_json pose_json(const geom::Pose2& p);

}  // namespace namo::bench
