#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "namo/scenario.hpp"

namespace namo::tools {

using geom::Point2;
using nlohmann::json;

namespace {

constexpr double kScale = 100.0;  // px per metre
constexpr double kPad = 20.0;

class Canvas {
 public:
  explicit Canvas(const bench::Scenario& sc) : room_(sc.room) {
    w_ = (room_.hi.x - room_.lo.x) * kScale + 2 * kPad;
    h_ = (room_.hi.y - room_.lo.y) * kScale + 2 * kPad;
  }

  double x(double wx) const { return kPad + (wx - room_.lo.x) * kScale; }
  double y(double wy) const { return kPad + (room_.hi.y - wy) * kScale; }

  void raw(const std::string& s) { body_ << s << '\n'; }

  void polygon(const std::vector<Point2>& pts, const std::string& style) {
    body_ << "<polygon points=\"";
    for (const auto& p : pts) body_ << num(x(p.x)) << ',' << num(y(p.y)) << ' ';
    body_ << "\" " << style << "/>\n";
  }
  void polyline(const std::vector<Point2>& pts, const std::string& style) {
    if (pts.size() < 2) return;
    body_ << "<polyline fill=\"none\" points=\"";
    for (const auto& p : pts) body_ << num(x(p.x)) << ',' << num(y(p.y)) << ' ';
    body_ << "\" " << style << "/>\n";
  }
  void line(Point2 a, Point2 b, const std::string& style) {
    body_ << "<line x1=\"" << num(x(a.x)) << "\" y1=\"" << num(y(a.y)) << "\" x2=\"" << num(x(b.x)) << "\" y2=\""
          << num(y(b.y)) << "\" " << style << "/>\n";
  }
  void circle(Point2 c, double r_px, const std::string& style) {
    body_ << "<circle cx=\"" << num(x(c.x)) << "\" cy=\"" << num(y(c.y)) << "\" r=\"" << num(r_px) << "\" " << style
          << "/>\n";
  }
  void text(Point2 p, const std::string& s, const std::string& style) {
    body_ << "<text x=\"" << num(x(p.x)) << "\" y=\"" << num(y(p.y)) << "\" " << style << ">" << s << "</text>\n";
  }

  std::string finish() const {
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_)
      << "\" viewBox=\"0 0 " << num(w_) << ' ' << num(h_) << "\">\n"
      << "<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"3\" orient=\"auto\">"
      << "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"#c0392b\"/></marker></defs>\n"
      << "<rect x=\"" << num(kPad) << "\" y=\"" << num(kPad) << "\" width=\"" << num(w_ - 2 * kPad) << "\" height=\""
      << num(h_ - 2 * kPad) << "\" fill=\"#fbfbf8\" stroke=\"#222\" stroke-width=\"2\"/>\n"
      << body_.str() << "</svg>\n";
    return o.str();
  }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

 private:
  geom::Aabb room_;
  double w_ = 0, h_ = 0;
  std::ostringstream body_;
};

// Light grey for light obstacles, dark for heavy; believed non-movable in red.
std::string mass_fill(double mass, double max_mass) {
  if (mass > max_mass) return "fill=\"#8e3b34\" fill-opacity=\"0.85\"";
  const int shade = static_cast<int>(std::lround(220 - 140 * std::clamp(mass / max_mass, 0.0, 1.0)));
  char buf[64];
  std::snprintf(buf, sizeof buf, "fill=\"rgb(%d,%d,%d)\"", shade, shade, shade + 10 > 255 ? 255 : shade + 10);
  return buf;
}

void draw_obstacles(Canvas& c, const bench::Scenario& sc, const std::map<std::uint32_t, geom::Pose2>& poses,
                    const std::string& extra) {
  for (const auto& o : sc.obstacles) {
    auto pose = o.pose;
    if (auto it = poses.find(o.id.value); it != poses.end()) pose = it->second;
    c.polygon(o.shape.transformed(pose).vertices(), mass_fill(o.mass, 30.0) + " stroke=\"#333\" " + extra);
  }
}

void draw_endpoints(Canvas& c, const bench::Scenario& sc) {
  c.circle(sc.start, 6, "fill=\"#27ae60\"");
  c.circle(sc.goal, 6, "fill=\"#2980b9\"");
  c.text(sc.start + Point2{0.08, 0.08}, "start", "font-size=\"12\" font-family=\"sans-serif\"");
  c.text(sc.goal + Point2{0.08, 0.08}, "goal", "font-size=\"12\" font-family=\"sans-serif\"");
}

Point2 as_point(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::vector<Point2> as_points(const json& j) {
  std::vector<Point2> out;
  for (const auto& p : j) out.push_back(as_point(p));
  return out;
}

}  // namespace

std::string render_plan(const json& dump) {
  const auto sc = bench::scenario_from_json(dump.at("scenario"));
  Canvas c(sc);
  draw_obstacles(c, sc, {}, "");
  if (dump.contains("graph") && dump["graph"].is_object()) {
    const auto& g = dump["graph"];
    std::vector<Point2> pos;
    for (const auto& n : g.at("nodes")) pos.push_back(as_point(n.at("position")));
    for (const auto& e : g.at("edges")) {
      c.line(pos.at(e.at(0).get<std::size_t>()), pos.at(e.at(1).get<std::size_t>()),
             "stroke=\"#9aa5b1\" stroke-width=\"0.6\" stroke-opacity=\"0.6\"");
    }
    for (const auto& n : g.at("nodes")) {
      const bool passage = n.at("kind") == "passage";
      c.circle(as_point(n.at("position")), passage ? 4 : 2.5,
               passage ? "fill=\"#e67e22\" stroke=\"#7f3c00\"" : "fill=\"#34495e\"");
    }
  }
  if (dump.contains("path")) c.polyline(as_points(dump["path"]), "stroke=\"#16a085\" stroke-width=\"3\"");
  if (dump.contains("waypoints") && dump["waypoints"].contains("points")) {
    for (const auto& p : as_points(dump["waypoints"]["points"])) c.circle(p, 2, "fill=\"#16a085\"");
  }
  draw_endpoints(c, sc);
  return c.finish();
}

std::string render_trace(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::string line;
  std::optional<bench::Scenario> sc;
  std::vector<Point2> traj, wps;
  std::map<std::uint32_t, geom::Pose2> final_pose;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    const auto type = j.at("type").get<std::string>();
    if (type == "header") {
      sc = bench::scenario_from_json(j.at("scenario"));
      traj.push_back(sc->start);
      if (j.contains("waypoints")) wps = as_points(j["waypoints"]);
    } else if (type == "cycle") {
      traj.push_back(as_point(j.at("pose")));
      for (auto it = j.at("moved").begin(); it != j.at("moved").end(); ++it) {
        const auto& p = it.value();
        final_pose[static_cast<std::uint32_t>(std::stoul(it.key()))] = {p.at(0).get<double>(), p.at(1).get<double>(),
                                                                          p.at(2).get<double>()};
      }
    } else if (type == "replan" && j.contains("waypoints")) {
      wps = as_points(j["waypoints"]);
    }
  }
  if (!sc) throw std::runtime_error(file.string() + ": trace has no header record");
  Canvas c(*sc);
  // Original placement as outlines, final placement filled.
  for (const auto& o : sc->obstacles) {
    if (final_pose.count(o.id.value))
      c.polygon(o.world_shape().vertices(), "fill=\"none\" stroke=\"#777\" stroke-dasharray=\"4,3\"");
  }
  draw_obstacles(c, *sc, final_pose, "");
  for (const auto& o : sc->obstacles) {
    auto it = final_pose.find(o.id.value);
    if (it == final_pose.end()) continue;
    const Point2 a = o.pose.position(), b = it->second.position();
    if (geom::distance(a, b) > 1e-3)
      c.line(a, b, "stroke=\"#c0392b\" stroke-width=\"2\" marker-end=\"url(#arrow)\"");
  }
  for (const auto& p : wps) c.circle(p, 2, "fill=\"#16a085\" fill-opacity=\"0.7\"");
  c.polyline(traj, "stroke=\"#2c3e50\" stroke-width=\"2.5\"");
  draw_endpoints(c, *sc);
  return c.finish();
}

std::string render_file(const std::filesystem::path& input) {
  if (input.extension() == ".jsonl") return render_trace(input);
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot read " + input.string());
  const auto j = json::parse(in);
  if (j.contains("type") && j["type"] == "header") return render_trace(input);
  return render_plan(j);
}

}  // namespace namo::tools
