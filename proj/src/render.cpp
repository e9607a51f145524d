#include "junction/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace junction {

namespace {

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(const Point2& p) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  bool empty() const { return !(min_x <= max_x); }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// SVG y grows downward; the world frame is mirrored on output.
std::string xy(const Point2& p) { return num(p.x()) + "," + num(-p.y()); }

void polyline_path(std::ostringstream& out, std::span<const Point2> pts, const char* style) {
  if (pts.size() < 2) return;
  out << "  <polyline fill=\"none\" " << style << " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) out << ' ';
    out << xy(pts[i]);
  }
  out << "\"/>\n";
}

void lanelet_layer(std::ostringstream& out, const LaneletModel& model, const char* border_style,
                   const char* center_style) {
  for (const Lanelet& l : model.lanelets) {
    std::vector<Point2> left, right;
    for (int id : l.left) left.push_back(model.nodes[static_cast<std::size_t>(id)]);
    for (int id : l.right) right.push_back(model.nodes[static_cast<std::size_t>(id)]);
    polyline_path(out, left, border_style);
    polyline_path(out, right, border_style);
  }
  for (const CenterLine& cl : model.center_lines) polyline_path(out, cl.points, center_style);
}

}  // namespace

std::string render_svg(const RenderInput& input) {
  Bounds bounds;
  for (const Detection& d : input.detections) bounds.add(d.position);
  for (const Trajectory& t : input.trajectories) {
    for (const Detection& d : t.points) bounds.add(d.position);
  }
  const auto add_lanelets = [&bounds](const LaneletModel& m) {
    for (const Point2& p : m.nodes) bounds.add(p);
  };
  if (input.lanelets) add_lanelets(*input.lanelets);
  if (input.ground_truth) add_lanelets(input.ground_truth->lanelets);
  if (input.topology) {
    bounds.add(input.topology->center);
    for (const LaneRef& ref : input.topology->all_lanes()) {
      const Polyline ray = lane_center_ray(*input.topology, ref);
      for (const Point2& p : ray.points()) bounds.add(p);
    }
  }
  if (bounds.empty()) bounds = {-1.0, -1.0, 1.0, 1.0};

  const double margin = 5.0;
  const double x0 = bounds.min_x - margin;
  const double y0 = -bounds.max_y - margin;
  const double w = bounds.max_x - bounds.min_x + 2 * margin;
  const double h = bounds.max_y - bounds.min_y + 2 * margin;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << num(x0) << ' '
      << num(y0) << ' ' << num(w) << ' ' << num(h) << "\">\n";

  out << " <g id=\"ground_truth\">\n";
  if (input.ground_truth) {
    lanelet_layer(out, input.ground_truth->lanelets,
                  "stroke=\"#c8c8c8\" stroke-width=\"0.25\"",
                  "stroke=\"#9ad29a\" stroke-width=\"0.2\" stroke-dasharray=\"1,1\"");
  }
  out << " </g>\n";

  out << " <g id=\"detections\">\n";
  for (const Detection& d : input.detections) {
    const char* color = "#888888";
    if (d.direction) {
      color = *d.direction == DirectionClass::Entering ? "#d08030" : "#3080d0";
    }
    out << "  <circle cx=\"" << num(d.position.x()) << "\" cy=\"" << num(-d.position.y())
        << "\" r=\"0.4\" fill=\"" << color << "\"/>\n";
  }
  out << " </g>\n";

  out << " <g id=\"trajectories\">\n";
  for (const Trajectory& t : input.trajectories) {
    std::vector<Point2> pts;
    for (const Detection& d : t.points) pts.push_back(d.position);
    polyline_path(out, pts, "stroke=\"#b070d0\" stroke-width=\"0.15\" opacity=\"0.7\"");
  }
  out << " </g>\n";

  out << " <g id=\"topology\">\n";
  if (input.topology) {
    out << "  <circle cx=\"" << num(input.topology->center.x()) << "\" cy=\""
        << num(-input.topology->center.y()) << "\" r=\"1.0\" fill=\"#d03030\"/>\n";
    for (const LaneRef& ref : input.topology->all_lanes()) {
      const char* style = ref.dir == DirectionClass::Entering
                              ? "stroke=\"#d08030\" stroke-width=\"0.3\""
                              : "stroke=\"#3080d0\" stroke-width=\"0.3\"";
      polyline_path(out, lane_center_ray(*input.topology, ref).points(), style);
    }
  }
  out << " </g>\n";

  out << " <g id=\"lanelets\">\n";
  if (input.lanelets) {
    lanelet_layer(out, *input.lanelets, "stroke=\"#303030\" stroke-width=\"0.3\"",
                  "stroke=\"#30a030\" stroke-width=\"0.25\"");
  }
  out << " </g>\n";

  out << "</svg>\n";
  return out.str();
}

}  // namespace junction
