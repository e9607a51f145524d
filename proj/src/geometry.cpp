#include "junction/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace junction {

double wrap_angle(double rad) {
  double a = std::fmod(rad, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

double circular_abs_diff(double a, double b) {
  double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return d > kPi ? kTwoPi - d : d;
}

Direction2::Direction2(const Vec2& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("Direction2: zero or non-finite vector");
  }
  v_ = v / n;
}

Direction2 Direction2::from_angle(double rad) {
  return Direction2(Vec2(std::cos(rad), std::sin(rad)));
}

double Direction2::angle() const { return std::atan2(v_.y(), v_.x()); }

Polyline::Polyline(std::vector<Point2> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("Polyline: needs at least two points");
  }
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw std::invalid_argument("Polyline: non-finite coordinate");
    }
    if ((points_[i + 1] - points_[i]).squaredNorm() == 0.0) {
      throw std::invalid_argument("Polyline: consecutive points coincide");
    }
  }
  if (!points_.back().allFinite()) {
    throw std::invalid_argument("Polyline: non-finite coordinate");
  }
}

double Polyline::length() const { return polyline_length(points_); }

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double orthogonal_distance(const Point2& p, std::span<const Point2> line) {
  if (line.size() < 2) throw std::invalid_argument("orthogonal_distance: degenerate line");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
  }
  return best;
}

double orthogonal_distance(const Point2& p, const Polyline& line) {
  return orthogonal_distance(p, std::span<const Point2>(line.points()));
}

double angle_between(const Direction2& u, const Direction2& v) {
  const double dot = std::clamp(u.vec().dot(v.vec()), -1.0, 1.0);
  return std::acos(dot);
}

double polyline_length(std::span<const Point2> pts) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) len += (pts[i + 1] - pts[i]).norm();
  return len;
}

Point2 point_at_arc_length(std::span<const Point2> pts, double s) {
  if (pts.empty()) throw std::invalid_argument("point_at_arc_length: empty polyline");
  if (s <= 0.0) return pts.front();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double seg = (pts[i + 1] - pts[i]).norm();
    if (s <= seg) {
      return pts[i] + (seg > 0.0 ? s / seg : 0.0) * (pts[i + 1] - pts[i]);
    }
    s -= seg;
  }
  return pts.back();
}

std::vector<Point2> resample_equidistant(std::span<const Point2> pts, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("resample_equidistant: spacing must be > 0");
  if (pts.size() < 2) throw std::invalid_argument("resample_equidistant: degenerate line");
  const double total = polyline_length(pts);
  std::vector<Point2> out;
  if (total <= spacing) {
    out.push_back(pts.front());
    out.push_back(pts.back());
    return out;
  }
  for (double s = 0.0; s < total; s += spacing) {
    out.push_back(point_at_arc_length(pts, s));
  }
  // Keep the exact final input point; drop a sample that landed on it.
  if ((out.back() - pts.back()).norm() < 1e-12) out.pop_back();
  out.push_back(pts.back());
  return out;
}

Polyline resample_equidistant(const Polyline& line, double spacing) {
  return Polyline(resample_equidistant(std::span<const Point2>(line.points()), spacing));
}

}  // namespace junction
