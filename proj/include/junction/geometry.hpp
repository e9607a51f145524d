#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace junction {

using Point2 = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wrap an angle into [0, 2*pi).
double wrap_angle(double rad);

/// Absolute angular difference on the circle, in [0, pi].
double circular_abs_diff(double a, double b);

/// Unit-length planar direction. Construction normalizes; a zero vector is
/// rejected.
class Direction2 {
 public:
  explicit Direction2(const Vec2& v);
  Direction2(double dx, double dy) : Direction2(Vec2(dx, dy)) {}

  static Direction2 from_angle(double rad);

  const Vec2& vec() const { return v_; }
  double dx() const { return v_.x(); }
  double dy() const { return v_.y(); }
  double angle() const;

 private:
  Vec2 v_;
};

/// Ordered sequence of at least two points with distinct consecutive points.
class Polyline {
 public:
  explicit Polyline(std::vector<Point2> points);

  const std::vector<Point2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  double length() const;

 private:
  std::vector<Point2> points_;
};

/// Distance from p to the segment [a, b]; falls back to the endpoint when
/// the projection leaves the segment.
double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

/// Minimum distance from p to any segment of the polyline, including
/// endpoint distances, so the result is finite for every query point.
double orthogonal_distance(const Point2& p, std::span<const Point2> line);
double orthogonal_distance(const Point2& p, const Polyline& line);

/// Angle between two unit directions via the clamped inner product, in
/// [0, pi].
double angle_between(const Direction2& u, const Direction2& v);

double polyline_length(std::span<const Point2> pts);

/// Point at the given arc-length position along the polyline (clamped to
/// the valid range).
Point2 point_at_arc_length(std::span<const Point2> pts, double s);

/// Resample with the given spacing along arc length. The first and last
/// input points are preserved; the final gap may be shorter than spacing.
/// A polyline shorter than the spacing collapses to its two endpoints.
Polyline resample_equidistant(const Polyline& line, double spacing);
std::vector<Point2> resample_equidistant(std::span<const Point2> pts, double spacing);

}  // namespace junction
