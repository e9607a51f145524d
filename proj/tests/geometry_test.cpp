#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "junction/geometry.hpp"

using namespace junction;

namespace {

// Independent oracle: minimum distance over densely sampled polyline points.
double brute_force_distance(const Point2& p, const std::vector<Point2>& line, int samples) {
  const double total = polyline_length(line);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double s = total * static_cast<double>(i) / static_cast<double>(samples);
    best = std::min(best, (p - point_at_arc_length(line, s)).norm());
  }
  return best;
}

Point2 rigid(const Point2& p, double angle, const Vec2& t) {
  return Point2(std::cos(angle) * p.x() - std::sin(angle) * p.y() + t.x(),
                std::sin(angle) * p.x() + std::cos(angle) * p.y() + t.y());
}

}  // namespace

TEST_CASE("orthogonal distance to a horizontal segment") {
  const std::vector<Point2> line{{-10.0, 0.0}, {10.0, 0.0}};
  CHECK(orthogonal_distance(Point2(0.0, 1.0), line) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("orthogonal distance of a point on the line is zero") {
  const std::vector<Point2> line{{-10.0, 0.0}, {10.0, 0.0}, {10.0, 5.0}};
  CHECK(orthogonal_distance(Point2(3.0, 0.0), line) == doctest::Approx(0.0));
  CHECK(orthogonal_distance(Point2(10.0, 2.5), line) == doctest::Approx(0.0));
}

TEST_CASE("orthogonal distance beyond the segment end uses the endpoint") {
  const std::vector<Point2> line{{0.0, 0.0}, {3.0, 0.0}};
  const double expected = std::sqrt(29.0);  // to endpoint (3, 0)
  CHECK(orthogonal_distance(Point2(5.0, 5.0), line) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(orthogonal_distance(Point2(5.0, 5.0), line) ==
        doctest::Approx(brute_force_distance(Point2(5.0, 5.0), line, 1000000)).epsilon(1e-3));
}

TEST_CASE("orthogonal distance zero iff point lies on the polyline") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<Point2> line;
    for (int k = 0; k < 4; ++k) line.emplace_back(coord(rng), coord(rng));
    std::uniform_real_distribution<double> t(0.0, polyline_length(line));
    const Point2 on = point_at_arc_length(line, t(rng));
    CHECK(orthogonal_distance(on, line) < 1e-9);
    const Point2 off = on + Vec2(0.0, 120.0);
    CHECK(orthogonal_distance(off, line) > 1e-9);
  }
}

TEST_CASE("orthogonal distance is invariant under rigid transforms") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (int i = 0; i < 200; ++i) {
    std::vector<Point2> line;
    for (int k = 0; k < 3; ++k) line.emplace_back(coord(rng), coord(rng));
    const Point2 p(coord(rng), coord(rng));
    const double a = angle(rng);
    const Vec2 t(coord(rng), coord(rng));
    std::vector<Point2> moved;
    for (const Point2& q : line) moved.push_back(rigid(q, a, t));
    CHECK(orthogonal_distance(p, line) ==
          doctest::Approx(orthogonal_distance(rigid(p, a, t), moved)).epsilon(1e-9));
  }
}

TEST_CASE("angle between directions") {
  const Direction2 ex(1.0, 0.0);
  CHECK(angle_between(ex, ex) == doctest::Approx(0.0));
  CHECK(angle_between(ex, Direction2(0.0, 1.0)) == doctest::Approx(kPi / 2));
  CHECK(angle_between(ex, Direction2(-1.0, 0.0)) == doctest::Approx(kPi));
}

TEST_CASE("angle is symmetric and obeys the triangle inequality") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (int i = 0; i < 500; ++i) {
    const Direction2 u = Direction2::from_angle(angle(rng));
    const Direction2 v = Direction2::from_angle(angle(rng));
    const Direction2 w = Direction2::from_angle(angle(rng));
    CHECK(angle_between(u, v) == doctest::Approx(angle_between(v, u)));
    CHECK(angle_between(u, w) <= angle_between(u, v) + angle_between(v, w) + 1e-12);
  }
}

TEST_CASE("direction construction normalizes and rejects zero") {
  const Direction2 d(3.0, 4.0);
  CHECK(d.vec().norm() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.dx() == doctest::Approx(0.6));
  CHECK_THROWS_AS(Direction2(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("polyline invariants are enforced") {
  CHECK_THROWS_AS(Polyline({{0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Polyline({{0.0, 0.0}, {0.0, 0.0}}), std::invalid_argument);
  CHECK(Polyline({{0.0, 0.0}, {1.0, 0.0}}).length() == doctest::Approx(1.0));
}

TEST_CASE("resampling a straight segment") {
  const Polyline line({{0.0, 0.0}, {10.0, 0.0}});
  const Polyline out = resample_equidistant(line, 2.0);
  REQUIRE(out.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(out[i].x() == doctest::Approx(std::min(2.0 * i, 10.0)));
    CHECK(out[i].y() == doctest::Approx(0.0));
  }
}

TEST_CASE("resampling with spacing beyond the length keeps the endpoints") {
  const Polyline line({{0.0, 0.0}, {1.0, 1.0}});
  const Polyline out = resample_equidistant(line, 10.0);
  REQUIRE(out.size() == 2);
  CHECK(out[0].x() == doctest::Approx(0.0));
  CHECK(out[1].y() == doctest::Approx(1.0));
}

TEST_CASE("resampling an L-shaped polyline lands on the expected arc positions") {
  // Arc length 8; spacing 3 gives points at arc {0, 3, 6, 8}, derived by
  // arc-length parameterization by hand.
  const Polyline line({{0.0, 0.0}, {5.0, 0.0}, {5.0, 3.0}});
  const Polyline out = resample_equidistant(line, 3.0);
  REQUIRE(out.size() == 4);
  CHECK((out[0] - Point2(0.0, 0.0)).norm() == doctest::Approx(0.0));
  CHECK((out[1] - Point2(3.0, 0.0)).norm() == doctest::Approx(0.0));
  CHECK((out[2] - Point2(5.0, 1.0)).norm() == doctest::Approx(0.0));
  CHECK((out[3] - Point2(5.0, 3.0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("resampling preserves arc length within one spacing") {
  // Heading-walk polylines with bounded turns; chord shortcuts at corners
  // sharper than the sampling scale would shed additional length.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> turn(-0.5, 0.5);
  std::uniform_real_distribution<double> seg(6.0, 15.0);
  std::uniform_real_distribution<double> spacing_dist(0.5, 5.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<Point2> pts{{0.0, 0.0}};
    double heading = turn(rng) * kTwoPi;
    for (int k = 0; k < 5; ++k) {
      heading += turn(rng);
      pts.push_back(pts.back() + seg(rng) * Vec2(std::cos(heading), std::sin(heading)));
    }
    const Polyline line(pts);
    const double spacing = spacing_dist(rng);
    const Polyline out = resample_equidistant(line, spacing);
    CHECK(std::fabs(out.length() - line.length()) <= spacing + 1e-9);
    CHECK((out[0] - line[0]).norm() == doctest::Approx(0.0));
    CHECK((out[out.size() - 1] - line[line.size() - 1]).norm() == doctest::Approx(0.0));
    for (std::size_t k = 0; k + 1 < out.size(); ++k) {
      CHECK(orthogonal_distance(out[k], line) < 1e-9);
    }
  }
}
