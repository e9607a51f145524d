#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "junction/measurement.hpp"

using namespace junction;

namespace {

Detection at(double x, double y, DirectionClass dir) {
  Detection d;
  d.position = Point2(x, y);
  d.direction = dir;
  return d;
}

Trajectory straight_line(const std::string& id, const Point2& from, const Point2& to, int n) {
  Trajectory t;
  t.id = id;
  for (int i = 0; i < n; ++i) {
    Detection d;
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    d.position = from + s * (to - from);
    d.timestamp = static_cast<double>(i);
    t.points.push_back(d);
  }
  return t;
}

}  // namespace

TEST_CASE("doppler sign classifies the driving direction") {
  CHECK(classify_doppler(1.0) == DirectionClass::Leaving);
  CHECK(classify_doppler(0.0) == DirectionClass::Entering);
  CHECK(classify_doppler(-3.2) == DirectionClass::Entering);
}

TEST_CASE("doppler classification partitions the reals") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> v(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double value = v(rng);
    const DirectionClass a = classify_doppler(value);
    const DirectionClass b = classify_doppler(value);
    CHECK(a == b);
    CHECK((a == DirectionClass::Entering || a == DirectionClass::Leaving));
  }
}

TEST_CASE("voxelize merges same-cell same-class detections at their midpoint") {
  const std::vector<Detection> in{at(0.2, 0.2, DirectionClass::Leaving),
                                  at(0.8, 0.6, DirectionClass::Leaving)};
  const auto out = voxelize(in, 1.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].position.x() == doctest::Approx(0.5));
  CHECK(out[0].position.y() == doctest::Approx(0.4));
  CHECK(out[0].direction == DirectionClass::Leaving);
}

TEST_CASE("voxelize keeps different classes apart") {
  const std::vector<Detection> in{at(0.2, 0.2, DirectionClass::Leaving),
                                  at(0.8, 0.6, DirectionClass::Entering)};
  CHECK(voxelize(in, 1.0).size() == 2);
}

TEST_CASE("voxelize of empty input is empty") {
  CHECK(voxelize(std::vector<Detection>{}, 1.0).empty());
}

TEST_CASE("voxelize collapses a cell-sized cloud to its sample mean") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::vector<Detection> in;
  Point2 mean = Point2::Zero();
  for (int i = 0; i < 100; ++i) {
    Detection d = at(coord(rng), coord(rng), DirectionClass::Entering);
    mean += d.position;
    in.push_back(d);
  }
  mean /= 100.0;
  const auto out = voxelize(in, 10.0);
  REQUIRE(out.size() == 1);
  CHECK((out[0].position - mean).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("voxelize is idempotent") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int round = 0; round < 20; ++round) {
    std::vector<Detection> in;
    for (int i = 0; i < 200; ++i) {
      Detection d;
      d.position = Point2(coord(rng), coord(rng));
      if (unit(rng) < 0.5) {
        d.direction = unit(rng) < 0.5 ? DirectionClass::Entering : DirectionClass::Leaving;
      } else {
        d.orientation = Direction2::from_angle(unit(rng) * kTwoPi);
      }
      in.push_back(d);
    }
    const auto once = voxelize(in, 1.5);
    const auto twice = voxelize(once, 1.5);
    CHECK(once.size() >= twice.size());
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK((once[i].position - twice[i].position).norm() == doctest::Approx(0.0));
    }
    CHECK(once.size() <= in.size());
  }
}

TEST_CASE("splitting a straight pass keeps 6 and 5 points") {
  const Trajectory t = straight_line("a", Point2(-5.0, 0.0), Point2(5.0, 0.0), 11);
  const auto [incoming, outgoing] = split_trajectory(t, Point2(0.0, 0.0));
  CHECK(incoming.points.size() == 6);
  CHECK(outgoing.points.size() == 5);
}

TEST_CASE("a trajectory ending at the center has an empty outgoing part") {
  const Trajectory t = straight_line("a", Point2(-10.0, 0.0), Point2(0.0, 0.0), 5);
  const auto [incoming, outgoing] = split_trajectory(t, Point2(0.0, 0.0));
  CHECK(incoming.points.size() == 5);
  CHECK(outgoing.points.empty());
}

TEST_CASE("split index equals the argmin of per-point distances") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  Trajectory t;
  t.id = "curve";
  for (int i = 0; i < 50; ++i) {
    Detection d;
    const double a = 0.12 * i;
    d.position = Point2(30.0 * std::cos(a) + coord(rng) * 0.1, 20.0 * std::sin(a));
    d.timestamp = i;
    t.points.push_back(d);
  }
  const Point2 center(4.0, -3.0);
  const auto [incoming, outgoing] = split_trajectory(t, center);

  std::size_t argmin = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const double d = (t.points[i].position - center).norm();
    if (d < best) {
      best = d;
      argmin = i;
    }
  }
  CHECK(incoming.points.size() == argmin + 1);
  CHECK(incoming.points.size() + outgoing.points.size() == t.points.size());
}

TEST_CASE("split preserves every point exactly once") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> coord(-40.0, 40.0);
  for (int round = 0; round < 50; ++round) {
    Trajectory t;
    t.id = "r";
    const int n = 2 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      Detection d;
      d.position = Point2(coord(rng), coord(rng));
      d.timestamp = i;
      t.points.push_back(d);
    }
    const Point2 center(coord(rng), coord(rng));
    const auto [incoming, outgoing] = split_trajectory(t, center);
    REQUIRE(incoming.points.size() + outgoing.points.size() == t.points.size());
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const Detection& expected = t.points[i];
      const Detection& got = i < incoming.points.size()
                                 ? incoming.points[i]
                                 : outgoing.points[i - incoming.points.size()];
      CHECK((expected.position - got.position).norm() == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("reducing a two-point track") {
  const Trajectory t = straight_line("a", Point2(0.0, 0.0), Point2(2.0, 0.0), 2);
  const TrackSummary s = reduce_track(t, Point2(100.0, 0.0));
  CHECK(s.mean_position.x() == doctest::Approx(1.0));
  CHECK(s.mean_position.y() == doctest::Approx(0.0));
  CHECK(s.mean_direction.dx() == doctest::Approx(1.0));
  CHECK(s.direction_class == DirectionClass::Entering);  // heading toward the center
  CHECK(s.weight == 2);
}

TEST_CASE("reducing an equally spaced straight track lands on the centroid") {
  const Trajectory t = straight_line("a", Point2(1.0, 2.0), Point2(9.0, 8.0), 9);
  const TrackSummary s = reduce_track(t, Point2(0.0, 0.0));
  CHECK(s.mean_position.x() == doctest::Approx(5.0));
  CHECK(s.mean_position.y() == doctest::Approx(5.0));
  CHECK(s.direction_class == DirectionClass::Leaving);  // heading away from the center
}

TEST_CASE("the mean heading of a quarter arc bisects its chord") {
  // Unit tangents of equal arc steps are symmetric around the chord
  // direction, so the circular mean equals the chord direction exactly.
  Trajectory t;
  t.id = "arc";
  const int n = 90;
  for (int i = 0; i < n; ++i) {
    const double a = (kPi / 2.0) * static_cast<double>(i) / static_cast<double>(n - 1);
    Detection d;
    d.position = Point2(std::cos(a), std::sin(a));
    d.timestamp = i;
    t.points.push_back(d);
  }
  const TrackSummary s = reduce_track(t, Point2(0.0, 0.0));
  CHECK(s.mean_direction.dx() == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(s.mean_direction.dy() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("reduce rejects degenerate parts") {
  Trajectory t;
  t.id = "x";
  Detection d;
  d.position = Point2(1.0, 1.0);
  d.timestamp = 0.0;
  t.points.push_back(d);
  CHECK_THROWS_AS(reduce_track(t, Point2(0.0, 0.0)), std::invalid_argument);
}
