#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <random>

#include "junction/topology.hpp"

using namespace junction;

namespace {

TopologyModel two_arm_model() {
  TopologyModel m;
  m.center = Point2::Zero();
  Arm east;
  east.heading = 0.0;
  east.gap = 0.0;
  east.lanes_in = {{3.0}};
  east.lanes_out = {{3.0}};
  Arm north;
  north.heading = kPi / 2.0;
  north.gap = 0.0;
  north.lanes_in = {{3.0}};
  north.lanes_out = {{3.0}};
  m.arms = {east, north};
  return m;
}

TopologyModel random_model(Rng& rng, const TopologyConfig& cfg) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TopologyModel m;
  m.center = Point2(unit(rng) * 40.0 - 20.0, unit(rng) * 40.0 - 20.0);
  const int arms = 2 + static_cast<int>(rng() % 4);
  for (int tries = 0; tries < 10000; ++tries) {
    m.arms.clear();
    std::vector<double> headings;
    for (int i = 0; i < arms; ++i) headings.push_back(unit(rng) * kTwoPi);
    std::sort(headings.begin(), headings.end());
    for (double h : headings) {
      Arm a;
      a.heading = h;
      a.gap = unit(rng) * 3.0;
      const int n_in = static_cast<int>(rng() % 3);
      const int n_out = n_in == 0 ? 1 + static_cast<int>(rng() % 2) : static_cast<int>(rng() % 3);
      for (int k = 0; k < n_in; ++k) a.lanes_in.push_back({3.0});
      for (int k = 0; k < n_out; ++k) a.lanes_out.push_back({3.0});
      m.arms.push_back(a);
    }
    if (topology_valid(m, cfg.min_arm_angle)) return m;
  }
  return two_arm_model();
}

MeasurementPoint point_at(double x, double y, DirectionClass dir, double weight = 1.0) {
  MeasurementPoint z;
  z.position = Point2(x, y);
  z.direction = dir;
  z.weight = weight;
  return z;
}

constexpr double kLogSqrt2Pi = 0.9189385332046727;

double log_npdf(double x, double sigma) {
  return -0.5 * (x / sigma) * (x / sigma) - std::log(sigma) - kLogSqrt2Pi;
}

}  // namespace

TEST_CASE("lane lateral offsets stack from the gap outward") {
  Arm arm;
  arm.heading = 0.0;
  arm.gap = 1.0;
  arm.lanes_in = {{3.0}};
  CHECK(lane_lateral_offset(arm, DirectionClass::Entering, 0) == doctest::Approx(-2.0));

  arm.gap = 2.0;
  arm.lanes_in = {{3.0}, {3.0}};
  arm.lanes_out = {{3.0}, {3.0}};
  CHECK(lane_lateral_offset(arm, DirectionClass::Entering, 0) == doctest::Approx(-2.5));
  CHECK(lane_lateral_offset(arm, DirectionClass::Entering, 1) == doctest::Approx(-5.5));
  CHECK(lane_lateral_offset(arm, DirectionClass::Leaving, 0) == doctest::Approx(2.5));
  CHECK(lane_lateral_offset(arm, DirectionClass::Leaving, 1) == doctest::Approx(5.5));
}

TEST_CASE("a zero gap symmetric arm has rays at plus-minus half a width") {
  Arm arm;
  arm.heading = 0.0;
  arm.gap = 0.0;
  arm.lanes_in = {{3.0}};
  arm.lanes_out = {{3.0}};
  CHECK(lane_lateral_offset(arm, DirectionClass::Entering, 0) == doctest::Approx(-1.5));
  CHECK(lane_lateral_offset(arm, DirectionClass::Leaving, 0) == doctest::Approx(1.5));
}

TEST_CASE("a single entering lane offsets by half gap plus half width") {
  TopologyModel m = two_arm_model();
  m.arms[0].gap = 1.0;
  m.arms[0].lanes_in = {{3.0}};
  const Polyline ray = lane_center_ray(m, {0, DirectionClass::Entering, 0}, 100.0);
  CHECK(lane_lateral_offset(m.arms[0], DirectionClass::Entering, 0) == doctest::Approx(-2.0));
  // Heading 0: the right normal is (0, -1), so the entering ray sits at +2 y.
  CHECK(ray[0].x() == doctest::Approx(0.0));
  CHECK(ray[0].y() == doctest::Approx(2.0));
  CHECK(ray[1].x() == doctest::Approx(100.0));
  CHECK((ray[1] - ray[0]).norm() == doctest::Approx(100.0));
}

TEST_CASE("travel direction points inward for entering lanes") {
  const TopologyModel m = two_arm_model();
  CHECK(lane_travel_direction(m.arms[0], DirectionClass::Entering).dx() == doctest::Approx(-1.0));
  CHECK(lane_travel_direction(m.arms[0], DirectionClass::Leaving).dx() == doctest::Approx(1.0));
}

TEST_CASE("forced center shift moves the center exactly") {
  TopologyModel m = two_arm_model();
  shift_center(m, 6.0, 0.0);
  CHECK(m.center.x() == doctest::Approx(6.0));
  CHECK(m.center.y() == doctest::Approx(0.0));
}

TEST_CASE("gap changes clamp at zero") {
  TopologyModel m = two_arm_model();
  m.arms[0].gap = 1.0;
  change_gap(m, 0, -1.8);
  CHECK(m.arms[0].gap == doctest::Approx(0.0));
  change_gap(m, 0, 1.8);
  CHECK(m.arms[0].gap == doctest::Approx(1.8));
}

TEST_CASE("rotations keep arms sorted and separated") {
  const TopologyConfig cfg = TopologyConfig::defaults();
  TopologyModel m = two_arm_model();
  CHECK(rotate_arm(m, 0, deg2rad(5.0), cfg.min_arm_angle));
  CHECK(m.arms[0].heading <= m.arms[1].heading);
  CHECK(topology_valid(m, cfg.min_arm_angle));
  // Rotating into the other arm violates the separation bound.
  TopologyModel tight = two_arm_model();
  CHECK_FALSE(rotate_arm(tight, 0, deg2rad(50.0), cfg.min_arm_angle));
}

TEST_CASE("proposal mutation frequencies follow the kernel thresholds") {
  const TopologyConfig cfg = TopologyConfig::defaults();
  TopologyModel m = two_arm_model();
  Rng rng(123);
  std::array<std::size_t, 5> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const TopologyProposal p = propose_topology_detail(m, cfg, rng);
    counts[static_cast<std::size_t>(p.kind)]++;
  }
  const std::array<double, 5> expected{0.4, 0.2, 0.1, 0.15, 0.15};
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(std::fabs(static_cast<double>(counts[k]) / n - expected[k]) < 0.01);
  }
}

TEST_CASE("proposals always produce structurally valid models") {
  const TopologyConfig cfg = TopologyConfig::defaults();
  Rng rng(7);
  TopologyModel m = random_model(rng, cfg);
  for (int i = 0; i < 20000; ++i) {
    m = propose_topology(m, cfg, rng);
    REQUIRE(topology_valid(m, cfg.min_arm_angle));
  }
}

TEST_CASE("log prior multiplies the two count categoricals") {
  TopologyConfig cfg = TopologyConfig::defaults();
  cfg.arm_count_prior = {{2, 0.5}, {3, 0.5}};
  cfg.lane_count_prior = {{4, 0.9}, {6, 0.1}};
  TopologyModel m = two_arm_model();  // 2 arms, 4 lanes
  CHECK(log_prior_topology(m, cfg) == doctest::Approx(std::log(0.5 * 0.9)));
  m.arms[0].lanes_in.push_back({3.0});
  m.arms[0].lanes_in.push_back({3.0});  // 6 lanes
  CHECK(log_prior_topology(m, cfg) == doctest::Approx(std::log(0.5 * 0.1)));
}

TEST_CASE("uniform priors are constant across supported models") {
  TopologyConfig cfg = TopologyConfig::defaults();
  cfg.arm_count_prior = {{2, 0.5}, {3, 0.5}};
  cfg.lane_count_prior = {{4, 0.5}, {5, 0.5}};
  TopologyModel a = two_arm_model();
  TopologyModel b = two_arm_model();
  b.arms[0].lanes_out.push_back({3.0});  // 5 lanes
  CHECK(log_prior_topology(a, cfg) == doctest::Approx(log_prior_topology(b, cfg)));
}

TEST_CASE("counts outside the prior support go to the floor") {
  TopologyConfig cfg = TopologyConfig::defaults();
  cfg.arm_count_prior = {{3, 1.0}};
  TopologyModel m = two_arm_model();  // 2 arms: unsupported
  CHECK(log_prior_topology(m, cfg) == doctest::Approx(cfg.likelihood_floor));
}

TEST_CASE("a detection on a matching ray scores both densities at their mode") {
  TopologyConfig cfg = TopologyConfig::defaults();
  TopologyModel m = two_arm_model();
  const Polyline ray = lane_center_ray(m, {0, DirectionClass::Entering, 0}, cfg.ray_length);
  MeasurementPoint z;
  z.position = ray[0] + 10.0 * Vec2(1.0, 0.0);
  z.direction = DirectionClass::Entering;
  z.orientation = lane_travel_direction(m.arms[0], DirectionClass::Entering);
  const double expected = log_npdf(0.0, cfg.sigma_perp) + log_npdf(0.0, cfg.sigma_ang);
  // The perpendicular north arm adds a negligible (but nonzero) term.
  CHECK(log_likelihood_point(z, m, cfg) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("a detection with no matching lane direction hits the floor") {
  TopologyConfig cfg = TopologyConfig::defaults();
  TopologyModel m = two_arm_model();
  m.arms[0].lanes_in.clear();
  m.arms[1].lanes_in.clear();
  const MeasurementPoint z = point_at(10.0, 1.5, DirectionClass::Entering);
  CHECK(log_likelihood_point(z, m, cfg) == doctest::Approx(cfg.likelihood_floor));
}

TEST_CASE("a detection equidistant to two matching lanes sums both terms") {
  TopologyConfig cfg = TopologyConfig::defaults();
  cfg.sigma_perp = 1.0;
  TopologyModel m = two_arm_model();
  m.arms[0].gap = 0.0;
  m.arms[0].lanes_in = {{2.0}, {2.0}};  // rays at lateral -1 and -3
  m.arms[0].lanes_out.clear();
  m.arms[1].lanes_in.clear();  // keep the north arm leaving-only
  // Lateral -2 on the east arm: heading 0 right normal is (0,-1), so y=+2.
  const MeasurementPoint z = point_at(10.0, 2.0, DirectionClass::Entering);
  const double expected = std::log(2.0 * std::exp(log_npdf(1.0, 1.0)));
  CHECK(log_likelihood_point(z, m, cfg) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("track summaries scale the log likelihood by their weight") {
  TopologyConfig cfg = TopologyConfig::defaults();
  const TopologyModel m = two_arm_model();
  MeasurementPoint z = point_at(10.0, 1.5, DirectionClass::Entering);
  const double base = log_likelihood_point(z, m, cfg);
  z.weight = 17.0;
  CHECK(log_likelihood_point(z, m, cfg) == doctest::Approx(17.0 * base).epsilon(1e-12));
}

TEST_CASE("point likelihood is invariant under common rigid transforms") {
  const TopologyConfig cfg = TopologyConfig::defaults();
  Rng rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int round = 0; round < 50; ++round) {
    TopologyModel m = random_model(rng, cfg);
    MeasurementPoint z;
    z.position = m.center + Point2(unit(rng) * 60.0 - 30.0, unit(rng) * 60.0 - 30.0);
    z.direction = unit(rng) < 0.5 ? DirectionClass::Entering : DirectionClass::Leaving;
    if (unit(rng) < 0.5) z.orientation = Direction2::from_angle(unit(rng) * kTwoPi);
    const double before = log_likelihood_point(z, m, cfg);

    const double a = unit(rng) * kTwoPi;
    const Vec2 t(unit(rng) * 20.0, unit(rng) * 20.0);
    const Eigen::Rotation2D<double> rot(a);
    TopologyModel moved = m;
    moved.center = rot * m.center + t;
    for (Arm& arm : moved.arms) arm.heading = wrap_angle(arm.heading + a);
    std::stable_sort(moved.arms.begin(), moved.arms.end(),
                     [](const Arm& x, const Arm& y) { return x.heading < y.heading; });
    MeasurementPoint zm = z;
    zm.position = rot * z.position + t;
    if (z.orientation) zm.orientation = Direction2(rot * z.orientation->vec());
    CHECK(log_likelihood_point(zm, moved, cfg) == doctest::Approx(before).epsilon(1e-9));
  }
}

TEST_CASE("estimation needs at least one measurement") {
  const TopologyConfig cfg = TopologyConfig::defaults();
  CHECK_THROWS_AS(estimate_topology({}, cfg, 1), std::invalid_argument);
}

TEST_CASE("noiseless measurements from the initial model are a fixed point") {
  TopologyConfig cfg = TopologyConfig::defaults();
  cfg.n_samples = 2000;

  // Weighted summaries on all eight lanes of the four-arm initial model,
  // symmetric so the measurement centroid equals the model center.
  const Point2 center(3.0, -2.0);
  std::vector<MeasurementPoint> zs;
  TopologyModel seed_model;
  seed_model.center = center;
  for (int k = 0; k < 4; ++k) {
    Arm arm;
    arm.heading = k * kPi / 2.0;
    arm.gap = 0.0;
    arm.lanes_in = {{cfg.lane_width_default}};
    arm.lanes_out = {{cfg.lane_width_default}};
    seed_model.arms.push_back(arm);
  }
  for (std::size_t ai = 0; ai < 4; ++ai) {
    for (const DirectionClass dir : {DirectionClass::Entering, DirectionClass::Leaving}) {
      const Polyline ray = lane_center_ray(seed_model, {ai, dir, 0}, cfg.ray_length);
      const Vec2 u = (ray[1] - ray[0]).normalized();
      for (double r : {20.0, 40.0}) {
        MeasurementPoint z;
        z.position = ray[0] + r * u;
        z.direction = dir;
        z.orientation = lane_travel_direction(seed_model.arms[ai], dir);
        z.weight = 30.0;
        zs.push_back(z);
      }
    }
  }
  Point2 centroid = Point2::Zero();
  for (const MeasurementPoint& z : zs) centroid += z.position;
  centroid /= static_cast<double>(zs.size());
  REQUIRE((centroid - center).norm() < 1e-9);

  const auto result = estimate_topology(zs, cfg, 5);
  CHECK(result.best_state.arms.size() == 4);
  CHECK((result.best_state.center - center).norm() <= 0.5);
  CHECK(result.best_state.total_lane_count() == 8);
}

TEST_CASE("two runs with the same seed agree exactly") {
  TopologyConfig cfg = TopologyConfig::defaults();
  cfg.n_samples = 500;
  std::vector<MeasurementPoint> zs;
  Rng rng(2);
  std::uniform_real_distribution<double> coord(-40.0, 40.0);
  for (int i = 0; i < 50; ++i) {
    zs.push_back(point_at(coord(rng), coord(rng),
                          i % 2 == 0 ? DirectionClass::Entering : DirectionClass::Leaving));
  }
  const auto a = estimate_topology(zs, cfg, 31);
  const auto b = estimate_topology(zs, cfg, 31);
  CHECK(a.best_log_posterior == b.best_log_posterior);
  CHECK(a.accepted_count == b.accepted_count);
  REQUIRE(a.best_state.arms.size() == b.best_state.arms.size());
  CHECK((a.best_state.center - b.best_state.center).norm() == 0.0);
  for (std::size_t i = 0; i < a.best_state.arms.size(); ++i) {
    CHECK(a.best_state.arms[i].heading == b.best_state.arms[i].heading);
  }
}
