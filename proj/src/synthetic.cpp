#include "junction/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace junction {

namespace {

Vec2 axis_of(double heading) { return Vec2(std::cos(heading), std::sin(heading)); }

Vec2 right_normal_of(double heading) { return Vec2(std::sin(heading), -std::cos(heading)); }

Point2 lane_mouth_center(const TopologyModel& topo, const LaneRef& ref, double mouth) {
  const Arm& arm = topo.arms[ref.arm];
  return topo.center + lane_lateral_offset(arm, ref.dir, ref.index) * right_normal_of(arm.heading) +
         mouth * axis_of(arm.heading);
}

std::vector<Point2> hermite_curve(const Point2& p0, const Vec2& t0, const Point2& p1,
                                  const Vec2& t1, double step) {
  const double chord = (p1 - p0).norm();
  const Vec2 m0 = chord * t0;
  const Vec2 m1 = chord * t1;
  const int n = std::max(2, static_cast<int>(std::ceil(chord / step)) + 1);
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    out.push_back(h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1);
  }
  return out;
}

}  // namespace

GroundTruth generate_intersection(const GenerationParams& params, Rng& rng) {
  if (params.arm_counts.empty()) throw std::invalid_argument("generate_intersection: no arm counts");

  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GroundTruth gt;
  std::uniform_real_distribution<double> center_dist(-params.center_range, params.center_range);
  gt.topology.center = Point2(center_dist(rng), center_dist(rng));

  std::uniform_int_distribution<std::size_t> count_pick(0, params.arm_counts.size() - 1);
  const int n_arms = params.arm_counts[count_pick(rng)];

  std::uniform_real_distribution<double> angle_dist(0.0, kTwoPi);
  std::vector<double> headings(static_cast<std::size_t>(n_arms));
  bool ok = false;
  for (int attempt = 0; attempt < 100000 && !ok; ++attempt) {
    for (double& h : headings) h = angle_dist(rng);
    std::sort(headings.begin(), headings.end());
    ok = true;
    for (std::size_t i = 0; i < headings.size(); ++i) {
      double gap = headings[(i + 1) % headings.size()] - headings[i];
      if (i + 1 == headings.size()) gap += kTwoPi;
      if (gap < params.min_angle) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) throw std::runtime_error("generate_intersection: heading rejection sampling exhausted");

  std::uniform_int_distribution<int> lane_pick(params.min_lanes_per_direction,
                                               params.max_lanes_per_direction);
  std::uniform_real_distribution<double> gap_dist(0.0, params.max_gap);
  for (double h : headings) {
    Arm arm;
    arm.heading = h;
    arm.gap = gap_dist(rng);
    const int n_in = lane_pick(rng);
    const int n_out = lane_pick(rng);
    arm.lanes_in.assign(static_cast<std::size_t>(n_in), Lane{params.lane_width});
    arm.lanes_out.assign(static_cast<std::size_t>(n_out), Lane{params.lane_width});
    gt.topology.arms.push_back(std::move(arm));
  }

  // Connection curve for every feasible lane pair: tangent-continuous cubic
  // between the two mouth points.
  const double mouth = intersection_mouth_radius(gt.topology);
  for (std::size_t ai = 0; ai < gt.topology.arms.size(); ++ai) {
    for (std::size_t ei = 0; ei < gt.topology.arms[ai].lanes_in.size(); ++ei) {
      const LaneRef from{ai, DirectionClass::Entering, ei};
      for (std::size_t bi = 0; bi < gt.topology.arms.size(); ++bi) {
        if (bi == ai) continue;
        for (std::size_t lo = 0; lo < gt.topology.arms[bi].lanes_out.size(); ++lo) {
          const LaneRef to{bi, DirectionClass::Leaving, lo};
          ConnectionSpec spec;
          spec.from = from;
          spec.to = to;
          spec.center_line = hermite_curve(
              lane_mouth_center(gt.topology, from, mouth), -axis_of(gt.topology.arms[ai].heading),
              lane_mouth_center(gt.topology, to, mouth), axis_of(gt.topology.arms[bi].heading),
              1.0);
          gt.connections.push_back(std::move(spec));
        }
      }
    }
  }

  const GroupSpanFn span_of = [&](std::size_t, DirectionClass) {
    return std::pair<double, double>{mouth, mouth + params.arm_length};
  };
  gt.lanelets = build_lanelet_geometry(gt.topology, gt.connections, span_of, 2.0);
  return gt;
}

std::vector<Trajectory> simulate_trajectories(const GroundTruth& gt,
                                              const GenerationParams& params, Rng& rng) {
  const TopologyModel& topo = gt.topology;
  const double mouth = intersection_mouth_radius(topo);

  std::vector<LaneRef> leaving;
  for (std::size_t ai = 0; ai < topo.arms.size(); ++ai) {
    for (std::size_t li = 0; li < topo.arms[ai].lanes_out.size(); ++li) {
      leaving.push_back({ai, DirectionClass::Leaving, li});
    }
  }

  const auto connection_of = [&gt](const LaneRef& from, const LaneRef& to) -> const ConnectionSpec& {
    for (const ConnectionSpec& c : gt.connections) {
      if (c.from == from && c.to == to) return c;
    }
    throw std::logic_error("simulate_trajectories: missing connection");
  };

  std::vector<Trajectory> out;
  int next_id = 0;
  std::map<std::pair<std::size_t, std::size_t>, int> leaving_load;
  std::uniform_int_distribution<int> route_count(1, params.max_trajectories_per_lane);

  const auto drive = [&](const LaneRef& from, const LaneRef& to) {
    const Vec2 u_in = axis_of(topo.arms[from.arm].heading);
    const Vec2 u_out = axis_of(topo.arms[to.arm].heading);
    const Point2 mouth_in = lane_mouth_center(topo, from, mouth);
    const Point2 mouth_out = lane_mouth_center(topo, to, mouth);

    std::vector<Point2> path;
    path.push_back(mouth_in + params.arm_length * u_in);
    path.push_back(mouth_in);
    for (const Point2& p : connection_of(from, to).center_line) {
      if ((p - path.back()).squaredNorm() > 0.0) path.push_back(p);
    }
    if ((mouth_out - path.back()).squaredNorm() > 0.0) path.push_back(mouth_out);
    path.push_back(mouth_out + params.arm_length * u_out);

    const std::vector<Point2> pts =
        resample_equidistant(std::span<const Point2>(path), params.sample_step);

    Trajectory t;
    t.id = "t" + std::to_string(next_id++);
    double arc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) arc += (pts[i] - pts[i - 1]).norm();
      Detection d;
      d.position = pts[i];
      d.timestamp = arc / params.speed;
      const Point2 a = pts[i == 0 ? 0 : i - 1];
      const Point2 b = pts[std::min(i + 1, pts.size() - 1)];
      if ((b - a).squaredNorm() > 0.0) d.orientation = Direction2(Vec2(b - a));
      t.points.push_back(std::move(d));
    }
    leaving_load[{to.arm, to.index}]++;
    out.push_back(std::move(t));
  };

  for (std::size_t ai = 0; ai < topo.arms.size(); ++ai) {
    for (std::size_t ei = 0; ei < topo.arms[ai].lanes_in.size(); ++ei) {
      const LaneRef from{ai, DirectionClass::Entering, ei};
      const int n_routes = route_count(rng);
      for (int r = 0; r < n_routes; ++r) {
        std::vector<LaneRef> reachable;
        for (const LaneRef& l : leaving) {
          if (l.arm != ai && leaving_load[{l.arm, l.index}] < params.max_trajectories_per_lane) {
            reachable.push_back(l);
          }
        }
        if (reachable.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, reachable.size() - 1);
        drive(from, reachable[pick(rng)]);
      }
    }
  }

  // Every leaving lane gets at least one route so lane counts stay
  // observable; entering lanes already have one to six each.
  for (const LaneRef& l : leaving) {
    if (leaving_load[{l.arm, l.index}] > 0) continue;
    std::vector<LaneRef> sources;
    for (std::size_t ai = 0; ai < topo.arms.size(); ++ai) {
      if (ai == l.arm) continue;
      for (std::size_t ei = 0; ei < topo.arms[ai].lanes_in.size(); ++ei) {
        sources.push_back({ai, DirectionClass::Entering, ei});
      }
    }
    if (sources.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, sources.size() - 1);
    drive(sources[pick(rng)], l);
  }
  return out;
}

std::vector<Trajectory> add_noise(std::vector<Trajectory> trajectories, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return trajectories;
  std::normal_distribution<double> noise(0.0, sigma);
  for (Trajectory& t : trajectories) {
    for (Detection& d : t.points) {
      const double dx = noise(rng);
      const double dy = noise(rng);
      d.position += Vec2(dx, dy);
    }
  }
  return trajectories;
}

std::vector<Detection> trajectory_detections(std::span<const Trajectory> noisy,
                                             std::span<const Trajectory> noiseless,
                                             const Point2& center) {
  if (noisy.size() != noiseless.size()) {
    throw std::invalid_argument("trajectory_detections: trajectory lists differ");
  }
  std::vector<Detection> out;
  for (std::size_t ti = 0; ti < noisy.size(); ++ti) {
    const auto [incoming, outgoing] = split_trajectory(noiseless[ti], center);
    const std::size_t split = incoming.points.size();  // first leaving index
    for (std::size_t i = 0; i < noisy[ti].points.size(); ++i) {
      Detection d;
      d.position = noisy[ti].points[i].position;
      d.timestamp = noisy[ti].points[i].timestamp;
      d.direction = i < split ? DirectionClass::Entering : DirectionClass::Leaving;
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::vector<Detection> add_clutter(std::vector<Detection> detections, const Point2& center,
                                   int count, double radius, Rng& rng) {
  if (count < 0) throw std::invalid_argument("add_clutter: count must be >= 0");
  std::uniform_real_distribution<double> r_dist(0.0, radius);
  std::uniform_real_distribution<double> a_dist(0.0, kTwoPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    const double r = r_dist(rng);
    const double a = a_dist(rng);
    Detection d;
    d.position = center + r * Vec2(std::cos(a), std::sin(a));
    d.direction = unit(rng) < 0.5 ? DirectionClass::Entering : DirectionClass::Leaving;
    detections.push_back(std::move(d));
  }
  return detections;
}

Scenario make_scenario(const GenerationParams& params) {
  Rng rng(params.seed);
  Scenario s;
  s.gt = generate_intersection(params, rng);
  const std::vector<Trajectory> clean = simulate_trajectories(s.gt, params, rng);
  s.trajectories = add_noise(clean, params.noise_sigma, rng);
  s.detections = trajectory_detections(s.trajectories, clean, s.gt.topology.center);
  s.detections = add_clutter(std::move(s.detections), s.gt.topology.center, params.clutter_count,
                             params.clutter_radius, rng);
  return s;
}

}  // namespace junction
