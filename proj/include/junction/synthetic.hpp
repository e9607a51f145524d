#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "junction/lane_course.hpp"
#include "junction/measurement.hpp"
#include "junction/random.hpp"
#include "junction/topology.hpp"

namespace junction {

struct GenerationParams {
  std::vector<int> arm_counts{3, 4, 5};
  int min_lanes_per_direction = 1;
  int max_lanes_per_direction = 4;
  double min_angle = deg2rad(45.0);  // between adjacent arms
  double max_gap = 3.0;              // meters, exclusive upper bound
  double lane_width = 3.0;
  std::uint64_t seed = 0;

  // Simulation knobs.
  double arm_length = 60.0;
  double sample_step = 2.0;
  double speed = 10.0;  // meters/second
  int max_trajectories_per_lane = 6;
  double noise_sigma = 1.0;
  int clutter_count = 20;
  double clutter_radius = 80.0;
  double center_range = 50.0;  // center drawn uniformly in +-range

  static GenerationParams defaults() { return {}; }
};

/// One generated intersection: topology, the in-intersection connection
/// curve for every feasible entering/leaving lane pair, and the full
/// lanelet representation used as evaluation reference.
struct GroundTruth {
  TopologyModel topology;
  std::vector<ConnectionSpec> connections;
  LaneletModel lanelets;
};

/// Random intersection within the generation parameter ranges: uniform arm
/// count, uniform lane counts per direction, rejection-sampled headings
/// with the minimum angular separation, gaps uniform below the bound, and
/// mouth-tangent cubic connection curves.
GroundTruth generate_intersection(const GenerationParams& params, Rng& rng);

/// Vehicle routes: one to max_trajectories_per_lane per entering lane,
/// each following the ground-truth center lines to a uniformly chosen
/// leaving lane of another arm, sampled every sample_step meters at
/// constant speed.
std::vector<Trajectory> simulate_trajectories(const GroundTruth& gt,
                                              const GenerationParams& params, Rng& rng);

/// Isotropic Gaussian position noise; ids and timestamps are untouched.
std::vector<Trajectory> add_noise(std::vector<Trajectory> trajectories, double sigma, Rng& rng);

/// Flattens noisy trajectories into direction-classified detections; the
/// class switches from entering to leaving at the noiseless point closest
/// to the center.
std::vector<Detection> trajectory_detections(std::span<const Trajectory> noisy,
                                             std::span<const Trajectory> noiseless,
                                             const Point2& center);

/// Appends false detections around the center: radius uniform within
/// clutter_radius, angle and direction class uniform.
std::vector<Detection> add_clutter(std::vector<Detection> detections, const Point2& center,
                                   int count, double radius, Rng& rng);

/// Full dataset for one intersection, deterministic in params.seed.
struct Scenario {
  GroundTruth gt;
  std::vector<Trajectory> trajectories;  // noisy
  std::vector<Detection> detections;     // noisy, classified, with clutter
};

Scenario make_scenario(const GenerationParams& params);

}  // namespace junction
