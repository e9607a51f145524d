#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "junction/io.hpp"
#include "junction/lane_course.hpp"
#include "junction/topology.hpp"

namespace junction {

/// Resolved configuration for one run; embedded in every output artifact.
struct RunConfig {
  TopologyConfig stage1 = TopologyConfig::defaults();
  LaneCourseConfig stage2 = LaneCourseConfig::defaults();
  GenerationParams generation = GenerationParams::defaults();
  std::uint64_t seed = 0;
  int parallelism = 1;
  double voxel_cell = 1.0;  // meters, detection reduction grid
};

Json to_json(const RunConfig& cfg);
RunConfig parse_run_config(const Json& j);

enum class EstimateMode { Auto, Tracked, Detections };

const char* to_string(EstimateMode mode);

struct EstimateResult {
  EstimateMode mode = EstimateMode::Tracked;  // resolved mode of stage 1
  TopologyModel topology;
  double stage1_log_posterior = 0.0;
  double stage1_ms = 0.0;
  std::optional<LaneletModel> lanelets;
  double stage2_log_posterior = 0.0;
  double stage2_ms = 0.0;
};

/// Derives stage-1 measurements (track summaries or voxelized detections),
/// runs stage 1, and refines the lane course with stage 2 when trajectories
/// are present.
EstimateResult estimate_dataset(const Dataset& dataset, const RunConfig& cfg,
                                EstimateMode mode = EstimateMode::Auto,
                                std::optional<Point2> seed_center_override = std::nullopt,
                                bool run_stage2 = true);

/// Stage-1 measurement preparation, exposed for tests and tooling.
std::vector<MeasurementPoint> tracked_measurements(const Dataset& dataset,
                                                   const Point2& seed_center);
std::vector<MeasurementPoint> detection_measurements(const Dataset& dataset, double voxel_cell);

/// The split center used before any model exists: explicit override, the
/// center recorded by the generator, or the measurement centroid.
Point2 resolve_seed_center(const Dataset& dataset, std::optional<Point2> override_center);

}  // namespace junction
