#pragma once

#include <optional>
#include <string>
#include <vector>

#include "junction/lane_course.hpp"
#include "junction/measurement.hpp"
#include "junction/synthetic.hpp"
#include "junction/topology.hpp"

namespace junction {

/// Layers drawn into one shared world frame; any subset may be present.
struct RenderInput {
  std::vector<Detection> detections;
  std::vector<Trajectory> trajectories;
  std::optional<TopologyModel> topology;
  std::optional<LaneletModel> lanelets;
  std::optional<GroundTruth> ground_truth;
};

/// Deterministic SVG 1.1 document with one layer group per input kind.
std::string render_svg(const RenderInput& input);

}  // namespace junction
