#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "junction/evaluation.hpp"
#include "junction/lane_course.hpp"
#include "junction/measurement.hpp"
#include "junction/synthetic.hpp"
#include "junction/topology.hpp"

namespace junction {

using Json = nlohmann::ordered_json;

/// Measurement input for one intersection. Detections carry either a
/// direction class (`dir`) or a heading vector; an optional `doppler`
/// value classifies the direction and gates static returns on ingest.
struct Dataset {
  std::uint64_t seed = 0;
  std::optional<Point2> seed_center;
  std::vector<Detection> detections;
  std::vector<Trajectory> trajectories;
};

Json to_json(const Dataset& dataset);
Dataset parse_dataset(const Json& j);
Dataset load_dataset(const std::string& path);

Json to_json(const TopologyModel& model);
TopologyModel parse_topology(const Json& j);

Json to_json(const LaneletModel& model);
LaneletModel parse_lanelet_model(const Json& j);

Json to_json(const GroundTruth& gt);
GroundTruth parse_ground_truth(const Json& j);
GroundTruth load_ground_truth(const std::string& path);

Json to_json(const TopologyConfig& cfg);
TopologyConfig parse_topology_config(const Json& j);

Json to_json(const LaneCourseConfig& cfg);
LaneCourseConfig parse_lane_course_config(const Json& j);

Json to_json(const GenerationParams& params);
GenerationParams parse_generation_params(const Json& j);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
Json load_json(const std::string& path);

/// One benchmark row per intersection.
struct BenchmarkRow {
  std::string id;
  TopologyReport topology;
  double mean_deviation = std::numeric_limits<double>::quiet_NaN();
  double stage1_ms = 0.0;
  double stage2_ms = 0.0;
  std::string error;  // non-empty when this intersection failed
};

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

}  // namespace junction
