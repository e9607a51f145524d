#include "junction/pipeline.hpp"

#include <chrono>
#include <stdexcept>

namespace junction {

Json to_json(const RunConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["parallelism"] = cfg.parallelism;
  j["voxel_cell"] = cfg.voxel_cell;
  j["stage1"] = to_json(cfg.stage1);
  j["stage2"] = to_json(cfg.stage2);
  j["generation"] = to_json(cfg.generation);
  return j;
}

RunConfig parse_run_config(const Json& j) {
  RunConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.parallelism = j.value("parallelism", cfg.parallelism);
  cfg.voxel_cell = j.value("voxel_cell", cfg.voxel_cell);
  if (j.contains("stage1")) cfg.stage1 = parse_topology_config(j.at("stage1"));
  if (j.contains("stage2")) cfg.stage2 = parse_lane_course_config(j.at("stage2"));
  if (j.contains("generation")) cfg.generation = parse_generation_params(j.at("generation"));
  return cfg;
}

const char* to_string(EstimateMode mode) {
  switch (mode) {
    case EstimateMode::Auto:
      return "auto";
    case EstimateMode::Tracked:
      return "tracked";
    case EstimateMode::Detections:
      return "detections";
  }
  return "auto";
}

Point2 resolve_seed_center(const Dataset& dataset, std::optional<Point2> override_center) {
  if (override_center) return *override_center;
  if (dataset.seed_center) return *dataset.seed_center;
  Point2 sum = Point2::Zero();
  std::size_t n = 0;
  for (const Trajectory& t : dataset.trajectories) {
    for (const Detection& d : t.points) {
      sum += d.position;
      ++n;
    }
  }
  for (const Detection& d : dataset.detections) {
    sum += d.position;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("resolve_seed_center: empty dataset");
  return sum / static_cast<double>(n);
}

std::vector<MeasurementPoint> tracked_measurements(const Dataset& dataset,
                                                   const Point2& seed_center) {
  std::vector<MeasurementPoint> out;
  for (const Trajectory& t : dataset.trajectories) {
    const auto [incoming, outgoing] = split_trajectory(t, seed_center);
    for (const Trajectory* part : {&incoming, &outgoing}) {
      if (part->points.size() < 2) continue;
      out.push_back(to_measurement(reduce_track(*part, seed_center)));
    }
  }
  return out;
}

std::vector<MeasurementPoint> detection_measurements(const Dataset& dataset, double voxel_cell) {
  return to_measurements(voxelize(dataset.detections, voxel_cell));
}

EstimateResult estimate_dataset(const Dataset& dataset, const RunConfig& cfg, EstimateMode mode,
                                std::optional<Point2> seed_center_override, bool run_stage2) {
  using Clock = std::chrono::steady_clock;

  EstimateResult result;
  if (mode == EstimateMode::Auto) {
    mode = dataset.trajectories.empty() ? EstimateMode::Detections : EstimateMode::Tracked;
  }
  result.mode = mode;

  std::vector<MeasurementPoint> measurements;
  if (mode == EstimateMode::Tracked) {
    if (dataset.trajectories.empty()) {
      throw std::invalid_argument("estimate_dataset: tracked mode needs trajectories");
    }
    measurements =
        tracked_measurements(dataset, resolve_seed_center(dataset, seed_center_override));
  } else {
    if (dataset.detections.empty()) {
      throw std::invalid_argument("estimate_dataset: detection mode needs detections");
    }
    measurements = detection_measurements(dataset, cfg.voxel_cell);
  }

  const auto t0 = Clock::now();
  ChainResult<TopologyModel> stage1 =
      estimate_topology(measurements, cfg.stage1, derive_seed(cfg.seed, 1));
  const auto t1 = Clock::now();
  result.topology = std::move(stage1.best_state);
  result.stage1_log_posterior = stage1.best_log_posterior;
  result.stage1_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  if (run_stage2 && !dataset.trajectories.empty()) {
    const auto t2 = Clock::now();
    ChainResult<LaneletModel> stage2 =
        estimate_lane_course(result.topology, dataset.trajectories, cfg.stage2,
                             derive_seed(cfg.seed, 2));
    const auto t3 = Clock::now();
    result.lanelets = std::move(stage2.best_state);
    result.stage2_log_posterior = stage2.best_log_posterior;
    result.stage2_ms = std::chrono::duration<double, std::milli>(t3 - t2).count();
  }
  return result;
}

}  // namespace junction
