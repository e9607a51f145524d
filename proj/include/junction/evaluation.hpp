#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "junction/lane_course.hpp"
#include "junction/synthetic.hpp"
#include "junction/topology.hpp"

namespace junction {

struct TopologyReport {
  bool arm_count_correct = false;
  bool lane_level_correct = false;
  double center_error = 0.0;      // meters
  double mean_angle_error = 0.0;  // radians, over matched arms
};

struct LaneCourseReport {
  std::map<std::string, double> per_lane_deviation;  // meters
  double mean_deviation = 0.0;
  std::size_t evaluated_lanes = 0;
  std::size_t skipped_lanes = 0;  // lanes without a valid correspondence
};

/// Greedy minimum-angular-distance matching of estimated to ground-truth
/// arms; when the counts differ, the surplus stays unmatched.
std::vector<std::pair<std::size_t, std::size_t>> match_arms(const TopologyModel& est,
                                                            const TopologyModel& gt);

TopologyReport topology_report(const TopologyModel& est, const TopologyModel& gt);

/// Mean over the estimated points of their orthogonal distance to the
/// ground-truth line. Deliberately directional: est is always measured
/// against gt.
double center_line_deviation(std::span<const Point2> est_line, std::span<const Point2> gt_line);
double center_line_deviation(const CenterLine& est_line, const CenterLine& gt_line);

/// Per-lane center-line deviations for all correctly estimated lanes (arm
/// lanes on matched arms with agreeing lane counts, plus their observed
/// connections). Everything else is counted as skipped coverage.
LaneCourseReport lane_course_report(const TopologyModel& est_topology,
                                    const LaneletModel& est_model, const GroundTruth& gt);

struct SuiteSummary {
  std::size_t count = 0;
  double arm_count_accuracy = 0.0;   // fraction in [0, 1]
  double lane_level_accuracy = 0.0;  // fraction in [0, 1]
  double mean_center_error = 0.0;    // meters
  double mean_angle_error = 0.0;     // radians
  double mean_deviation = 0.0;       // meters; NaN when no lane reports
  std::size_t deviation_lanes = 0;
};

SuiteSummary aggregate(std::span<const TopologyReport> reports,
                       std::span<const LaneCourseReport> lane_reports = {});

}  // namespace junction
