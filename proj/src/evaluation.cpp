#include "junction/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace junction {

std::vector<std::pair<std::size_t, std::size_t>> match_arms(const TopologyModel& est,
                                                            const TopologyModel& gt) {
  struct Entry {
    double diff;
    std::size_t e, g;
  };
  std::vector<Entry> entries;
  for (std::size_t e = 0; e < est.arms.size(); ++e) {
    for (std::size_t g = 0; g < gt.arms.size(); ++g) {
      entries.push_back({circular_abs_diff(est.arms[e].heading, gt.arms[g].heading), e, g});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.diff != b.diff) return a.diff < b.diff;
    if (a.e != b.e) return a.e < b.e;
    return a.g < b.g;
  });
  std::vector<char> e_used(est.arms.size(), 0), g_used(gt.arms.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Entry& entry : entries) {
    if (e_used[entry.e] || g_used[entry.g]) continue;
    e_used[entry.e] = 1;
    g_used[entry.g] = 1;
    out.emplace_back(entry.e, entry.g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TopologyReport topology_report(const TopologyModel& est, const TopologyModel& gt) {
  TopologyReport r;
  r.arm_count_correct = est.arms.size() == gt.arms.size();
  r.center_error = (est.center - gt.center).norm();

  const auto matching = match_arms(est, gt);
  double angle_sum = 0.0;
  bool lanes_ok = r.arm_count_correct;
  for (const auto& [e, g] : matching) {
    angle_sum += circular_abs_diff(est.arms[e].heading, gt.arms[g].heading);
    if (est.arms[e].lanes_in.size() != gt.arms[g].lanes_in.size() ||
        est.arms[e].lanes_out.size() != gt.arms[g].lanes_out.size()) {
      lanes_ok = false;
    }
  }
  r.mean_angle_error = matching.empty() ? 0.0 : angle_sum / static_cast<double>(matching.size());
  r.lane_level_correct = lanes_ok;
  return r;
}

double center_line_deviation(std::span<const Point2> est_line, std::span<const Point2> gt_line) {
  if (est_line.empty()) throw std::invalid_argument("center_line_deviation: empty estimate");
  double sum = 0.0;
  for (const Point2& p : est_line) sum += orthogonal_distance(p, gt_line);
  return sum / static_cast<double>(est_line.size());
}

double center_line_deviation(const CenterLine& est_line, const CenterLine& gt_line) {
  return center_line_deviation(std::span<const Point2>(est_line.points),
                               std::span<const Point2>(gt_line.points));
}

LaneCourseReport lane_course_report(const TopologyModel& est_topology,
                                    const LaneletModel& est_model, const GroundTruth& gt) {
  LaneCourseReport report;
  const auto matching = match_arms(est_topology, gt.topology);
  std::map<std::size_t, std::size_t> gt_arm_of;  // est arm -> gt arm
  for (const auto& [e, g] : matching) gt_arm_of[e] = g;

  const auto counts_agree = [&](std::size_t e, DirectionClass dir) {
    const auto it = gt_arm_of.find(e);
    if (it == gt_arm_of.end()) return false;
    return est_topology.arms[e].lanes(dir).size() == gt.topology.arms[it->second].lanes(dir).size();
  };
  const auto gt_lane_of = [&](const LaneRef& est_ref) {
    return LaneRef{gt_arm_of.at(est_ref.arm), est_ref.dir, est_ref.index};
  };

  double sum = 0.0;
  for (std::size_t li = 0; li < est_model.lanelets.size(); ++li) {
    const LaneletInfo& inf = est_model.info[li];
    std::string key;
    double dev = -1.0;
    if (inf.kind == LaneletKind::ArmLane) {
      if (!counts_agree(inf.lane.arm, inf.lane.dir)) {
        ++report.skipped_lanes;
        continue;
      }
      const LaneRef gt_ref = gt_lane_of(inf.lane);
      const auto gt_ll = gt.lanelets.find_arm_lanelet(gt_ref);
      if (!gt_ll) {
        ++report.skipped_lanes;
        continue;
      }
      key = "arm" + std::to_string(gt_ref.arm) + ":" +
            (gt_ref.dir == DirectionClass::Entering ? "in" : "out") + std::to_string(gt_ref.index);
      dev = center_line_deviation(est_model.center_lines[li],
                                  gt.lanelets.center_lines[static_cast<std::size_t>(*gt_ll)]);
    } else {
      if (!counts_agree(inf.from.arm, DirectionClass::Entering) ||
          !counts_agree(inf.to.arm, DirectionClass::Leaving)) {
        ++report.skipped_lanes;
        continue;
      }
      const LaneRef gt_from = gt_lane_of(inf.from);
      const LaneRef gt_to = gt_lane_of(inf.to);
      const ConnectionSpec* spec = nullptr;
      for (const ConnectionSpec& c : gt.connections) {
        if (c.from == gt_from && c.to == gt_to) {
          spec = &c;
          break;
        }
      }
      if (spec == nullptr) {
        ++report.skipped_lanes;
        continue;
      }
      key = "conn:a" + std::to_string(gt_from.arm) + "i" + std::to_string(gt_from.index) + "-a" +
            std::to_string(gt_to.arm) + "o" + std::to_string(gt_to.index);
      dev = center_line_deviation(std::span<const Point2>(est_model.center_lines[li].points),
                                  std::span<const Point2>(spec->center_line));
    }
    report.per_lane_deviation[key] = dev;
    sum += dev;
    ++report.evaluated_lanes;
  }
  report.mean_deviation =
      report.evaluated_lanes > 0 ? sum / static_cast<double>(report.evaluated_lanes)
                                 : std::numeric_limits<double>::quiet_NaN();
  return report;
}

SuiteSummary aggregate(std::span<const TopologyReport> reports,
                       std::span<const LaneCourseReport> lane_reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  SuiteSummary s;
  s.count = reports.size();
  std::size_t arm_ok = 0, lane_ok = 0;
  double center_sum = 0.0, angle_sum = 0.0;
  for (const TopologyReport& r : reports) {
    arm_ok += r.arm_count_correct ? 1 : 0;
    lane_ok += r.lane_level_correct ? 1 : 0;
    center_sum += r.center_error;
    angle_sum += r.mean_angle_error;
  }
  s.arm_count_accuracy = static_cast<double>(arm_ok) / static_cast<double>(s.count);
  s.lane_level_accuracy = static_cast<double>(lane_ok) / static_cast<double>(s.count);
  s.mean_center_error = center_sum / static_cast<double>(s.count);
  s.mean_angle_error = angle_sum / static_cast<double>(s.count);

  double dev_sum = 0.0;
  for (const LaneCourseReport& r : lane_reports) {
    for (const auto& [key, dev] : r.per_lane_deviation) {
      dev_sum += dev;
      ++s.deviation_lanes;
    }
  }
  s.mean_deviation = s.deviation_lanes > 0
                         ? dev_sum / static_cast<double>(s.deviation_lanes)
                         : std::numeric_limits<double>::quiet_NaN();
  return s;
}

}  // namespace junction
