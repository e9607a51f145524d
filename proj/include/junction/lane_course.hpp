#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "junction/geometry.hpp"
#include "junction/mcmc.hpp"
#include "junction/measurement.hpp"
#include "junction/topology.hpp"

namespace junction {

/// Midpoint polyline of a lanelet, discretized at twice the border rate:
/// 2n-1 points for n border pairs.
struct CenterLine {
  std::vector<Point2> points;
};

/// Border polylines as indices into the owning model's node pool; border
/// points shared with an adjacent lanelet reference the same node, which
/// makes sharing symmetric and keeps merged points moving jointly.
struct Lanelet {
  int id = 0;
  std::vector<int> left;
  std::vector<int> right;
};

enum class LaneletKind { ArmLane, Connection };

struct LaneletInfo {
  LaneletKind kind = LaneletKind::ArmLane;
  LaneRef lane;         // ArmLane
  LaneRef from, to;     // Connection
};

struct LaneletModel {
  std::vector<Point2> nodes;
  std::vector<Lanelet> lanelets;
  std::vector<LaneletInfo> info;         // parallel to lanelets
  std::vector<CenterLine> center_lines;  // parallel to lanelets
  std::map<std::string, std::vector<int>> assignments;  // trajectory id -> lanelet path

  std::vector<int> node_refcounts() const;
  int shared_pair_count() const;
  std::optional<int> find_arm_lanelet(const LaneRef& lane) const;
  std::optional<int> find_connection(const LaneRef& from, const LaneRef& to) const;
};

struct LaneCourseConfig {
  double sigma_perp = 1.0;       // meters, trajectory fit
  double sigma_smooth = 0.5;     // radians, per-lane bend budget
  double tau = 1.0;              // exponent on the shared-point count
  double support_spacing = 2.0;  // meters between border support points
  double split_max = 0.6;        // meters, max split displacement
  double move_sigma = 0.3;       // meters, center-point move deviation
  double merge_radius = 1.0;     // meters, fusing candidate search radius
  std::uint64_t n_samples = 20000;
  AnnealingSchedule schedule{2.0, 0.2, 20000};
  double default_extent = 60.0;  // meters, lane length without data

  static LaneCourseConfig defaults() { return {}; }
};

/// Radius at which arm lanes begin: just outside the widest arm cross
/// section, identical for estimation and ground-truth construction.
double intersection_mouth_radius(const TopologyModel& model);

struct TrajectoryAssignment {
  LaneRef entering;
  LaneRef leaving;
};

/// Nearest direction-compatible lane by orthogonal ray distance; ties go
/// to the lower arm/lane index.
std::optional<LaneRef> nearest_lane(const TopologyModel& topology, const Point2& point,
                                    DirectionClass dir, double ray_length = 100.0);

/// Maps each split trajectory to its (entering, leaving) lane pair.
/// Trajectories with a degenerate part or a same-arm (U-turn) pair get no
/// assignment.
std::map<std::string, TrajectoryAssignment> assign_parts(
    const TopologyModel& topology,
    std::span<const std::pair<Trajectory, Trajectory>> split_parts);

/// A lane pair to join across the intersection. An empty center_line means
/// a straight interpolation between the two lane mouths.
struct ConnectionSpec {
  LaneRef from;
  LaneRef to;
  std::vector<Point2> center_line;
};

/// Radial extent of one lane group's lanelets, measured from the model
/// center along the arm axis.
using GroupSpanFn = std::function<std::pair<double, double>(std::size_t arm, DirectionClass dir)>;

/// Core lanelet construction: every topology lane becomes a lanelet with
/// support points every `spacing` meters, adjacent same-direction lanes
/// share their common border row, and each connection spec becomes a
/// lanelet welded to the mouth border pairs of its end lanes.
LaneletModel build_lanelet_geometry(const TopologyModel& topology,
                                    std::span<const ConnectionSpec> connections,
                                    const GroupSpanFn& span_of, double spacing);

/// Converts every topology lane into a lanelet with equidistant support
/// points, welds adjacent same-direction borders, and adds one straight
/// connecting lanelet per assigned lane pair. Lane extents follow the
/// assigned trajectory data.
LaneletModel initialize_lanelets(const TopologyModel& topology,
                                 const std::map<std::string, TrajectoryAssignment>& assignments,
                                 std::span<const Trajectory> trajectories,
                                 const LaneCourseConfig& cfg);

CenterLine compute_center_line(const LaneletModel& model, const Lanelet& l);
void recompute_center_lines(LaneletModel& model);

/// Moves each border-pair midpoint along its local normal to the mean
/// lateral offset of assigned trajectory points within one spacing of arc
/// length; borders translate with their midpoints.
void refine_initial(LaneletModel& model, std::span<const Trajectory> trajectories,
                    const LaneCourseConfig& cfg);

struct SlotRef {
  int lanelet = 0;
  bool left_side = true;
  int index = 0;
  bool operator==(const SlotRef&) const = default;
};

struct MergeCandidate {
  SlotRef a, b;
};

/// Border-point pairs of distinct lanelets within merge_radius that are
/// not already shared.
std::vector<MergeCandidate> merge_candidates(const LaneletModel& model,
                                             const LaneCourseConfig& cfg);

enum class CourseMutation { MoveCenter, SplitShared, MergePair };

struct CourseProposal {
  LaneletModel model;
  CourseMutation kind = CourseMutation::MoveCenter;
  bool changed = false;
};

/// One random mutation: move a center point, split a shared border pair,
/// or merge a candidate pair. Kinds with no eligible target return the
/// model unchanged.
CourseProposal propose_course_detail(const LaneletModel& model, const LaneCourseConfig& cfg,
                                     Rng& rng);
LaneletModel propose_course(const LaneletModel& model, const LaneCourseConfig& cfg, Rng& rng);

/// Sum of absolute chord-direction changes along a center line; zero for
/// fewer than three points.
double smoothness_delta(std::span<const Point2> center_line);
double smoothness_delta(const CenterLine& line);

double log_prior_course(const LaneletModel& model, const LaneCourseConfig& cfg);

/// Gaussian fit of the trajectory's points against its assigned lanelet
/// path (minimum distance over the path's center lines). Throws when the
/// trajectory has no stored assignment.
double log_likelihood_trajectory(const Trajectory& t, const LaneletModel& model,
                                 const LaneCourseConfig& cfg);

double log_posterior_course(std::span<const Trajectory> trajectories, const LaneletModel& model,
                            const LaneCourseConfig& cfg);

/// Stage-2 estimator. Preprocesses (split, assign, initialize, refine,
/// merge candidates) and anneals the course chain; the topology itself is
/// never modified.
ChainResult<LaneletModel> estimate_lane_course(const TopologyModel& topology,
                                               std::span<const Trajectory> trajectories,
                                               const LaneCourseConfig& cfg, std::uint64_t seed);

}  // namespace junction
