#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "junction/geometry.hpp"
#include "junction/mcmc.hpp"
#include "junction/measurement.hpp"
#include "junction/random.hpp"

namespace junction {

struct Lane {
  double width = 3.0;
};

/// Identifies one lane of a model: arm index, driving direction and the
/// ordinal position within that direction group (0 is next to the gap).
struct LaneRef {
  std::size_t arm = 0;
  DirectionClass dir = DirectionClass::Entering;
  std::size_t index = 0;
  bool operator==(const LaneRef&) const = default;
  auto operator<=>(const LaneRef&) const = default;
};

/// One road branch: absolute heading, medial gap width and the entering /
/// leaving lane groups ordered from the gap outward.
struct Arm {
  double heading = 0.0;
  double gap = 0.0;
  std::vector<Lane> lanes_in;
  std::vector<Lane> lanes_out;

  std::size_t lane_count() const { return lanes_in.size() + lanes_out.size(); }
  const std::vector<Lane>& lanes(DirectionClass d) const {
    return d == DirectionClass::Entering ? lanes_in : lanes_out;
  }
  std::vector<Lane>& lanes(DirectionClass d) {
    return d == DirectionClass::Entering ? lanes_in : lanes_out;
  }
};

/// Coarse intersection model: a center point plus arms sorted by heading.
struct TopologyModel {
  Point2 center = Point2::Zero();
  std::vector<Arm> arms;

  std::size_t total_lane_count() const;
  std::vector<LaneRef> all_lanes() const;
};

struct TopologyConfig {
  double sigma_perp = 1.0;               // meters
  double sigma_ang = deg2rad(10.0);      // radians
  std::map<int, double> arm_count_prior;
  std::map<int, double> lane_count_prior;
  double min_arm_angle = deg2rad(45.0);
  double lane_width_default = 3.0;
  std::uint64_t n_samples = 5000;
  AnnealingSchedule schedule{2.0, 0.2, 5000};
  double likelihood_floor = -27.631021115928547;  // ln(1e-12)
  double ray_length = 100.0;

  static TopologyConfig defaults();
};

/// Unified scoring atom: a raw detection scores with weight 1, a track
/// summary with its reduced point count.
struct MeasurementPoint {
  Point2 position = Point2::Zero();
  std::optional<DirectionClass> direction;
  std::optional<Direction2> orientation;
  double weight = 1.0;
};

MeasurementPoint to_measurement(const Detection& d);
MeasurementPoint to_measurement(const TrackSummary& s);
std::vector<MeasurementPoint> to_measurements(std::span<const Detection> detections);
std::vector<MeasurementPoint> to_measurements(std::span<const TrackSummary> summaries);

/// Signed lateral offset of a lane center from the arm axis; positive lies
/// right of the outbound axis. Leaving lanes sit on the right, entering on
/// the left (right-hand traffic seen from the center).
double lane_lateral_offset(const Arm& arm, DirectionClass dir, std::size_t index);

/// Travel direction along the lane: entering lanes head toward the center,
/// leaving lanes away from it.
Direction2 lane_travel_direction(const Arm& arm, DirectionClass dir);

/// Straight two-point center ray of the lane, starting at the arm mouth
/// and running ray_length meters outward.
Polyline lane_center_ray(const TopologyModel& model, const LaneRef& ref,
                         double ray_length = 100.0);

/// Structural bounds every sampled model must satisfy.
bool topology_valid(const TopologyModel& model, double min_arm_angle);

/// Elementary mutations used by the proposal kernel. They normalize arm
/// order and report false when the result violates structural bounds, in
/// which case the model is left untouched.
bool rotate_arm(TopologyModel& model, std::size_t arm, double delta, double min_arm_angle);
void shift_center(TopologyModel& model, double distance, double azimuth);
void change_gap(TopologyModel& model, std::size_t arm, double delta);
bool add_arm_in_largest_gap(TopologyModel& model, const TopologyConfig& cfg);
bool add_arm_by_split(TopologyModel& model, std::size_t arm, int sign, const TopologyConfig& cfg);
bool remove_arm(TopologyModel& model, std::size_t arm);
bool add_lane(TopologyModel& model, std::size_t arm, DirectionClass dir, bool medial_side,
              const TopologyConfig& cfg);
bool remove_lane(TopologyModel& model, const LaneRef& ref);

enum class TopologyMutation { RotateArm, ShiftCenter, ChangeGap, AddRemoveArm, AddRemoveLane };

struct TopologyProposal {
  TopologyModel model;
  TopologyMutation kind;
};

/// One random mutation per call; structurally invalid draws return the
/// input model unchanged.
TopologyProposal propose_topology_detail(const TopologyModel& model, const TopologyConfig& cfg,
                                         Rng& rng);
TopologyModel propose_topology(const TopologyModel& model, const TopologyConfig& cfg, Rng& rng);

/// ln P(|A|) + ln P(|L|); counts outside the prior support collapse to the
/// likelihood floor. Gaps, angles and the center carry no prior mass.
double log_prior_topology(const TopologyModel& model, const TopologyConfig& cfg);

/// Log of the lane-marginalized likelihood of one measurement, floored at
/// cfg.likelihood_floor and scaled by the measurement weight.
double log_likelihood_point(const MeasurementPoint& z, const TopologyModel& model,
                            const TopologyConfig& cfg);

double log_posterior_topology(std::span<const MeasurementPoint> measurements,
                              const TopologyModel& model, const TopologyConfig& cfg);

/// Initial model used by the chain: four arms at the measurement centroid
/// with one lane per direction each.
TopologyModel initial_topology(std::span<const MeasurementPoint> measurements,
                               const TopologyConfig& cfg);

/// Stage-1 estimator: anneals a chain of cfg.n_samples proposals and
/// returns the maximum-a-posteriori model.
ChainResult<TopologyModel> estimate_topology(std::span<const MeasurementPoint> measurements,
                                             const TopologyConfig& cfg, std::uint64_t seed);

}  // namespace junction
