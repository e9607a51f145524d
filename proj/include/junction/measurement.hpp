#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "junction/geometry.hpp"

namespace junction {

/// Coarse driving direction relative to the intersection.
enum class DirectionClass { Entering, Leaving };

inline const char* to_string(DirectionClass d) {
  return d == DirectionClass::Entering ? "entering" : "leaving";
}

/// A single timestamped point observation of another vehicle. Carries
/// either a direction class (radar/camera style) or an orientation vector
/// (lidar/tracking style), never both.
struct Detection {
  Point2 position = Point2::Zero();
  std::optional<double> timestamp;
  std::optional<DirectionClass> direction;
  std::optional<Direction2> orientation;
};

/// Time-ordered, identified sequence of detections. Parts produced by
/// split_trajectory may be shorter than two points; is_valid() marks
/// sequences usable as full measurements.
struct Trajectory {
  std::string id;
  std::vector<Detection> points;

  bool is_valid() const;
};

/// A trajectory part reduced to one weighted point measurement.
struct TrackSummary {
  Point2 mean_position = Point2::Zero();
  Direction2 mean_direction{1.0, 0.0};
  DirectionClass direction_class = DirectionClass::Entering;
  std::string source_id;
  std::size_t weight = 0;
};

/// Sign heuristic on the radial Doppler velocity: positive means the
/// object moves away (leaving), otherwise it is entering.
DirectionClass classify_doppler(double v_doppler);

/// Filter threshold applied on ingest to suppress static returns; see
/// parse_dataset in io.hpp.
constexpr double kDopplerStaticThreshold = 0.5;

/// Grid reduction: detections in the same axis-aligned cell that share a
/// direction class merge into one detection at their mean position with a
/// circular-mean orientation. Output order follows first occurrence, so
/// the operation is deterministic and idempotent.
std::vector<Detection> voxelize(std::span<const Detection> detections, double cell);

/// Cut at the point closest to `center`. The split point goes to the
/// incoming part; either part may be degenerate when the minimum sits at
/// an end of the trajectory.
std::pair<Trajectory, Trajectory> split_trajectory(const Trajectory& t, const Point2& center);

/// Reduce a trajectory part to mean position, circular-mean step heading
/// and a direction class relative to the split center (heading toward it
/// means entering). Throws when no heading is derivable.
TrackSummary reduce_track(const Trajectory& part, const Point2& split_center);

}  // namespace junction
