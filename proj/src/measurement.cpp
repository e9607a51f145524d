#include "junction/measurement.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace junction {

bool Trajectory::is_valid() const {
  if (points.size() < 2) return false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].timestamp.has_value()) return false;
    if (i > 0 && !(*points[i].timestamp > *points[i - 1].timestamp)) return false;
  }
  return true;
}

DirectionClass classify_doppler(double v_doppler) {
  if (!std::isfinite(v_doppler)) throw std::invalid_argument("classify_doppler: non-finite velocity");
  return v_doppler > 0.0 ? DirectionClass::Leaving : DirectionClass::Entering;
}

namespace {

struct CellKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  int tag = 0;  // 0 entering, 1 leaving, 2 orientation-only
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ULL;
    };
    mix(static_cast<std::uint64_t>(k.ix));
    mix(static_cast<std::uint64_t>(k.iy));
    mix(static_cast<std::uint64_t>(k.tag));
    return static_cast<std::size_t>(h);
  }
};

struct CellAccum {
  Point2 position_sum = Point2::Zero();
  Vec2 orientation_sum = Vec2::Zero();
  double timestamp_sum = 0.0;
  std::size_t n = 0;
  std::size_t n_orient = 0;
  std::size_t n_time = 0;
  std::optional<DirectionClass> direction;
  std::optional<Direction2> first_orientation;
};

}  // namespace

std::vector<Detection> voxelize(std::span<const Detection> detections, double cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("voxelize: cell must be > 0");

  std::unordered_map<CellKey, std::size_t, CellKeyHash> index;
  std::vector<CellAccum> groups;
  std::vector<CellKey> order;

  for (const Detection& d : detections) {
    CellKey key;
    key.ix = static_cast<std::int64_t>(std::floor(d.position.x() / cell));
    key.iy = static_cast<std::int64_t>(std::floor(d.position.y() / cell));
    key.tag = d.direction.has_value() ? (*d.direction == DirectionClass::Leaving ? 1 : 0) : 2;

    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    CellAccum& g = groups[it->second];
    g.position_sum += d.position;
    g.n += 1;
    if (d.direction) g.direction = d.direction;
    if (d.orientation) {
      g.orientation_sum += d.orientation->vec();
      g.n_orient += 1;
      if (!g.first_orientation) g.first_orientation = d.orientation;
    }
    if (d.timestamp) {
      g.timestamp_sum += *d.timestamp;
      g.n_time += 1;
    }
  }

  std::vector<Detection> out;
  out.reserve(groups.size());
  for (const CellAccum& g : groups) {
    Detection d;
    d.position = g.position_sum / static_cast<double>(g.n);
    d.direction = g.direction;
    if (g.n_orient > 0) {
      if (g.orientation_sum.norm() > 1e-9) {
        d.orientation = Direction2(g.orientation_sum);
      } else {
        d.orientation = g.first_orientation;  // degenerate circular mean
      }
    }
    if (g.n_time > 0) d.timestamp = g.timestamp_sum / static_cast<double>(g.n_time);
    out.push_back(d);
  }
  return out;
}

std::pair<Trajectory, Trajectory> split_trajectory(const Trajectory& t, const Point2& center) {
  Trajectory incoming{t.id, {}};
  Trajectory outgoing{t.id, {}};
  if (t.points.empty()) return {incoming, outgoing};

  std::size_t split = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const double d = (t.points[i].position - center).squaredNorm();
    if (d < best) {
      best = d;
      split = i;
    }
  }
  incoming.points.assign(t.points.begin(), t.points.begin() + static_cast<std::ptrdiff_t>(split) + 1);
  outgoing.points.assign(t.points.begin() + static_cast<std::ptrdiff_t>(split) + 1, t.points.end());
  return {incoming, outgoing};
}

TrackSummary reduce_track(const Trajectory& part, const Point2& split_center) {
  if (part.points.size() < 2) {
    throw std::invalid_argument("reduce_track: need at least two points to derive a heading");
  }
  Point2 mean = Point2::Zero();
  for (const Detection& d : part.points) mean += d.position;
  mean /= static_cast<double>(part.points.size());

  Vec2 heading_sum = Vec2::Zero();
  for (std::size_t i = 0; i + 1 < part.points.size(); ++i) {
    const Vec2 step = part.points[i + 1].position - part.points[i].position;
    const double n = step.norm();
    if (n > 0.0) heading_sum += step / n;
  }
  if (!(heading_sum.norm() > 1e-12)) {
    throw std::invalid_argument("reduce_track: degenerate trajectory, no mean heading");
  }

  TrackSummary s;
  s.mean_position = mean;
  s.mean_direction = Direction2(heading_sum);
  s.direction_class = s.mean_direction.vec().dot(split_center - mean) >= 0.0
                          ? DirectionClass::Entering
                          : DirectionClass::Leaving;
  s.source_id = part.id;
  s.weight = part.points.size();
  return s;
}

}  // namespace junction
