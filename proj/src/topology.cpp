#include "junction/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace junction {

namespace {

void normalize_arms(TopologyModel& model) {
  for (Arm& a : model.arms) a.heading = wrap_angle(a.heading);
  std::stable_sort(model.arms.begin(), model.arms.end(),
                   [](const Arm& a, const Arm& b) { return a.heading < b.heading; });
}

Vec2 axis_of(double heading) { return Vec2(std::cos(heading), std::sin(heading)); }

// Right-of-outbound normal; lateral lane offsets are measured along it.
Vec2 right_normal_of(double heading) { return Vec2(std::sin(heading), -std::cos(heading)); }

}  // namespace

std::size_t TopologyModel::total_lane_count() const {
  std::size_t n = 0;
  for (const Arm& a : arms) n += a.lane_count();
  return n;
}

std::vector<LaneRef> TopologyModel::all_lanes() const {
  std::vector<LaneRef> refs;
  refs.reserve(total_lane_count());
  for (std::size_t ai = 0; ai < arms.size(); ++ai) {
    for (std::size_t i = 0; i < arms[ai].lanes_in.size(); ++i) {
      refs.push_back({ai, DirectionClass::Entering, i});
    }
    for (std::size_t i = 0; i < arms[ai].lanes_out.size(); ++i) {
      refs.push_back({ai, DirectionClass::Leaving, i});
    }
  }
  return refs;
}

TopologyConfig TopologyConfig::defaults() {
  TopologyConfig cfg;
  cfg.arm_count_prior = {{2, 0.15}, {3, 0.40}, {4, 0.30}, {5, 0.15}};
  // Categorical with mode 4 and geometric tails, wide enough to cover the
  // totals reachable with up to four lanes per direction on five arms.
  double sum = 0.0;
  for (int k = 2; k <= 40; ++k) sum += std::pow(0.7, std::abs(k - 4));
  for (int k = 2; k <= 40; ++k) cfg.lane_count_prior[k] = std::pow(0.7, std::abs(k - 4)) / sum;
  return cfg;
}

MeasurementPoint to_measurement(const Detection& d) {
  MeasurementPoint m;
  m.position = d.position;
  m.direction = d.direction;
  m.orientation = d.orientation;
  m.weight = 1.0;
  return m;
}

MeasurementPoint to_measurement(const TrackSummary& s) {
  MeasurementPoint m;
  m.position = s.mean_position;
  m.direction = s.direction_class;
  m.orientation = s.mean_direction;
  m.weight = static_cast<double>(s.weight);
  return m;
}

std::vector<MeasurementPoint> to_measurements(std::span<const Detection> detections) {
  std::vector<MeasurementPoint> out;
  out.reserve(detections.size());
  for (const Detection& d : detections) out.push_back(to_measurement(d));
  return out;
}

std::vector<MeasurementPoint> to_measurements(std::span<const TrackSummary> summaries) {
  std::vector<MeasurementPoint> out;
  out.reserve(summaries.size());
  for (const TrackSummary& s : summaries) out.push_back(to_measurement(s));
  return out;
}

double lane_lateral_offset(const Arm& arm, DirectionClass dir, std::size_t index) {
  const std::vector<Lane>& group = arm.lanes(dir);
  if (index >= group.size()) throw std::out_of_range("lane_lateral_offset: no such lane");
  double off = arm.gap * 0.5;
  for (std::size_t i = 0; i < index; ++i) off += group[i].width;
  off += group[index].width * 0.5;
  return dir == DirectionClass::Leaving ? off : -off;
}

Direction2 lane_travel_direction(const Arm& arm, DirectionClass dir) {
  const Vec2 u = axis_of(arm.heading);
  return Direction2(dir == DirectionClass::Leaving ? u : Vec2(-u));
}

Polyline lane_center_ray(const TopologyModel& model, const LaneRef& ref, double ray_length) {
  if (ref.arm >= model.arms.size()) throw std::out_of_range("lane_center_ray: no such arm");
  const Arm& arm = model.arms[ref.arm];
  const double off = lane_lateral_offset(arm, ref.dir, ref.index);
  const Point2 mouth = model.center + off * right_normal_of(arm.heading);
  return Polyline({mouth, mouth + ray_length * axis_of(arm.heading)});
}

bool topology_valid(const TopologyModel& model, double min_arm_angle) {
  if (model.arms.size() < 2) return false;
  for (const Arm& a : model.arms) {
    if (a.lane_count() == 0) return false;
    if (a.gap < 0.0) return false;
    if (a.heading < 0.0 || a.heading >= kTwoPi) return false;
    for (const Lane& l : a.lanes_in)
      if (!(l.width > 0.0)) return false;
    for (const Lane& l : a.lanes_out)
      if (!(l.width > 0.0)) return false;
  }
  for (std::size_t i = 0; i + 1 < model.arms.size(); ++i) {
    if (model.arms[i].heading > model.arms[i + 1].heading) return false;
  }
  for (std::size_t i = 0; i < model.arms.size(); ++i) {
    const double a = model.arms[i].heading;
    const double b = model.arms[(i + 1) % model.arms.size()].heading;
    double gap = b - a;
    if (i + 1 == model.arms.size()) gap += kTwoPi;
    if (gap < min_arm_angle) return false;
  }
  return true;
}

bool rotate_arm(TopologyModel& model, std::size_t arm, double delta, double min_arm_angle) {
  TopologyModel candidate = model;
  candidate.arms[arm].heading = wrap_angle(candidate.arms[arm].heading + delta);
  normalize_arms(candidate);
  if (!topology_valid(candidate, min_arm_angle)) return false;
  model = std::move(candidate);
  return true;
}

void shift_center(TopologyModel& model, double distance, double azimuth) {
  model.center += distance * Vec2(std::cos(azimuth), std::sin(azimuth));
}

void change_gap(TopologyModel& model, std::size_t arm, double delta) {
  model.arms[arm].gap = std::max(0.0, model.arms[arm].gap + delta);
}

bool add_arm_in_largest_gap(TopologyModel& model, const TopologyConfig& cfg) {
  TopologyModel candidate = model;
  std::size_t best = 0;
  double best_gap = -1.0;
  for (std::size_t i = 0; i < candidate.arms.size(); ++i) {
    const double a = candidate.arms[i].heading;
    double b = candidate.arms[(i + 1) % candidate.arms.size()].heading;
    if (i + 1 == candidate.arms.size()) b += kTwoPi;
    if (b - a > best_gap) {
      best_gap = b - a;
      best = i;
    }
  }
  Arm arm;
  arm.heading = wrap_angle(candidate.arms[best].heading + best_gap * 0.5);
  arm.gap = 0.0;
  arm.lanes_in.push_back({cfg.lane_width_default});
  arm.lanes_out.push_back({cfg.lane_width_default});
  candidate.arms.push_back(arm);
  normalize_arms(candidate);
  if (!topology_valid(candidate, cfg.min_arm_angle)) return false;
  model = std::move(candidate);
  return true;
}

bool add_arm_by_split(TopologyModel& model, std::size_t arm, int sign, const TopologyConfig& cfg) {
  TopologyModel candidate = model;
  Arm copy = candidate.arms[arm];
  copy.heading = wrap_angle(copy.heading + (sign >= 0 ? 1.0 : -1.0) * cfg.min_arm_angle);
  candidate.arms.push_back(copy);
  normalize_arms(candidate);
  if (!topology_valid(candidate, cfg.min_arm_angle)) return false;
  model = std::move(candidate);
  return true;
}

bool remove_arm(TopologyModel& model, std::size_t arm) {
  if (model.arms.size() <= 2) return false;
  model.arms.erase(model.arms.begin() + static_cast<std::ptrdiff_t>(arm));
  return true;
}

bool add_lane(TopologyModel& model, std::size_t arm, DirectionClass dir, bool medial_side,
              const TopologyConfig& cfg) {
  std::vector<Lane>& group = model.arms[arm].lanes(dir);
  if (medial_side) {
    group.insert(group.begin(), {cfg.lane_width_default});
  } else {
    group.push_back({cfg.lane_width_default});
  }
  return true;
}

bool remove_lane(TopologyModel& model, const LaneRef& ref) {
  Arm& arm = model.arms[ref.arm];
  if (arm.lane_count() <= 1) return false;
  std::vector<Lane>& group = arm.lanes(ref.dir);
  group.erase(group.begin() + static_cast<std::ptrdiff_t>(ref.index));
  return true;
}

TopologyProposal propose_topology_detail(const TopologyModel& model, const TopologyConfig& cfg,
                                         Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double omega = unit(rng);
  TopologyProposal out{model, TopologyMutation::RotateArm};

  auto pick_index = [&rng](std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(rng);
  };

  if (omega < 0.4) {
    out.kind = TopologyMutation::RotateArm;
    const std::size_t arm = pick_index(model.arms.size());
    std::uniform_real_distribution<double> da(-deg2rad(6.0), deg2rad(6.0));
    rotate_arm(out.model, arm, da(rng), cfg.min_arm_angle);
  } else if (omega < 0.6) {
    out.kind = TopologyMutation::ShiftCenter;
    std::uniform_real_distribution<double> dc(0.0, 6.0);
    std::uniform_real_distribution<double> phi(0.0, kTwoPi);
    const double dist = dc(rng);
    const double az = phi(rng);
    shift_center(out.model, dist, az);
  } else if (omega < 0.7) {
    out.kind = TopologyMutation::ChangeGap;
    const std::size_t arm = pick_index(model.arms.size());
    std::uniform_real_distribution<double> dg(-1.8, 1.8);
    change_gap(out.model, arm, dg(rng));
  } else if (omega < 0.85) {
    out.kind = TopologyMutation::AddRemoveArm;
    const double theta = unit(rng);
    if (theta < 0.5) {
      if (unit(rng) < 0.5) {
        add_arm_in_largest_gap(out.model, cfg);
      } else {
        const std::size_t arm = pick_index(model.arms.size());
        const int sign = unit(rng) < 0.5 ? 1 : -1;
        add_arm_by_split(out.model, arm, sign, cfg);
      }
    } else {
      const std::size_t arm = pick_index(model.arms.size());
      remove_arm(out.model, arm);
    }
  } else {
    out.kind = TopologyMutation::AddRemoveLane;
    const double theta = unit(rng);
    if (theta < 0.5) {
      const std::size_t arm = pick_index(model.arms.size());
      const DirectionClass dir = unit(rng) < 0.5 ? DirectionClass::Entering : DirectionClass::Leaving;
      const bool medial = unit(rng) < 0.5;
      add_lane(out.model, arm, dir, medial, cfg);
    } else {
      const std::vector<LaneRef> lanes = model.all_lanes();
      const LaneRef ref = lanes[pick_index(lanes.size())];
      remove_lane(out.model, ref);
    }
  }
  return out;
}

TopologyModel propose_topology(const TopologyModel& model, const TopologyConfig& cfg, Rng& rng) {
  return propose_topology_detail(model, cfg, rng).model;
}

double log_prior_topology(const TopologyModel& model, const TopologyConfig& cfg) {
  const auto arm_it = cfg.arm_count_prior.find(static_cast<int>(model.arms.size()));
  const auto lane_it = cfg.lane_count_prior.find(static_cast<int>(model.total_lane_count()));
  if (arm_it == cfg.arm_count_prior.end() || lane_it == cfg.lane_count_prior.end()) {
    return cfg.likelihood_floor;
  }
  return std::log(arm_it->second) + std::log(lane_it->second);
}

namespace {

// Precomputed per-lane scoring geometry for one model.
struct LaneScratch {
  Point2 a;
  Point2 b;
  Vec2 travel;
  DirectionClass dir;
};

void build_lane_scratch(const TopologyModel& model, const TopologyConfig& cfg,
                        std::vector<LaneScratch>& scratch) {
  scratch.clear();
  for (std::size_t ai = 0; ai < model.arms.size(); ++ai) {
    const Arm& arm = model.arms[ai];
    const Vec2 u = axis_of(arm.heading);
    const Vec2 rn = right_normal_of(arm.heading);
    for (int pass = 0; pass < 2; ++pass) {
      const DirectionClass dir = pass == 0 ? DirectionClass::Entering : DirectionClass::Leaving;
      const std::vector<Lane>& group = arm.lanes(dir);
      for (std::size_t i = 0; i < group.size(); ++i) {
        LaneScratch ls;
        ls.a = model.center + lane_lateral_offset(arm, dir, i) * rn;
        ls.b = ls.a + cfg.ray_length * u;
        ls.travel = dir == DirectionClass::Leaving ? u : Vec2(-u);
        ls.dir = dir;
        scratch.push_back(ls);
      }
    }
  }
}

double score_point(const MeasurementPoint& z, const Point2& center,
                   std::span<const LaneScratch> lanes, const TopologyConfig& cfg) {
  DirectionClass zdir;
  if (z.direction) {
    zdir = *z.direction;
  } else if (z.orientation) {
    // Moving away from the current center counts as leaving, mirroring the
    // Doppler sign rule with the sensor at the center.
    zdir = z.orientation->vec().dot(z.position - center) > 0.0 ? DirectionClass::Leaving
                                                               : DirectionClass::Entering;
  } else {
    return z.weight * cfg.likelihood_floor;
  }

  const double inv_two_sig_perp2 = 0.5 / (cfg.sigma_perp * cfg.sigma_perp);
  const double norm_perp = 1.0 / (cfg.sigma_perp * std::sqrt(kTwoPi));
  const double inv_two_sig_ang2 = 0.5 / (cfg.sigma_ang * cfg.sigma_ang);
  const double norm_ang = 1.0 / (cfg.sigma_ang * std::sqrt(kTwoPi));

  double sum = 0.0;
  for (const LaneScratch& l : lanes) {
    if (l.dir != zdir) continue;
    const double d = point_segment_distance(z.position, l.a, l.b);
    const double e_perp = -d * d * inv_two_sig_perp2;
    if (e_perp < -700.0) continue;  // exp underflows to exactly 0
    double term = norm_perp * std::exp(e_perp);
    if (z.orientation) {
      const double ang =
          std::acos(std::clamp(z.orientation->vec().dot(l.travel), -1.0, 1.0));
      const double e_ang = -ang * ang * inv_two_sig_ang2;
      term *= e_ang < -700.0 ? 0.0 : norm_ang * std::exp(e_ang);
    }
    sum += term;
  }
  const double ll = sum > 0.0 ? std::log(sum) : -std::numeric_limits<double>::infinity();
  return z.weight * std::max(ll, cfg.likelihood_floor);
}

}  // namespace

double log_likelihood_point(const MeasurementPoint& z, const TopologyModel& model,
                            const TopologyConfig& cfg) {
  std::vector<LaneScratch> scratch;
  build_lane_scratch(model, cfg, scratch);
  return score_point(z, model.center, scratch, cfg);
}

double log_posterior_topology(std::span<const MeasurementPoint> measurements,
                              const TopologyModel& model, const TopologyConfig& cfg) {
  std::vector<LaneScratch> scratch;
  build_lane_scratch(model, cfg, scratch);
  double lp = log_prior_topology(model, cfg);
  for (const MeasurementPoint& z : measurements) {
    lp += score_point(z, model.center, scratch, cfg);
  }
  return lp;
}

TopologyModel initial_topology(std::span<const MeasurementPoint> measurements,
                               const TopologyConfig& cfg) {
  if (measurements.empty()) throw std::invalid_argument("initial_topology: no measurements");
  Point2 centroid = Point2::Zero();
  for (const MeasurementPoint& z : measurements) centroid += z.position;
  centroid /= static_cast<double>(measurements.size());

  TopologyModel model;
  model.center = centroid;
  for (int k = 0; k < 4; ++k) {
    Arm arm;
    arm.heading = wrap_angle(k * kPi / 2.0);
    arm.gap = 0.0;
    arm.lanes_in.push_back({cfg.lane_width_default});
    arm.lanes_out.push_back({cfg.lane_width_default});
    model.arms.push_back(arm);
  }
  return model;
}

ChainResult<TopologyModel> estimate_topology(std::span<const MeasurementPoint> measurements,
                                             const TopologyConfig& cfg, std::uint64_t seed) {
  if (measurements.empty()) throw std::invalid_argument("estimate_topology: no measurements");
  TopologyModel init = initial_topology(measurements, cfg);
  AnnealingSchedule schedule = cfg.schedule;
  schedule.n_steps = cfg.n_samples;

  // Scratch shared across posterior evaluations of one run.
  std::vector<LaneScratch> scratch;
  auto log_post = [&](const TopologyModel& m) {
    build_lane_scratch(m, cfg, scratch);
    double lp = log_prior_topology(m, cfg);
    for (const MeasurementPoint& z : measurements) {
      lp += score_point(z, m.center, scratch, cfg);
    }
    return lp;
  };
  auto propose = [&cfg](const TopologyModel& m, Rng& rng) {
    return propose_topology(m, cfg, rng);
  };
  return run_chain(std::move(init), propose, log_post, schedule, seed);
}

}  // namespace junction
