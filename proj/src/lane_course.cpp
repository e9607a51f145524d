#include "junction/lane_course.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace junction {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;

double log_normal_pdf(double x, double sigma) {
  const double z = x / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Vec2 left_normal(const Vec2& v) { return Vec2(-v.y(), v.x()); }

Vec2 axis_of(double heading) { return Vec2(std::cos(heading), std::sin(heading)); }

Vec2 right_normal_of(double heading) { return Vec2(std::sin(heading), -std::cos(heading)); }

}  // namespace

std::vector<int> LaneletModel::node_refcounts() const {
  std::vector<int> rc(nodes.size(), 0);
  for (const Lanelet& l : lanelets) {
    for (int id : l.left) rc[static_cast<std::size_t>(id)]++;
    for (int id : l.right) rc[static_cast<std::size_t>(id)]++;
  }
  return rc;
}

int LaneletModel::shared_pair_count() const {
  int pairs = 0;
  for (int rc : node_refcounts()) pairs += std::max(0, rc - 1);
  return pairs;
}

std::optional<int> LaneletModel::find_arm_lanelet(const LaneRef& lane) const {
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (info[i].kind == LaneletKind::ArmLane && info[i].lane == lane) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> LaneletModel::find_connection(const LaneRef& from, const LaneRef& to) const {
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (info[i].kind == LaneletKind::Connection && info[i].from == from && info[i].to == to) {
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

double intersection_mouth_radius(const TopologyModel& model) {
  double r = 6.0;
  for (const Arm& a : model.arms) {
    double win = 0.0, wout = 0.0;
    for (const Lane& l : a.lanes_in) win += l.width;
    for (const Lane& l : a.lanes_out) wout += l.width;
    r = std::max(r, a.gap * 0.5 + std::max(win, wout));
  }
  return r;
}

std::optional<LaneRef> nearest_lane(const TopologyModel& topology, const Point2& point,
                                    DirectionClass dir, double ray_length) {
  std::optional<LaneRef> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t ai = 0; ai < topology.arms.size(); ++ai) {
    const std::vector<Lane>& group = topology.arms[ai].lanes(dir);
    for (std::size_t li = 0; li < group.size(); ++li) {
      const LaneRef ref{ai, dir, li};
      const Polyline ray = lane_center_ray(topology, ref, ray_length);
      const double d = orthogonal_distance(point, ray);
      if (d < best_dist) {
        best_dist = d;
        best = ref;
      }
    }
  }
  return best;
}

std::map<std::string, TrajectoryAssignment> assign_parts(
    const TopologyModel& topology,
    std::span<const std::pair<Trajectory, Trajectory>> split_parts) {
  std::map<std::string, TrajectoryAssignment> out;
  for (const auto& [incoming, outgoing] : split_parts) {
    if (incoming.points.size() < 2 || outgoing.points.size() < 2) continue;

    Point2 mean_in = Point2::Zero();
    for (const Detection& d : incoming.points) mean_in += d.position;
    mean_in /= static_cast<double>(incoming.points.size());
    Point2 mean_out = Point2::Zero();
    for (const Detection& d : outgoing.points) mean_out += d.position;
    mean_out /= static_cast<double>(outgoing.points.size());

    const auto lane_in = nearest_lane(topology, mean_in, DirectionClass::Entering);
    const auto lane_out = nearest_lane(topology, mean_out, DirectionClass::Leaving);
    if (!lane_in || !lane_out) continue;
    if (lane_in->arm == lane_out->arm) continue;  // reject U-turns
    out[incoming.id] = TrajectoryAssignment{*lane_in, *lane_out};
  }
  return out;
}

namespace {

struct GroupSpan {
  double near = 0.0;
  double far = 0.0;
  int count = 0;  // support points
};

std::vector<int> push_row(LaneletModel& model, const Point2& origin, const Vec2& axis,
                          const Vec2& normal, double offset, const GroupSpan& span) {
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(span.count));
  const double step = (span.far - span.near) / static_cast<double>(span.count - 1);
  for (int i = 0; i < span.count; ++i) {
    const double r = span.near + step * i;
    ids.push_back(static_cast<int>(model.nodes.size()));
    model.nodes.push_back(origin + offset * normal + r * axis);
  }
  return ids;
}

struct ProjectionResult {
  double arc = 0.0;
  double lateral = 0.0;  // signed, left of travel positive
  double distance = 0.0;
};

ProjectionResult project_onto(std::span<const Point2> pts, const Point2& p) {
  ProjectionResult best;
  best.distance = std::numeric_limits<double>::infinity();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 seg = pts[i + 1] - pts[i];
    const double len = seg.norm();
    if (len == 0.0) continue;
    const Vec2 dir = seg / len;
    double t = (p - pts[i]).dot(dir);
    t = std::clamp(t, 0.0, len);
    const Point2 proj = pts[i] + t * dir;
    const double d = (p - proj).norm();
    if (d < best.distance) {
      best.distance = d;
      best.arc = cum + t;
      best.lateral = cross2(dir, p - pts[i]);
    }
    cum += len;
  }
  return best;
}

}  // namespace

LaneletModel build_lanelet_geometry(const TopologyModel& topology,
                                    std::span<const ConnectionSpec> connections,
                                    const GroupSpanFn& span_of, double spacing) {
  LaneletModel model;

  // Arm lanelets: one row of nodes per lane boundary, adjacent lanes of the
  // same direction share their common row.
  std::map<LaneRef, int> lanelet_of_lane;
  for (std::size_t ai = 0; ai < topology.arms.size(); ++ai) {
    const Arm& arm = topology.arms[ai];
    const Vec2 u = axis_of(arm.heading);
    const Vec2 rn = right_normal_of(arm.heading);
    for (const DirectionClass dir : {DirectionClass::Entering, DirectionClass::Leaving}) {
      const std::vector<Lane>& group = arm.lanes(dir);
      if (group.empty()) continue;

      GroupSpan span;
      const auto [near, far] = span_of(ai, dir);
      span.near = near;
      span.far = std::max(far, near + 2.0 * spacing);
      span.count = std::max(2, static_cast<int>(std::round((span.far - span.near) / spacing)) + 1);

      const double sign = dir == DirectionClass::Leaving ? 1.0 : -1.0;
      std::vector<std::vector<int>> rows;
      double boundary = arm.gap * 0.5;
      rows.push_back(push_row(model, topology.center, u, rn, sign * boundary, span));
      for (std::size_t li = 0; li < group.size(); ++li) {
        boundary += group[li].width;
        rows.push_back(push_row(model, topology.center, u, rn, sign * boundary, span));
      }

      for (std::size_t li = 0; li < group.size(); ++li) {
        Lanelet l;
        l.id = static_cast<int>(model.lanelets.size());
        l.left = rows[li];  // gap side is left of travel for both directions
        l.right = rows[li + 1];
        if (dir == DirectionClass::Entering) {
          std::reverse(l.left.begin(), l.left.end());
          std::reverse(l.right.begin(), l.right.end());
        }
        LaneletInfo inf;
        inf.kind = LaneletKind::ArmLane;
        inf.lane = LaneRef{ai, dir, li};
        lanelet_of_lane[inf.lane] = l.id;
        model.lanelets.push_back(std::move(l));
        model.info.push_back(inf);
      }
    }
  }

  // Connection lanelets welded to the mouth border pairs of their end lanes.
  for (const ConnectionSpec& spec : connections) {
    const auto el_it = lanelet_of_lane.find(spec.from);
    const auto ll_it = lanelet_of_lane.find(spec.to);
    if (el_it == lanelet_of_lane.end() || ll_it == lanelet_of_lane.end()) {
      throw std::invalid_argument("build_lanelet_geometry: connection references a removed lane");
    }
    const Lanelet& el = model.lanelets[static_cast<std::size_t>(el_it->second)];
    const Lanelet& ll = model.lanelets[static_cast<std::size_t>(ll_it->second)];
    const int sl = el.left.back(), sr = el.right.back();
    const int tl = ll.left.front(), tr = ll.right.front();

    const Point2 a = 0.5 * (model.nodes[static_cast<std::size_t>(sl)] +
                            model.nodes[static_cast<std::size_t>(sr)]);
    const Point2 b = 0.5 * (model.nodes[static_cast<std::size_t>(tl)] +
                            model.nodes[static_cast<std::size_t>(tr)]);
    const double w0 = (model.nodes[static_cast<std::size_t>(sl)] -
                       model.nodes[static_cast<std::size_t>(sr)])
                          .norm();
    const double w1 = (model.nodes[static_cast<std::size_t>(tl)] -
                       model.nodes[static_cast<std::size_t>(tr)])
                          .norm();

    std::vector<Point2> path = spec.center_line;
    if (path.size() < 2) path = {a, b};
    if ((path[0] - path[1]).squaredNorm() == 0.0) path = {a, b + Vec2(1e-9, 0.0)};
    std::vector<Point2> pts = resample_equidistant(std::span<const Point2>(path), spacing);
    const std::size_t n = pts.size();
    const double total = polyline_length(pts);

    Lanelet l;
    l.id = static_cast<int>(model.lanelets.size());
    l.left.push_back(sl);
    l.right.push_back(sr);
    double arc = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      arc += (pts[i] - pts[i - 1]).norm();
      const Vec2 tangent = pts[i + 1] - pts[i - 1];
      const double tn = tangent.norm();
      const Vec2 n_left = tn > 0.0 ? left_normal(tangent / tn) : Vec2(0.0, 1.0);
      const double w = total > 0.0 ? w0 + (arc / total) * (w1 - w0) : w0;
      l.left.push_back(static_cast<int>(model.nodes.size()));
      model.nodes.push_back(pts[i] + 0.5 * w * n_left);
      l.right.push_back(static_cast<int>(model.nodes.size()));
      model.nodes.push_back(pts[i] - 0.5 * w * n_left);
    }
    l.left.push_back(tl);
    l.right.push_back(tr);

    LaneletInfo inf;
    inf.kind = LaneletKind::Connection;
    inf.from = spec.from;
    inf.to = spec.to;
    model.lanelets.push_back(std::move(l));
    model.info.push_back(inf);
  }

  recompute_center_lines(model);
  return model;
}

LaneletModel initialize_lanelets(const TopologyModel& topology,
                                 const std::map<std::string, TrajectoryAssignment>& assignments,
                                 std::span<const Trajectory> trajectories,
                                 const LaneCourseConfig& cfg) {
  const double mouth = intersection_mouth_radius(topology);

  // Radial data extent per lane group, from the split parts of assigned
  // trajectories.
  std::map<std::string, const Trajectory*> by_id;
  for (const Trajectory& t : trajectories) by_id[t.id] = &t;

  struct Extent {
    double far = -std::numeric_limits<double>::infinity();
    bool seen = false;
  };
  std::map<std::pair<std::size_t, int>, Extent> group_far;  // (arm, 0=in/1=out)

  for (const auto& [id, assign] : assignments) {
    auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    const auto [incoming, outgoing] = split_trajectory(*it->second, topology.center);
    const auto account = [&](const Trajectory& part, const LaneRef& ref) {
      if (ref.arm >= topology.arms.size() ||
          ref.index >= topology.arms[ref.arm].lanes(ref.dir).size()) {
        throw std::invalid_argument("initialize_lanelets: assignment references a removed lane");
      }
      const Vec2 u = axis_of(topology.arms[ref.arm].heading);
      Extent& e = group_far[{ref.arm, ref.dir == DirectionClass::Entering ? 0 : 1}];
      for (const Detection& d : part.points) {
        e.far = std::max(e.far, (d.position - topology.center).dot(u));
        e.seen = true;
      }
    };
    account(incoming, assign.entering);
    account(outgoing, assign.leaving);
  }

  const GroupSpanFn span_of = [&](std::size_t arm, DirectionClass dir) {
    const auto it = group_far.find({arm, dir == DirectionClass::Entering ? 0 : 1});
    const double far = (it != group_far.end() && it->second.seen) ? it->second.far
                                                                  : mouth + cfg.default_extent;
    return std::pair<double, double>{mouth, far};
  };

  std::vector<ConnectionSpec> specs;
  for (const auto& [id, assign] : assignments) {
    const ConnectionSpec spec{assign.entering, assign.leaving, {}};
    const auto same = [&spec](const ConnectionSpec& s) {
      return s.from == spec.from && s.to == spec.to;
    };
    if (std::find_if(specs.begin(), specs.end(), same) == specs.end()) specs.push_back(spec);
  }

  LaneletModel model = build_lanelet_geometry(topology, specs, span_of, cfg.support_spacing);

  for (const auto& [id, assign] : assignments) {
    const int el = *model.find_arm_lanelet(assign.entering);
    const int ll = *model.find_arm_lanelet(assign.leaving);
    const int conn = *model.find_connection(assign.entering, assign.leaving);
    model.assignments[id] = {el, conn, ll};
  }
  return model;
}

CenterLine compute_center_line(const LaneletModel& model, const Lanelet& l) {
  if (l.left.size() != l.right.size() || l.left.size() < 2) {
    throw std::invalid_argument("compute_center_line: malformed lanelet");
  }
  const std::size_t n = l.left.size();
  std::vector<Point2> mids(n);
  for (std::size_t i = 0; i < n; ++i) {
    mids[i] = 0.5 * (model.nodes[static_cast<std::size_t>(l.left[i])] +
                     model.nodes[static_cast<std::size_t>(l.right[i])]);
  }
  CenterLine out;
  out.points.resize(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    out.points[2 * i] = mids[i];
    if (i + 1 < n) out.points[2 * i + 1] = 0.5 * (mids[i] + mids[i + 1]);
  }
  return out;
}

void recompute_center_lines(LaneletModel& model) {
  model.center_lines.resize(model.lanelets.size());
  for (std::size_t i = 0; i < model.lanelets.size(); ++i) {
    model.center_lines[i] = compute_center_line(model, model.lanelets[i]);
  }
}

void refine_initial(LaneletModel& model, std::span<const Trajectory> trajectories,
                    const LaneCourseConfig& cfg) {
  if (model.center_lines.size() != model.lanelets.size()) recompute_center_lines(model);

  std::map<std::string, const Trajectory*> by_id;
  for (const Trajectory& t : trajectories) by_id[t.id] = &t;

  // Bucket trajectory points by their nearest lanelet of the assigned path.
  std::vector<std::vector<Point2>> points_of(model.lanelets.size());
  for (const auto& [id, path] : model.assignments) {
    auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    for (const Detection& d : it->second->points) {
      int best_l = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int li : path) {
        const double dist =
            orthogonal_distance(d.position, model.center_lines[static_cast<std::size_t>(li)].points);
        if (dist < best_d) {
          best_d = dist;
          best_l = li;
        }
      }
      if (best_l >= 0) points_of[static_cast<std::size_t>(best_l)].push_back(d.position);
    }
  }

  std::vector<char> moved(model.nodes.size(), 0);
  for (std::size_t li = 0; li < model.lanelets.size(); ++li) {
    const std::vector<Point2>& data = points_of[li];
    if (data.empty()) continue;
    Lanelet& l = model.lanelets[li];
    const std::size_t n = l.left.size();

    std::vector<Point2> mids(n);
    for (std::size_t i = 0; i < n; ++i) {
      mids[i] = 0.5 * (model.nodes[static_cast<std::size_t>(l.left[i])] +
                       model.nodes[static_cast<std::size_t>(l.right[i])]);
    }
    std::vector<double> arcs(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) arcs[i] = arcs[i - 1] + (mids[i] - mids[i - 1]).norm();

    std::vector<ProjectionResult> projections;
    projections.reserve(data.size());
    for (const Point2& p : data) projections.push_back(project_onto(mids, p));

    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const ProjectionResult& pr : projections) {
        if (std::fabs(pr.arc - arcs[i]) <= cfg.support_spacing) {
          sum += pr.lateral;
          ++count;
        }
      }
      if (count == 0) continue;
      const double delta = sum / static_cast<double>(count);

      const Vec2 tangent = mids[std::min(i + 1, n - 1)] - mids[i == 0 ? 0 : i - 1];
      const double tn = tangent.norm();
      if (tn == 0.0) continue;
      const Vec2 normal = left_normal(tangent / tn);
      for (int id : {l.left[i], l.right[i]}) {
        if (!moved[static_cast<std::size_t>(id)]) {
          model.nodes[static_cast<std::size_t>(id)] += delta * normal;
          moved[static_cast<std::size_t>(id)] = 1;
        }
      }
    }
  }
  recompute_center_lines(model);
}

std::vector<MergeCandidate> merge_candidates(const LaneletModel& model,
                                             const LaneCourseConfig& cfg) {
  std::vector<MergeCandidate> out;
  const double r2 = cfg.merge_radius * cfg.merge_radius;
  for (std::size_t i = 0; i < model.lanelets.size(); ++i) {
    for (std::size_t j = i + 1; j < model.lanelets.size(); ++j) {
      const Lanelet& a = model.lanelets[i];
      const Lanelet& b = model.lanelets[j];
      for (int sa = 0; sa < 2; ++sa) {
        const std::vector<int>& side_a = sa == 0 ? a.left : a.right;
        for (int sb = 0; sb < 2; ++sb) {
          const std::vector<int>& side_b = sb == 0 ? b.left : b.right;
          for (std::size_t ia = 0; ia < side_a.size(); ++ia) {
            for (std::size_t ib = 0; ib < side_b.size(); ++ib) {
              if (side_a[ia] == side_b[ib]) continue;  // already shared
              const Vec2 d = model.nodes[static_cast<std::size_t>(side_a[ia])] -
                             model.nodes[static_cast<std::size_t>(side_b[ib])];
              if (d.squaredNorm() <= r2) {
                out.push_back({SlotRef{static_cast<int>(i), sa == 0, static_cast<int>(ia)},
                               SlotRef{static_cast<int>(j), sb == 0, static_cast<int>(ib)}});
              }
            }
          }
        }
      }
    }
  }
  return out;
}

namespace detail {

int slot_node(const LaneletModel& model, const SlotRef& s) {
  const Lanelet& l = model.lanelets[static_cast<std::size_t>(s.lanelet)];
  const std::vector<int>& side = s.left_side ? l.left : l.right;
  return side[static_cast<std::size_t>(s.index)];
}

void set_slot_node(LaneletModel& model, const SlotRef& s, int node) {
  Lanelet& l = model.lanelets[static_cast<std::size_t>(s.lanelet)];
  std::vector<int>& side = s.left_side ? l.left : l.right;
  side[static_cast<std::size_t>(s.index)] = node;
}

// Fixed slot-pair universe used by the sampler: initial merge candidates
// plus pairs that already share a node (eligible for splitting and for
// welding back after a split).
std::vector<MergeCandidate> build_universe(const LaneletModel& model,
                                           const LaneCourseConfig& cfg) {
  std::vector<MergeCandidate> universe = merge_candidates(model, cfg);
  std::unordered_map<int, std::vector<SlotRef>> slots_of_node;
  for (std::size_t li = 0; li < model.lanelets.size(); ++li) {
    const Lanelet& l = model.lanelets[li];
    for (std::size_t i = 0; i < l.left.size(); ++i) {
      slots_of_node[l.left[i]].push_back(SlotRef{static_cast<int>(li), true, static_cast<int>(i)});
    }
    for (std::size_t i = 0; i < l.right.size(); ++i) {
      slots_of_node[l.right[i]].push_back(SlotRef{static_cast<int>(li), false, static_cast<int>(i)});
    }
  }
  for (const auto& [node, slots] : slots_of_node) {
    if (slots.size() < 2) continue;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      for (std::size_t j = i + 1; j < slots.size(); ++j) {
        if (slots[i].lanelet == slots[j].lanelet) continue;
        universe.push_back({slots[i], slots[j]});
      }
    }
  }
  return universe;
}

struct MutationPlan {
  CourseMutation kind = CourseMutation::MoveCenter;
  bool eligible = false;
  int lanelet = -1;
  int support = -1;
  double delta = 0.0;
  SlotRef detach;
  Vec2 displacement = Vec2::Zero();
  SlotRef survivor_slot;
  SlotRef loser_slot;
};

MutationPlan plan_mutation(const LaneletModel& model, std::span<const MergeCandidate> universe,
                           const LaneCourseConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> kind_draw(0, 2);
  MutationPlan plan;
  plan.kind = static_cast<CourseMutation>(kind_draw(rng));

  switch (plan.kind) {
    case CourseMutation::MoveCenter: {
      std::size_t total = 0;
      for (const Lanelet& l : model.lanelets) total += l.left.size();
      if (total == 0) return plan;
      std::uniform_int_distribution<std::size_t> pick(0, total - 1);
      std::size_t idx = pick(rng);
      for (std::size_t li = 0; li < model.lanelets.size(); ++li) {
        if (idx < model.lanelets[li].left.size()) {
          plan.lanelet = static_cast<int>(li);
          plan.support = static_cast<int>(idx);
          break;
        }
        idx -= model.lanelets[li].left.size();
      }
      std::normal_distribution<double> step(0.0, cfg.move_sigma);
      plan.delta = step(rng);
      plan.eligible = true;
      break;
    }
    case CourseMutation::SplitShared: {
      std::vector<std::size_t> shared;
      for (std::size_t i = 0; i < universe.size(); ++i) {
        if (slot_node(model, universe[i].a) == slot_node(model, universe[i].b)) shared.push_back(i);
      }
      if (shared.empty()) return plan;
      std::uniform_int_distribution<std::size_t> pick(0, shared.size() - 1);
      const MergeCandidate& c = universe[shared[pick(rng)]];
      plan.detach = unit(rng) < 0.5 ? c.a : c.b;
      std::uniform_real_distribution<double> dist(0.0, cfg.split_max);
      std::uniform_real_distribution<double> ang(0.0, kTwoPi);
      const double r = dist(rng);
      const double phi = ang(rng);
      plan.displacement = r * Vec2(std::cos(phi), std::sin(phi));
      plan.eligible = true;
      break;
    }
    case CourseMutation::MergePair: {
      std::vector<std::size_t> mergeable;
      const double r2 = cfg.merge_radius * cfg.merge_radius;
      for (std::size_t i = 0; i < universe.size(); ++i) {
        const int na = slot_node(model, universe[i].a);
        const int nb = slot_node(model, universe[i].b);
        if (na == nb) continue;
        const Vec2 d = model.nodes[static_cast<std::size_t>(na)] -
                       model.nodes[static_cast<std::size_t>(nb)];
        if (d.squaredNorm() <= r2) mergeable.push_back(i);
      }
      if (mergeable.empty()) return plan;
      std::uniform_int_distribution<std::size_t> pick(0, mergeable.size() - 1);
      const MergeCandidate& c = universe[mergeable[pick(rng)]];
      const bool keep_a = unit(rng) < 0.5;
      plan.survivor_slot = keep_a ? c.a : c.b;
      plan.loser_slot = keep_a ? c.b : c.a;
      plan.eligible = true;
      break;
    }
  }
  return plan;
}

std::vector<int> lanelets_referencing(const LaneletModel& model, std::span<const int> node_ids) {
  std::vector<int> out;
  for (std::size_t li = 0; li < model.lanelets.size(); ++li) {
    const Lanelet& l = model.lanelets[li];
    bool hit = false;
    for (int id : node_ids) {
      if (std::find(l.left.begin(), l.left.end(), id) != l.left.end() ||
          std::find(l.right.begin(), l.right.end(), id) != l.right.end()) {
        hit = true;
        break;
      }
    }
    if (hit) out.push_back(static_cast<int>(li));
  }
  return out;
}

std::vector<int> apply_mutation(LaneletModel& model, const MutationPlan& plan) {
  if (!plan.eligible) return {};
  switch (plan.kind) {
    case CourseMutation::MoveCenter: {
      Lanelet& l = model.lanelets[static_cast<std::size_t>(plan.lanelet)];
      const std::size_t n = l.left.size();
      const std::size_t i = static_cast<std::size_t>(plan.support);
      auto mid = [&](std::size_t k) {
        return Point2(0.5 * (model.nodes[static_cast<std::size_t>(l.left[k])] +
                             model.nodes[static_cast<std::size_t>(l.right[k])]));
      };
      const Vec2 tangent = mid(std::min(i + 1, n - 1)) - mid(i == 0 ? 0 : i - 1);
      const double tn = tangent.norm();
      if (tn == 0.0) return {};
      const Vec2 normal = left_normal(tangent / tn);
      const int ids[2] = {l.left[i], l.right[i]};
      model.nodes[static_cast<std::size_t>(ids[0])] += plan.delta * normal;
      if (ids[1] != ids[0]) model.nodes[static_cast<std::size_t>(ids[1])] += plan.delta * normal;
      return lanelets_referencing(model, ids);
    }
    case CourseMutation::SplitShared: {
      const int old_node = slot_node(model, plan.detach);
      const int new_node = static_cast<int>(model.nodes.size());
      model.nodes.push_back(model.nodes[static_cast<std::size_t>(old_node)] + plan.displacement);
      set_slot_node(model, plan.detach, new_node);
      return {plan.detach.lanelet};
    }
    case CourseMutation::MergePair: {
      const int survivor = slot_node(model, plan.survivor_slot);
      set_slot_node(model, plan.loser_slot, survivor);
      return {plan.loser_slot.lanelet};
    }
  }
  return {};
}

}  // namespace detail

CourseProposal propose_course_detail(const LaneletModel& model, const LaneCourseConfig& cfg,
                                     Rng& rng) {
  const std::vector<MergeCandidate> universe = detail::build_universe(model, cfg);
  const detail::MutationPlan plan = detail::plan_mutation(model, universe, cfg, rng);
  CourseProposal out{model, plan.kind, false};
  if (!plan.eligible) return out;
  const std::vector<int> affected = detail::apply_mutation(out.model, plan);
  for (int li : affected) {
    out.model.center_lines[static_cast<std::size_t>(li)] =
        compute_center_line(out.model, out.model.lanelets[static_cast<std::size_t>(li)]);
  }
  out.changed = !affected.empty();
  return out;
}

LaneletModel propose_course(const LaneletModel& model, const LaneCourseConfig& cfg, Rng& rng) {
  return propose_course_detail(model, cfg, rng).model;
}

double smoothness_delta(std::span<const Point2> center_line) {
  if (center_line.size() < 3) return 0.0;
  double total = 0.0;
  bool have_prev = false;
  Vec2 prev = Vec2::Zero();
  for (std::size_t i = 0; i + 1 < center_line.size(); ++i) {
    const Vec2 seg = center_line[i + 1] - center_line[i];
    const double n = seg.norm();
    if (n == 0.0) continue;
    const Vec2 dir = seg / n;
    if (have_prev) {
      total += std::fabs(std::acos(std::clamp(prev.dot(dir), -1.0, 1.0)));
    }
    prev = dir;
    have_prev = true;
  }
  return total;
}

double smoothness_delta(const CenterLine& line) {
  return smoothness_delta(std::span<const Point2>(line.points));
}

double log_prior_course(const LaneletModel& model, const LaneCourseConfig& cfg) {
  double lp = cfg.tau * std::log(1.0 + static_cast<double>(model.shared_pair_count()));
  for (const CenterLine& cl : model.center_lines) {
    lp += log_normal_pdf(smoothness_delta(cl), cfg.sigma_smooth);
  }
  return lp;
}

namespace {

double trajectory_loglik(const Trajectory& t, std::span<const int> path, const LaneletModel& model,
                         const LaneCourseConfig& cfg) {
  double lp = 0.0;
  for (const Detection& d : t.points) {
    double best = std::numeric_limits<double>::infinity();
    for (int li : path) {
      best = std::min(best, orthogonal_distance(
                                d.position, model.center_lines[static_cast<std::size_t>(li)].points));
    }
    lp += log_normal_pdf(best, cfg.sigma_perp);
  }
  return lp;
}

}  // namespace

double log_likelihood_trajectory(const Trajectory& t, const LaneletModel& model,
                                 const LaneCourseConfig& cfg) {
  const auto it = model.assignments.find(t.id);
  if (it == model.assignments.end()) {
    throw std::invalid_argument("log_likelihood_trajectory: trajectory has no assignment");
  }
  return trajectory_loglik(t, it->second, model, cfg);
}

double log_posterior_course(std::span<const Trajectory> trajectories, const LaneletModel& model,
                            const LaneCourseConfig& cfg) {
  double lp = log_prior_course(model, cfg);
  for (const Trajectory& t : trajectories) lp += log_likelihood_trajectory(t, model, cfg);
  return lp;
}

namespace {

// Chain state with memoized score terms so a proposal only re-scores the
// lanelets and trajectories it touched.
struct CourseState {
  LaneletModel model;
  std::vector<double> smooth_lp;
  std::vector<double> traj_lp;
  double smooth_sum = 0.0;
  double traj_sum = 0.0;
  int shared_pairs = 0;
};

}  // namespace

ChainResult<LaneletModel> estimate_lane_course(const TopologyModel& topology,
                                               std::span<const Trajectory> trajectories,
                                               const LaneCourseConfig& cfg, std::uint64_t seed) {
  std::vector<std::pair<Trajectory, Trajectory>> split_parts;
  split_parts.reserve(trajectories.size());
  for (const Trajectory& t : trajectories) {
    split_parts.push_back(split_trajectory(t, topology.center));
  }
  const auto assignments = assign_parts(topology, split_parts);

  std::vector<Trajectory> scoring;
  for (const Trajectory& t : trajectories) {
    if (assignments.count(t.id)) scoring.push_back(t);
  }

  LaneletModel init = initialize_lanelets(topology, assignments, scoring, cfg);
  refine_initial(init, scoring, cfg);

  const std::vector<MergeCandidate> universe = detail::build_universe(init, cfg);

  // Static while sampling: which scoring trajectories touch which lanelet.
  std::vector<std::vector<int>> trajs_of_lanelet(init.lanelets.size());
  for (std::size_t ti = 0; ti < scoring.size(); ++ti) {
    for (int li : init.assignments.at(scoring[ti].id)) {
      trajs_of_lanelet[static_cast<std::size_t>(li)].push_back(static_cast<int>(ti));
    }
  }

  CourseState state;
  state.model = std::move(init);
  state.smooth_lp.resize(state.model.lanelets.size());
  for (std::size_t i = 0; i < state.model.lanelets.size(); ++i) {
    state.smooth_lp[i] = log_normal_pdf(smoothness_delta(state.model.center_lines[i]), cfg.sigma_smooth);
    state.smooth_sum += state.smooth_lp[i];
  }
  state.traj_lp.resize(scoring.size());
  for (std::size_t i = 0; i < scoring.size(); ++i) {
    state.traj_lp[i] = trajectory_loglik(scoring[i], state.model.assignments.at(scoring[i].id),
                                         state.model, cfg);
    state.traj_sum += state.traj_lp[i];
  }
  state.shared_pairs = state.model.shared_pair_count();

  auto log_post = [&cfg](const CourseState& s) {
    return cfg.tau * std::log(1.0 + static_cast<double>(s.shared_pairs)) + s.smooth_sum +
           s.traj_sum;
  };

  auto propose = [&](const CourseState& cur, Rng& rng) {
    CourseState next = cur;
    const detail::MutationPlan plan = detail::plan_mutation(next.model, universe, cfg, rng);
    const std::vector<int> affected = detail::apply_mutation(next.model, plan);
    if (affected.empty()) return next;

    std::vector<char> traj_dirty(next.traj_lp.size(), 0);
    for (int li : affected) {
      next.model.center_lines[static_cast<std::size_t>(li)] =
          compute_center_line(next.model, next.model.lanelets[static_cast<std::size_t>(li)]);
      const double slp =
          log_normal_pdf(smoothness_delta(next.model.center_lines[static_cast<std::size_t>(li)]),
                         cfg.sigma_smooth);
      next.smooth_sum += slp - next.smooth_lp[static_cast<std::size_t>(li)];
      next.smooth_lp[static_cast<std::size_t>(li)] = slp;
      for (int ti : trajs_of_lanelet[static_cast<std::size_t>(li)]) {
        traj_dirty[static_cast<std::size_t>(ti)] = 1;
      }
    }
    for (std::size_t ti = 0; ti < traj_dirty.size(); ++ti) {
      if (!traj_dirty[ti]) continue;
      const double tlp = trajectory_loglik(scoring[ti], next.model.assignments.at(scoring[ti].id),
                                           next.model, cfg);
      next.traj_sum += tlp - next.traj_lp[ti];
      next.traj_lp[ti] = tlp;
    }
    if (plan.kind != CourseMutation::MoveCenter) {
      next.shared_pairs = next.model.shared_pair_count();
    }
    return next;
  };

  AnnealingSchedule schedule = cfg.schedule;
  schedule.n_steps = cfg.n_samples;
  ChainResult<CourseState> chain = run_chain(std::move(state), propose, log_post, schedule, seed);

  ChainResult<LaneletModel> out;
  out.best_state = std::move(chain.best_state.model);
  out.accepted_count = chain.accepted_count;
  out.proposed_count = chain.proposed_count;
  // Report the exact (uncached) posterior of the returned model.
  out.best_log_posterior = log_posterior_course(scoring, out.best_state, cfg);
  return out;
}

}  // namespace junction
