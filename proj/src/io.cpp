#include "junction/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace junction {

namespace {

Json point_json(const Point2& p) { return Json::array({p.x(), p.y()}); }

Point2 parse_point(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [x, y] pair");
  return Point2(j[0].get<double>(), j[1].get<double>());
}

DirectionClass parse_direction(const std::string& s) {
  if (s == "entering") return DirectionClass::Entering;
  if (s == "leaving") return DirectionClass::Leaving;
  throw std::invalid_argument("direction must be 'entering' or 'leaving', got '" + s + "'");
}

Json lane_ref_json(const LaneRef& ref) {
  Json j;
  j["arm"] = ref.arm;
  j["dir"] = to_string(ref.dir);
  j["index"] = ref.index;
  return j;
}

LaneRef parse_lane_ref(const Json& j) {
  LaneRef ref;
  ref.arm = j.at("arm").get<std::size_t>();
  ref.dir = parse_direction(j.at("dir").get<std::string>());
  ref.index = j.at("index").get<std::size_t>();
  return ref;
}

Json detection_json(const Detection& d) {
  Json j;
  j["x"] = d.position.x();
  j["y"] = d.position.y();
  if (d.timestamp) j["t"] = *d.timestamp;
  if (d.direction) j["dir"] = to_string(*d.direction);
  if (d.orientation) j["heading"] = Json::array({d.orientation->dx(), d.orientation->dy()});
  return j;
}

std::map<int, double> parse_count_prior(const Json& j) {
  std::map<int, double> prior;
  for (const auto& [key, value] : j.items()) prior[std::stoi(key)] = value.get<double>();
  return prior;
}

Json count_prior_json(const std::map<int, double>& prior) {
  Json j = Json::object();
  for (const auto& [count, p] : prior) j[std::to_string(count)] = p;
  return j;
}

}  // namespace

Json to_json(const Dataset& dataset) {
  Json j;
  j["seed"] = dataset.seed;
  if (dataset.seed_center) j["seed_center"] = point_json(*dataset.seed_center);
  j["detections"] = Json::array();
  for (const Detection& d : dataset.detections) j["detections"].push_back(detection_json(d));
  j["trajectories"] = Json::array();
  for (const Trajectory& t : dataset.trajectories) {
    Json jt;
    jt["id"] = t.id;
    jt["points"] = Json::array();
    for (const Detection& d : t.points) {
      Json jp;
      jp["x"] = d.position.x();
      jp["y"] = d.position.y();
      jp["t"] = d.timestamp ? *d.timestamp : 0.0;
      if (d.orientation) jp["heading"] = Json::array({d.orientation->dx(), d.orientation->dy()});
      jt["points"].push_back(std::move(jp));
    }
    j["trajectories"].push_back(std::move(jt));
  }
  return j;
}

Dataset parse_dataset(const Json& j) {
  Dataset out;
  out.seed = j.value("seed", 0ULL);
  if (j.contains("seed_center")) out.seed_center = parse_point(j.at("seed_center"));

  if (!j.contains("detections") || !j.at("detections").is_array()) {
    throw std::invalid_argument("dataset: missing 'detections' array");
  }
  std::size_t idx = 0;
  for (const Json& jd : j.at("detections")) {
    try {
      Detection d;
      d.position = Point2(jd.at("x").get<double>(), jd.at("y").get<double>());
      if (jd.contains("t")) d.timestamp = jd.at("t").get<double>();
      std::optional<double> doppler;
      if (jd.contains("doppler")) doppler = jd.at("doppler").get<double>();
      if (doppler && std::fabs(*doppler) < kDopplerStaticThreshold) {
        ++idx;
        continue;  // static return, dropped on ingest
      }
      if (jd.contains("dir")) {
        d.direction = parse_direction(jd.at("dir").get<std::string>());
      } else if (jd.contains("heading")) {
        const Json& h = jd.at("heading");
        d.orientation = Direction2(Vec2(h.at(0).get<double>(), h.at(1).get<double>()));
      } else if (doppler) {
        d.direction = classify_doppler(*doppler);
      } else {
        throw std::invalid_argument("needs one of 'dir', 'heading' or 'doppler'");
      }
      out.detections.push_back(std::move(d));
    } catch (const std::exception& e) {
      throw std::invalid_argument("dataset: detections[" + std::to_string(idx) + "]: " + e.what());
    }
    ++idx;
  }

  if (!j.contains("trajectories") || !j.at("trajectories").is_array()) {
    throw std::invalid_argument("dataset: missing 'trajectories' array");
  }
  idx = 0;
  for (const Json& jt : j.at("trajectories")) {
    try {
      Trajectory t;
      if (jt.at("id").is_string()) {
        t.id = jt.at("id").get<std::string>();
      } else {
        t.id = std::to_string(jt.at("id").get<std::int64_t>());
      }
      for (const Json& jp : jt.at("points")) {
        Detection d;
        d.position = Point2(jp.at("x").get<double>(), jp.at("y").get<double>());
        d.timestamp = jp.at("t").get<double>();
        if (jp.contains("heading")) {
          const Json& h = jp.at("heading");
          d.orientation = Direction2(Vec2(h.at(0).get<double>(), h.at(1).get<double>()));
        }
        t.points.push_back(std::move(d));
      }
      if (!t.is_valid()) {
        throw std::invalid_argument("needs >= 2 points with strictly increasing 't'");
      }
      out.trajectories.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw std::invalid_argument("dataset: trajectories[" + std::to_string(idx) +
                                  "]: " + e.what());
    }
    ++idx;
  }
  return out;
}

Dataset load_dataset(const std::string& path) {
  try {
    return parse_dataset(load_json(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Json to_json(const TopologyModel& model) {
  Json j;
  j["center"] = point_json(model.center);
  j["arms"] = Json::array();
  for (const Arm& a : model.arms) {
    Json ja;
    ja["heading"] = a.heading;
    ja["gap"] = a.gap;
    ja["lanes_in"] = Json::array();
    for (const Lane& l : a.lanes_in) ja["lanes_in"].push_back(Json{{"width", l.width}});
    ja["lanes_out"] = Json::array();
    for (const Lane& l : a.lanes_out) ja["lanes_out"].push_back(Json{{"width", l.width}});
    j["arms"].push_back(std::move(ja));
  }
  return j;
}

TopologyModel parse_topology(const Json& j) {
  TopologyModel model;
  model.center = parse_point(j.at("center"));
  for (const Json& ja : j.at("arms")) {
    Arm a;
    a.heading = ja.at("heading").get<double>();
    a.gap = ja.at("gap").get<double>();
    for (const Json& jl : ja.at("lanes_in")) a.lanes_in.push_back({jl.at("width").get<double>()});
    for (const Json& jl : ja.at("lanes_out")) a.lanes_out.push_back({jl.at("width").get<double>()});
    model.arms.push_back(std::move(a));
  }
  return model;
}

Json to_json(const LaneletModel& model) {
  Json j;
  j["nodes"] = Json::array();
  for (const Point2& p : model.nodes) j["nodes"].push_back(point_json(p));
  j["lanelets"] = Json::array();
  for (std::size_t i = 0; i < model.lanelets.size(); ++i) {
    const Lanelet& l = model.lanelets[i];
    Json jl;
    jl["id"] = l.id;
    if (i < model.info.size()) {
      const LaneletInfo& inf = model.info[i];
      if (inf.kind == LaneletKind::ArmLane) {
        jl["kind"] = "lane";
        jl["lane"] = lane_ref_json(inf.lane);
      } else {
        jl["kind"] = "connection";
        jl["from"] = lane_ref_json(inf.from);
        jl["to"] = lane_ref_json(inf.to);
      }
    }
    jl["left"] = l.left;
    jl["right"] = l.right;
    if (i < model.center_lines.size()) {
      jl["center_line"] = Json::array();
      for (const Point2& p : model.center_lines[i].points) {
        jl["center_line"].push_back(point_json(p));
      }
    }
    j["lanelets"].push_back(std::move(jl));
  }
  j["assignments"] = Json::object();
  for (const auto& [id, path] : model.assignments) j["assignments"][id] = path;
  return j;
}

LaneletModel parse_lanelet_model(const Json& j) {
  LaneletModel model;
  for (const Json& jp : j.at("nodes")) model.nodes.push_back(parse_point(jp));
  for (const Json& jl : j.at("lanelets")) {
    Lanelet l;
    l.id = jl.at("id").get<int>();
    l.left = jl.at("left").get<std::vector<int>>();
    l.right = jl.at("right").get<std::vector<int>>();
    LaneletInfo inf;
    const std::string kind = jl.value("kind", "lane");
    if (kind == "connection") {
      inf.kind = LaneletKind::Connection;
      inf.from = parse_lane_ref(jl.at("from"));
      inf.to = parse_lane_ref(jl.at("to"));
    } else {
      inf.kind = LaneletKind::ArmLane;
      if (jl.contains("lane")) inf.lane = parse_lane_ref(jl.at("lane"));
    }
    model.lanelets.push_back(std::move(l));
    model.info.push_back(inf);
  }
  if (j.contains("assignments")) {
    for (const auto& [id, path] : j.at("assignments").items()) {
      model.assignments[id] = path.get<std::vector<int>>();
    }
  }
  recompute_center_lines(model);
  return model;
}

Json to_json(const GroundTruth& gt) {
  Json j;
  j["topology"] = to_json(gt.topology);
  j["connections"] = Json::array();
  for (const ConnectionSpec& c : gt.connections) {
    Json jc;
    jc["from"] = lane_ref_json(c.from);
    jc["to"] = lane_ref_json(c.to);
    jc["center_line"] = Json::array();
    for (const Point2& p : c.center_line) jc["center_line"].push_back(point_json(p));
    j["connections"].push_back(std::move(jc));
  }
  j["lanelets"] = to_json(gt.lanelets);
  return j;
}

GroundTruth parse_ground_truth(const Json& j) {
  GroundTruth gt;
  gt.topology = parse_topology(j.at("topology"));
  for (const Json& jc : j.at("connections")) {
    ConnectionSpec c;
    c.from = parse_lane_ref(jc.at("from"));
    c.to = parse_lane_ref(jc.at("to"));
    for (const Json& jp : jc.at("center_line")) c.center_line.push_back(parse_point(jp));
    gt.connections.push_back(std::move(c));
  }
  gt.lanelets = parse_lanelet_model(j.at("lanelets"));
  return gt;
}

GroundTruth load_ground_truth(const std::string& path) {
  try {
    return parse_ground_truth(load_json(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Json to_json(const TopologyConfig& cfg) {
  Json j;
  j["sigma_perp"] = cfg.sigma_perp;
  j["sigma_ang"] = cfg.sigma_ang;
  j["arm_count_prior"] = count_prior_json(cfg.arm_count_prior);
  j["lane_count_prior"] = count_prior_json(cfg.lane_count_prior);
  j["min_arm_angle"] = cfg.min_arm_angle;
  j["lane_width_default"] = cfg.lane_width_default;
  j["n_samples"] = cfg.n_samples;
  j["t_initial"] = cfg.schedule.t_initial;
  j["t_final"] = cfg.schedule.t_final;
  j["likelihood_floor"] = cfg.likelihood_floor;
  j["ray_length"] = cfg.ray_length;
  return j;
}

TopologyConfig parse_topology_config(const Json& j) {
  TopologyConfig cfg = TopologyConfig::defaults();
  cfg.sigma_perp = j.value("sigma_perp", cfg.sigma_perp);
  cfg.sigma_ang = j.value("sigma_ang", cfg.sigma_ang);
  if (j.contains("arm_count_prior")) cfg.arm_count_prior = parse_count_prior(j.at("arm_count_prior"));
  if (j.contains("lane_count_prior")) {
    cfg.lane_count_prior = parse_count_prior(j.at("lane_count_prior"));
  }
  cfg.min_arm_angle = j.value("min_arm_angle", cfg.min_arm_angle);
  cfg.lane_width_default = j.value("lane_width_default", cfg.lane_width_default);
  cfg.n_samples = j.value("n_samples", cfg.n_samples);
  cfg.schedule.t_initial = j.value("t_initial", cfg.schedule.t_initial);
  cfg.schedule.t_final = j.value("t_final", cfg.schedule.t_final);
  cfg.likelihood_floor = j.value("likelihood_floor", cfg.likelihood_floor);
  cfg.ray_length = j.value("ray_length", cfg.ray_length);
  return cfg;
}

Json to_json(const LaneCourseConfig& cfg) {
  Json j;
  j["sigma_perp"] = cfg.sigma_perp;
  j["sigma_smooth"] = cfg.sigma_smooth;
  j["tau"] = cfg.tau;
  j["support_spacing"] = cfg.support_spacing;
  j["split_max"] = cfg.split_max;
  j["move_sigma"] = cfg.move_sigma;
  j["merge_radius"] = cfg.merge_radius;
  j["n_samples"] = cfg.n_samples;
  j["t_initial"] = cfg.schedule.t_initial;
  j["t_final"] = cfg.schedule.t_final;
  j["default_extent"] = cfg.default_extent;
  return j;
}

LaneCourseConfig parse_lane_course_config(const Json& j) {
  LaneCourseConfig cfg;
  cfg.sigma_perp = j.value("sigma_perp", cfg.sigma_perp);
  cfg.sigma_smooth = j.value("sigma_smooth", cfg.sigma_smooth);
  cfg.tau = j.value("tau", cfg.tau);
  cfg.support_spacing = j.value("support_spacing", cfg.support_spacing);
  cfg.split_max = j.value("split_max", cfg.split_max);
  cfg.move_sigma = j.value("move_sigma", cfg.move_sigma);
  cfg.merge_radius = j.value("merge_radius", cfg.merge_radius);
  cfg.n_samples = j.value("n_samples", cfg.n_samples);
  cfg.schedule.t_initial = j.value("t_initial", cfg.schedule.t_initial);
  cfg.schedule.t_final = j.value("t_final", cfg.schedule.t_final);
  cfg.default_extent = j.value("default_extent", cfg.default_extent);
  return cfg;
}

Json to_json(const GenerationParams& params) {
  Json j;
  j["arm_counts"] = params.arm_counts;
  j["min_lanes_per_direction"] = params.min_lanes_per_direction;
  j["max_lanes_per_direction"] = params.max_lanes_per_direction;
  j["min_angle"] = params.min_angle;
  j["max_gap"] = params.max_gap;
  j["lane_width"] = params.lane_width;
  j["seed"] = params.seed;
  j["arm_length"] = params.arm_length;
  j["sample_step"] = params.sample_step;
  j["speed"] = params.speed;
  j["max_trajectories_per_lane"] = params.max_trajectories_per_lane;
  j["noise_sigma"] = params.noise_sigma;
  j["clutter_count"] = params.clutter_count;
  j["clutter_radius"] = params.clutter_radius;
  j["center_range"] = params.center_range;
  return j;
}

GenerationParams parse_generation_params(const Json& j) {
  GenerationParams p;
  if (j.contains("arm_counts")) p.arm_counts = j.at("arm_counts").get<std::vector<int>>();
  p.min_lanes_per_direction = j.value("min_lanes_per_direction", p.min_lanes_per_direction);
  p.max_lanes_per_direction = j.value("max_lanes_per_direction", p.max_lanes_per_direction);
  p.min_angle = j.value("min_angle", p.min_angle);
  p.max_gap = j.value("max_gap", p.max_gap);
  p.lane_width = j.value("lane_width", p.lane_width);
  p.seed = j.value("seed", p.seed);
  p.arm_length = j.value("arm_length", p.arm_length);
  p.sample_step = j.value("sample_step", p.sample_step);
  p.speed = j.value("speed", p.speed);
  p.max_trajectories_per_lane = j.value("max_trajectories_per_lane", p.max_trajectories_per_lane);
  p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
  p.clutter_count = j.value("clutter_count", p.clutter_count);
  p.clutter_radius = j.value("clutter_radius", p.clutter_radius);
  p.center_range = j.value("center_range", p.center_range);
  return p;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load_json(const std::string& path) {
  return Json::parse(read_text_file(path));
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "id,arm_count_correct,lane_level_correct,center_error_m,mean_angle_error_deg,"
         "mean_deviation_m,stage1_ms,stage2_ms,error\n";
  for (const BenchmarkRow& r : rows) {
    out << r.id << ',' << (r.topology.arm_count_correct ? 1 : 0) << ','
        << (r.topology.lane_level_correct ? 1 : 0) << ',' << r.topology.center_error << ','
        << rad2deg(r.topology.mean_angle_error) << ',' << r.mean_deviation << ',' << r.stage1_ms
        << ',' << r.stage2_ms << ',' << r.error << '\n';
  }
  return out.str();
}

}  // namespace junction
