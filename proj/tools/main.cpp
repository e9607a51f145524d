#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "junction/evaluation.hpp"
#include "junction/io.hpp"
#include "junction/pipeline.hpp"
#include "junction/render.hpp"
#include "junction/synthetic.hpp"

namespace fs = std::filesystem;
using namespace junction;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stage1_samples;
  std::optional<std::uint64_t> stage2_samples;
  std::optional<double> sigma_perp;
  std::optional<double> sigma_ang;
  std::optional<double> tau;
  std::optional<int> parallelism;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Run configuration JSON file");
  cmd->add_option("--seed", opts.seed, "Master seed");
  cmd->add_option("--stage1-samples", opts.stage1_samples, "Topology chain length");
  cmd->add_option("--stage2-samples", opts.stage2_samples, "Lane course chain length");
  cmd->add_option("--sigma-perp", opts.sigma_perp, "Orthogonal distance deviation [m]");
  cmd->add_option("--sigma-ang", opts.sigma_ang, "Angular deviation [rad]");
  cmd->add_option("--tau", opts.tau, "Shared border point prior exponent");
  cmd->add_option("--parallelism", opts.parallelism, "Concurrent intersections in batch runs");
}

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg = parse_run_config(load_json(opts.config_path));
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.stage1_samples) cfg.stage1.n_samples = *opts.stage1_samples;
  if (opts.stage2_samples) cfg.stage2.n_samples = *opts.stage2_samples;
  if (opts.sigma_perp) {
    cfg.stage1.sigma_perp = *opts.sigma_perp;
    cfg.stage2.sigma_perp = *opts.sigma_perp;
  }
  if (opts.sigma_ang) cfg.stage1.sigma_ang = *opts.sigma_ang;
  if (opts.tau) cfg.stage2.tau = *opts.tau;
  if (opts.parallelism) cfg.parallelism = *opts.parallelism;
  return cfg;
}

EstimateMode parse_mode(const std::string& mode) {
  if (mode == "tracked") return EstimateMode::Tracked;
  if (mode == "detections") return EstimateMode::Detections;
  return EstimateMode::Auto;
}

std::optional<Point2> parse_xy(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double x = 0.0, y = 0.0;
  if (std::sscanf(s.c_str(), "%lf,%lf", &x, &y) != 2) {
    throw CLI::ValidationError("--seed-center", "expected 'x,y'");
  }
  return Point2(x, y);
}

std::string index_name(const char* stem, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.json", stem, i);
  return buf;
}

int cmd_generate(const CommonOptions& common, const std::string& out_dir, int count) {
  const RunConfig cfg = resolve_config(common);
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    GenerationParams params = cfg.generation;
    params.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    const Scenario scenario = make_scenario(params);

    Dataset dataset;
    dataset.seed = params.seed;
    dataset.seed_center = scenario.gt.topology.center;
    dataset.detections = scenario.detections;
    dataset.trajectories = scenario.trajectories;
    Json jd = to_json(dataset);
    jd["config"] = to_json(params);
    write_text_file((fs::path(out_dir) / index_name("dataset", i)).string(), jd.dump(1) + "\n");

    Json jg = to_json(scenario.gt);
    jg["seed"] = params.seed;
    jg["config"] = to_json(params);
    write_text_file((fs::path(out_dir) / index_name("gt", i)).string(), jg.dump(1) + "\n");
  }
  std::cout << "wrote " << count << " dataset/ground-truth pairs to " << out_dir << "\n";
  return 0;
}

int cmd_estimate(const CommonOptions& common, const std::string& dataset_path,
                 const std::string& out_dir, const std::string& mode_name,
                 const std::string& seed_center, bool skip_stage2) {
  const RunConfig cfg = resolve_config(common);
  const Dataset dataset = load_dataset(dataset_path);
  const EstimateResult result = estimate_dataset(dataset, cfg, parse_mode(mode_name),
                                                 parse_xy(seed_center), !skip_stage2);

  fs::create_directories(out_dir);
  Json jt;
  jt["seed"] = cfg.seed;
  jt["config"] = to_json(cfg);
  jt["mode"] = to_string(result.mode);
  jt["log_posterior"] = result.stage1_log_posterior;
  jt["stage1_ms"] = result.stage1_ms;
  jt["topology"] = to_json(result.topology);
  write_text_file((fs::path(out_dir) / "topology.json").string(), jt.dump(1) + "\n");

  if (result.lanelets) {
    Json jm;
    jm["seed"] = cfg.seed;
    jm["config"] = to_json(cfg);
    jm["log_posterior"] = result.stage2_log_posterior;
    jm["stage2_ms"] = result.stage2_ms;
    jm["map"] = to_json(*result.lanelets);
    write_text_file((fs::path(out_dir) / "map.json").string(), jm.dump(1) + "\n");
  }

  Json jtime;
  jtime["seed"] = cfg.seed;
  jtime["config"] = to_json(cfg);
  jtime["stage1_ms"] = result.stage1_ms;
  jtime["stage2_ms"] = result.stage2_ms;
  jtime["total_ms"] = result.stage1_ms + result.stage2_ms;
  write_text_file((fs::path(out_dir) / "timing.json").string(), jtime.dump(1) + "\n");

  std::cout << "stage1 " << result.stage1_ms << " ms";
  if (result.lanelets) std::cout << ", stage2 " << result.stage2_ms << " ms";
  std::cout << ", outputs in " << out_dir << "\n";
  return 0;
}

int cmd_benchmark(const CommonOptions& common, const std::string& dir, const std::string& out_dir,
                  const std::string& mode_name, bool skip_stage2) {
  const RunConfig cfg = resolve_config(common);
  const EstimateMode mode = parse_mode(mode_name);

  std::vector<std::pair<std::string, std::string>> pairs;  // dataset, gt
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("dataset_", 0) == 0 && entry.path().extension() == ".json") {
      const std::string stem = name.substr(8, name.size() - 8 - 5);
      const fs::path gt_path = fs::path(dir) / ("gt_" + stem + ".json");
      pairs.emplace_back(entry.path().string(),
                         fs::exists(gt_path) ? gt_path.string() : std::string());
      names.push_back(stem);
    }
  }
  if (pairs.empty()) throw std::runtime_error(dir + ": no dataset_*.json files found");

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&names](std::size_t a, std::size_t b) { return names[a] < names[b]; });

  std::vector<BenchmarkRow> rows(pairs.size());
  const auto run_one = [&](std::size_t oi) {
    const std::size_t i = order[oi];
    BenchmarkRow row;
    row.id = names[i];
    try {
      const Dataset dataset = load_dataset(pairs[i].first);
      const EstimateResult result =
          estimate_dataset(dataset, cfg, mode, std::nullopt, !skip_stage2);
      row.stage1_ms = result.stage1_ms;
      row.stage2_ms = result.stage2_ms;
      if (!pairs[i].second.empty()) {
        const GroundTruth gt = load_ground_truth(pairs[i].second);
        row.topology = topology_report(result.topology, gt.topology);
        if (result.lanelets) {
          row.mean_deviation =
              lane_course_report(result.topology, *result.lanelets, gt).mean_deviation;
        }
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows[oi] = std::move(row);
  };

  const int parallelism = std::max(1, cfg.parallelism);
  if (parallelism == 1) {
    for (std::size_t i = 0; i < order.size(); ++i) run_one(i);
  } else {
    std::size_t next = 0;
    while (next < order.size()) {
      std::vector<std::future<void>> batch;
      for (int k = 0; k < parallelism && next < order.size(); ++k, ++next) {
        batch.push_back(std::async(std::launch::async, run_one, next));
      }
      for (auto& f : batch) f.get();
    }
  }

  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / "benchmark.csv").string(), benchmark_csv(rows));

  std::vector<TopologyReport> reports;
  std::vector<double> deviations;
  std::size_t failures = 0;
  for (const BenchmarkRow& row : rows) {
    if (!row.error.empty()) {
      ++failures;
      continue;
    }
    reports.push_back(row.topology);
    if (!std::isnan(row.mean_deviation)) deviations.push_back(row.mean_deviation);
  }

  Json jb;
  jb["seed"] = cfg.seed;
  jb["config"] = to_json(cfg);
  jb["mode"] = to_string(mode);
  jb["count"] = rows.size();
  jb["failures"] = failures;
  if (!reports.empty()) {
    const SuiteSummary summary = aggregate(reports);
    jb["arm_count_accuracy"] = summary.arm_count_accuracy;
    jb["lane_level_accuracy"] = summary.lane_level_accuracy;
    jb["mean_center_error_m"] = summary.mean_center_error;
    jb["mean_angle_error_deg"] = rad2deg(summary.mean_angle_error);
    if (!deviations.empty()) {
      double sum = 0.0;
      for (double d : deviations) sum += d;
      jb["mean_deviation_m"] = sum / static_cast<double>(deviations.size());
    }
  }
  double s1 = 0.0, s2 = 0.0;
  for (const BenchmarkRow& row : rows) {
    s1 += row.stage1_ms;
    s2 += row.stage2_ms;
  }
  jb["mean_stage1_ms"] = s1 / static_cast<double>(rows.size());
  jb["mean_stage2_ms"] = s2 / static_cast<double>(rows.size());
  write_text_file((fs::path(out_dir) / "benchmark.json").string(), jb.dump(1) + "\n");

  std::cout << jb.dump(1) << "\n";
  return 0;
}

int cmd_render(const std::string& out_path, const std::string& dataset_path,
               const std::string& gt_path, const std::string& topology_path,
               const std::string& map_path) {
  RenderInput input;
  if (!dataset_path.empty()) {
    const Dataset dataset = load_dataset(dataset_path);
    input.detections = dataset.detections;
    input.trajectories = dataset.trajectories;
  }
  if (!gt_path.empty()) input.ground_truth = load_ground_truth(gt_path);
  if (!topology_path.empty()) {
    const Json j = load_json(topology_path);
    input.topology = parse_topology(j.contains("topology") ? j.at("topology") : j);
  }
  if (!map_path.empty()) {
    const Json j = load_json(map_path);
    input.lanelets = parse_lanelet_model(j.contains("map") ? j.at("map") : j);
  }
  write_text_file(out_path, render_svg(input));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lane-level intersection topology and lane course estimation from vehicle "
               "detections and trajectories"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* generate = app.add_subcommand("generate", "Generate synthetic intersection datasets");
  std::string gen_out = "data";
  int gen_count = 100;
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->add_option("--count", gen_count, "Number of intersections");
  add_common_options(generate, common);

  auto* estimate = app.add_subcommand("estimate", "Estimate one intersection from a dataset");
  std::string est_dataset, est_out = "estimate";
  std::string est_mode = "auto";
  std::string est_seed_center;
  bool est_skip_stage2 = false;
  estimate->add_option("--dataset", est_dataset, "Dataset JSON file")->required();
  estimate->add_option("--out", est_out, "Output directory");
  estimate->add_option("--mode", est_mode, "tracked | detections | auto");
  estimate->add_option("--seed-center", est_seed_center,
                       "x,y split center for real data without a recorded one");
  estimate->add_flag("--skip-stage2", est_skip_stage2, "Topology only");
  add_common_options(estimate, common);

  auto* benchmark = app.add_subcommand("benchmark", "Estimate and evaluate a dataset directory");
  std::string bench_dir, bench_out = "benchmark";
  std::string bench_mode = "auto";
  bool bench_skip_stage2 = false;
  benchmark->add_option("--dir", bench_dir, "Directory with dataset_*/gt_* pairs")->required();
  benchmark->add_option("--out", bench_out, "Output directory");
  benchmark->add_option("--mode", bench_mode, "tracked | detections | auto");
  benchmark->add_flag("--skip-stage2", bench_skip_stage2, "Topology only");
  add_common_options(benchmark, common);

  auto* render = app.add_subcommand("render", "Render models and measurements to SVG");
  std::string render_out = "scene.svg";
  std::string render_dataset, render_gt, render_topology, render_map;
  render->add_option("--out", render_out, "Output SVG file");
  render->add_option("--dataset", render_dataset, "Dataset JSON");
  render->add_option("--gt", render_gt, "Ground truth JSON");
  render->add_option("--topology", render_topology, "Topology estimate JSON");
  render->add_option("--map", render_map, "Lanelet map JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(common, gen_out, gen_count);
    if (estimate->parsed()) {
      return cmd_estimate(common, est_dataset, est_out, est_mode, est_seed_center,
                          est_skip_stage2);
    }
    if (benchmark->parsed()) {
      return cmd_benchmark(common, bench_dir, bench_out, bench_mode, bench_skip_stage2);
    }
    if (render->parsed()) {
      return cmd_render(render_out, render_dataset, render_gt, render_topology, render_map);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
