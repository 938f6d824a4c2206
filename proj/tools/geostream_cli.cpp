// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 1 config error, 2 partial
// object failures, 3 fatal.

#ifdef GEOSTREAM_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "geostream/bev_projection.hpp"
#include "geostream/box_recovery.hpp"
#include "geostream/kitti.hpp"
#include "geostream/losses.hpp"
#include "geostream/metrics.hpp"
#include "geostream/pipeline.hpp"
#include "geostream/scene_io.hpp"
#include "geostream/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace geostream;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;
constexpr int kExitFatal = 3;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

struct NoiseFlags {
  double sigma_depth = 0.0;
  double sigma_dbr = 0.0;
  double sigma_corner = 0.0;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--sigma-depth", sigma_depth, "Laplacian scale of depth noise (m)");
    app->add_option("--sigma-dbr", sigma_dbr, "Laplacian scale of residual noise (m)");
    app->add_option("--sigma-corner", sigma_corner, "Laplacian scale of corner displacement noise (px)");
    app->add_option("--noise-seed", seed, "noise seed");
  }
  NoiseSpec spec() const { return {sigma_depth, sigma_dbr, sigma_corner, seed}; }
};

RenderResult render_noisy(const Scene& scene, const NoiseFlags& nf, double u_occluded) {
  return add_noise(render(scene, {u_occluded}), nf.spec());
}

int cmd_simulate(std::uint64_t seed, int count, int objects, const std::string& out_dir, const std::string& out) {
  if (count == 1 && !out.empty()) {
    write_text(out, scene_to_json(sample_scene(seed, objects)).dump(2) + "\n");
    return kExitOk;
  }
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%06d.json", i);
    save_scene(sample_scene(rng::hash(seed, static_cast<std::uint64_t>(i)), objects), fs::path(out_dir) / name);
  }
  std::cout << "wrote " << count << " scenes to " << out_dir << "\n";
  return kExitOk;
}

int cmd_render(const std::string& scene_path, const NoiseFlags& nf, double u_occluded, const std::string& out) {
  const Scene scene = load_scene(scene_path);
  const RenderResult r = render_noisy(scene, nf, u_occluded);
  json depth = json::array();
  for (int row = 0; row < r.depth.rows; ++row) {
    json line = json::array();
    for (int c = 0; c < r.depth.cols; ++c) {
      const auto idx = r.depth.index(row, c);
      line.push_back(r.depth.valid[idx] ? json(r.depth.depth[idx]) : json(nullptr));
    }
    depth.push_back(std::move(line));
  }
  json instance = json::array();
  for (int row = 0; row < r.depth.rows; ++row) {
    json line = json::array();
    for (int c = 0; c < r.depth.cols; ++c) line.push_back(r.depth.instance[r.depth.index(row, c)]);
    instance.push_back(std::move(line));
  }
  json objects = json::array();
  for (const auto& o : r.objects) {
    json pixels = json::array();
    for (const auto& p : o.patch.pixels) {
      if (!p.valid) continue;
      pixels.push_back({{"pixel", {p.pixel.x(), p.pixel.y()}},
                        {"depth", p.depth},
                        {"residuals", p.dbr.residuals},
                        {"uncertainties", p.dbr.uncertainties}});
    }
    objects.push_back({{"id", o.id},
                       {"roi_cells", o.patch.pixels.size()},
                       {"valid_cells", o.patch.valid_count()},
                       {"rho_gt", o.rho_valid ? json(o.rho_gt) : json(nullptr)},
                       {"edge_visible", o.edge_visible},
                       {"face_occluded", o.face_occluded},
                       {"pixels", std::move(pixels)}});
  }
  json doc{{"rows", r.depth.rows},
           {"cols", r.depth.cols},
           {"stride", r.depth.stride},
           {"depth", std::move(depth)},
           {"instance", std::move(instance)},
           {"objects", std::move(objects)}};
  write_text(out, doc.dump() + "\n");
  return kExitOk;
}

int cmd_recover(const std::string& scene_path, const NoiseFlags& nf, double u_occluded, const SolverConfigd& solver,
                const std::string& out, const std::string& json_out) {
  const Scene scene = load_scene(scene_path);
  const RenderResult r = render_noisy(scene, nf, u_occluded);
  std::vector<kitti::LabelRow> rows;
  json objects = json::array();
  int failures = 0;
  for (const auto& o : r.objects) {
    json j{{"id", o.id}, {"gt", box_to_json(o.box)}};
    try {
      const auto rec = recover_box(o.patch, o.box.theta, scene.camera, solver);
      rows.push_back(kitti::from_box(rec.box, scene.camera, "Car", 1.0));
      j["recovered"] = box_to_json(rec.box);
      j["condition"] = rec.condition;
      j["objective"] = rec.objective;
    } catch (const Error& e) {
      ++failures;
      j["error"] = e.what();
    }
    objects.push_back(std::move(j));
  }
  write_text(out, kitti::serialize_labels(rows));
  if (!json_out.empty()) write_text(json_out, json{{"objects", objects}}.dump(2) + "\n");
  return failures > 0 ? kExitPartial : kExitOk;
}

int cmd_bev_depth(const std::string& scene_path, const NoiseFlags& nf, double u_occluded, double k,
                  const std::string& out) {
  const Scene scene = load_scene(scene_path);
  const RenderResult r = render_noisy(scene, nf, u_occluded);
  json objects = json::array();
  int failures = 0;
  for (const auto& o : r.objects) {
    json j{{"id", o.id}, {"gt_z", o.box.center.z()}};
    if (o.bev.pixels.empty()) {
      ++failures;
      j["error"] = "no visible pixel";
      objects.push_back(std::move(j));
      continue;
    }
    const auto rho = aggregate_corners_x(o.bev);
    const auto hyps = edge_hypotheses(rho, o.box.l, o.box.w, o.box.theta, scene.camera, o.edge_visible, k);
    json edges = json::array();
    for (const auto& h : hyps)
      edges.push_back({{"corners", {h.corner_a, h.corner_b}},
                       {"rho", {h.rho_a, h.rho_b}},
                       {"visible", h.visible},
                       {"omega", h.weight},
                       {"z_c", h.z_c ? json(*h.z_c) : json(nullptr)}});
    j["rho"] = rho;
    j["edges"] = std::move(edges);
    j["l_bpc"] = l_bpc(hyps, o.box.center.z());
    objects.push_back(std::move(j));
  }
  write_text(out, json{{"objects", objects}}.dump(2) + "\n");
  return failures > 0 ? kExitPartial : kExitOk;
}

int cmd_eval(const std::vector<std::string>& gt_files, const std::vector<std::string>& det_files, double threshold,
             const std::string& out) {
  if (gt_files.size() != det_files.size()) throw ConfigError("--gt and --det need the same number of files");
  std::vector<FrameEval> frames;
  for (std::size_t i = 0; i < gt_files.size(); ++i) {
    FrameEval f;
    for (const auto& row : kitti::parse_labels(read_file(gt_files[i])).rows) f.gts.push_back(kitti::to_box(row));
    for (const auto& row : kitti::parse_labels(read_file(det_files[i])).rows)
      f.detections.push_back({kitti::to_box(row), row.score.value_or(1.0), row.type});
    frames.push_back(std::move(f));
  }
  const auto summary = evaluate(frames, threshold);
  json doc{{"ap_3d", eval_report_to_json(summary.ap_3d)}, {"ap_bev", eval_report_to_json(summary.ap_bev)}};
  write_text(out, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_pipeline(RunConfig cfg, bool quiet) {
  const PipelineResult result = run_pipeline(cfg);
  write_pipeline_outputs(result, cfg);
  if (!quiet) {
    std::printf("scenes=%zu failures=%d unobserved=%d AP3D@%.2f=%.6f APBEV@%.2f=%.6f\n", result.scenes.size(),
                result.failures, result.unobserved, cfg.iou_threshold, result.eval.ap_3d.ap, cfg.iou_threshold,
                result.eval.ap_bev.ap);
    std::printf("outputs in %s\n", cfg.output_dir.string().c_str());
  }
  return result.failures > 0 ? kExitPartial : kExitOk;
}

// Fast end-to-end checks against exact geometry.
int cmd_selftest() {
  int failed = 0;
  auto check = [&](bool ok, const char* what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what);
    if (!ok) ++failed;
  };

  SamplingRanges ranges;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Scene scene = sample_scene(100 + i, 1, ranges);
    RenderResult r = render(scene, {0.0});
    const auto& o = r.objects.front();
    if (o.patch.valid_count() == 0) continue;
    const auto rec = recover_box(o.patch, o.box.theta, scene.camera, SolverConfigd{});
    worst = std::max({worst, std::abs(rec.box.h - o.box.h) / o.box.h, std::abs(rec.box.w - o.box.w) / o.box.w,
                      std::abs(rec.box.l - o.box.l) / o.box.l, (rec.box.center - o.box.center).norm()});
  }
  check(worst < 1e-6, "noiseless box recovery is exact");

  Box3d box;
  box.center = Vec3d(2.0, 1.0, 25.0);
  box.l = 4.0;
  box.w = 1.8;
  box.theta = 0.7;
  const Camerad cam;
  const auto corners = bev_corners(box);
  bool bev_ok = true;
  for (const auto& e : kBevEdges) {
    const double za = depth_from_edge(project(cam, corners[e[0]]).x(), project(cam, corners[e[1]]).x(),
                                      kBevCornerSigns[e[0]], kBevCornerSigns[e[1]], box.l, box.w, box.theta, cam);
    bev_ok = bev_ok && std::abs(za - box.center.z()) < 1e-6;
  }
  check(bev_ok, "BEV edge depth is exact");
  check(std::abs(iou_3d(box, box) - 1.0) < 1e-12, "self IoU is one");
  check(std::abs(lau(1.0, 0.0, std::numbers::sqrt2) - (1.0 + std::log(std::numbers::sqrt2))) < 1e-12,
        "LAU closed form");
  return failed == 0 ? kExitOk : kExitFatal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geostream: geometry-stream box recovery, BEV depth constraints and evaluation"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "sample random scenes to JSON");
  std::uint64_t sim_seed = 0;
  int sim_count = 1;
  int sim_objects = 4;
  std::string sim_dir = "scenes";
  std::string sim_out;
  sim->add_option("--seed", sim_seed, "sampling seed");
  sim->add_option("--count", sim_count, "number of scenes")->check(CLI::NonNegativeNumber);
  sim->add_option("--objects", sim_objects, "boxes per scene")->check(CLI::NonNegativeNumber);
  sim->add_option("--out-dir", sim_dir, "directory for scene_NNNNNN.json files");
  sim->add_option("--out", sim_out, "single-scene output file ('-' for stdout; requires --count 1)");

  // render
  auto* ren = app.add_subcommand("render", "ray-cast a scene into depth, DBR and BEV corner fields");
  std::string ren_scene, ren_out = "-";
  NoiseFlags ren_noise;
  double u_occ = 0.9;
  ren->add_option("--scene", ren_scene, "scene JSON")->required();
  ren->add_option("--out", ren_out, "output JSON ('-' for stdout)");
  ren->add_option("--u-occluded", u_occ, "uncertainty of occluded faces")->check(CLI::Range(0.0, 1.0));
  ren_noise.add(ren);

  // recover
  auto* rec = app.add_subcommand("recover", "recover boxes from rendered fields");
  std::string rec_scene, rec_out = "-", rec_json;
  NoiseFlags rec_noise;
  SolverConfigd solver;
  std::string mass = "total";
  rec->add_option("--scene", rec_scene, "scene JSON")->required();
  rec->add_option("--out", rec_out, "KITTI label output ('-' for stdout)");
  rec->add_option("--json", rec_json, "optional JSON detail output");
  rec->add_option("--u-occluded", u_occ, "uncertainty of occluded faces")->check(CLI::Range(0.0, 1.0));
  rec->add_option("--alpha", solver.alpha, "width prior weight");
  rec->add_option("--beta", solver.beta, "length prior weight");
  rec->add_option("--gamma", solver.gamma, "height prior weight");
  rec->add_option("--mass", mass, "uncertainty mass: total | per_axis")->check(CLI::IsMember({"total", "per_axis"}));
  rec_noise.add(rec);

  // bev-depth
  auto* bev = app.add_subcommand("bev-depth", "object depth hypotheses from BEV edge projections");
  std::string bev_scene, bev_out = "-";
  NoiseFlags bev_noise;
  double k = 0.05;
  bev->add_option("--scene", bev_scene, "scene JSON")->required();
  bev->add_option("--out", bev_out, "output JSON ('-' for stdout)");
  bev->add_option("--k", k, "edge weight rate per pixel")->check(CLI::PositiveNumber);
  bev->add_option("--u-occluded", u_occ, "uncertainty of occluded faces")->check(CLI::Range(0.0, 1.0));
  bev_noise.add(bev);

  // eval
  auto* ev = app.add_subcommand("eval", "AP|R40 of KITTI-format detections against ground truth");
  std::vector<std::string> gt_files, det_files;
  double threshold = 0.7;
  std::string ev_out = "-";
  ev->add_option("--gt", gt_files, "ground-truth label files (one per frame)")->required();
  ev->add_option("--det", det_files, "detection label files, same order")->required();
  ev->add_option("--iou", threshold, "IoU threshold")->check(CLI::Range(0.0, 1.0));
  ev->add_option("--out", ev_out, "output JSON ('-' for stdout)");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "simulate, recover and evaluate end to end");
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> workers_override, scenes_override;
  std::optional<double> sd_override, sr_override, sc_override, k_override;
  bool quiet = false;
  pipe->add_option("--config", config_path, "run config JSON");
  pipe->add_option("--output-dir", out_dir, "override output directory");
  pipe->add_option("--seed", seed_override, "override seed");
  pipe->add_option("--workers", workers_override, "override worker count");
  pipe->add_option("--scenes", scenes_override, "override scene count");
  pipe->add_option("--sigma-depth", sd_override, "override depth noise");
  pipe->add_option("--sigma-dbr", sr_override, "override residual noise");
  pipe->add_option("--sigma-corner", sc_override, "override corner noise");
  pipe->add_option("--k", k_override, "override edge weight rate");
  pipe->add_flag("--quiet", quiet, "no summary line");

  app.add_subcommand("selftest", "run built-in geometric checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(sim_seed, sim_count, sim_objects, sim_dir, sim_out);
    if (*ren) return cmd_render(ren_scene, ren_noise, u_occ, ren_out);
    if (*rec) {
      solver.mass = mass == "total" ? UncertaintyMass::total : UncertaintyMass::per_axis;
      solver.validate();
      return cmd_recover(rec_scene, rec_noise, u_occ, solver, rec_out, rec_json);
    }
    if (*bev) return cmd_bev_depth(bev_scene, bev_noise, u_occ, k, bev_out);
    if (*ev) return cmd_eval(gt_files, det_files, threshold, ev_out);
    if (*pipe) {
      RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (seed_override) cfg.seed = *seed_override;
      if (workers_override) cfg.workers = *workers_override;
      if (scenes_override) cfg.scene_count = *scenes_override;
      if (sd_override) cfg.noise.sigma_depth = *sd_override;
      if (sr_override) cfg.noise.sigma_dbr = *sr_override;
      if (sc_override) cfg.noise.sigma_corner = *sc_override;
      if (k_override) cfg.k = *k_override;
      return cmd_pipeline(cfg, quiet);
    }
    return cmd_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return kExitFatal;
  }
}
