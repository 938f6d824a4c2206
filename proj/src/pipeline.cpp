// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include "geostream/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "geostream/kitti.hpp"
#include "geostream/losses.hpp"
#include "geostream/scene_io.hpp"

namespace geostream {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSceneStream = 0x5ce5e;
constexpr std::uint64_t kHeadingStream = 0x4ead;
constexpr std::uint64_t kNoiseStream = 0x4015e;

json range_to_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string("ranges.") + name + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json box_json(const Box3d& b) { return box_to_json(b); }

}  // namespace

void RunConfig::validate() const {
  for (const auto& f : scene_files)
    if (!fs::exists(f)) throw ConfigError("scene file does not exist: " + f.string());
  if (scene_files.empty() && scene_count < 0) throw ConfigError("scene_count must be non-negative");
  if (objects_per_scene < 0) throw ConfigError("objects_per_scene must be non-negative");
  if (!camera.is_valid()) throw ConfigError("camera intrinsics must be positive");
  if (stride <= 0) throw ConfigError("stride must be positive");
  if (!(k > 0.0)) throw ConfigError("k must be positive");
  if (!(u_occluded >= 0.0 && u_occluded <= 1.0)) throw ConfigError("u_occluded must lie in [0, 1]");
  if (!(heading_noise >= 0.0)) throw ConfigError("heading_noise must be non-negative");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw ConfigError("iou_threshold must lie in (0, 1]");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  try {
    noise.validate();
    solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  try {
    reject_unknown(doc,
                   {"scene_files", "scene_count", "objects_per_scene", "ranges", "camera", "stride", "noise", "solver",
                    "k", "u_occluded", "heading_noise", "iou_threshold", "workers", "output_dir", "seed"},
                   "config");
    if (doc.contains("scene_files"))
      for (const auto& f : doc.at("scene_files")) cfg.scene_files.emplace_back(f.get<std::string>());
    cfg.scene_count = doc.value("scene_count", cfg.scene_count);
    cfg.objects_per_scene = doc.value("objects_per_scene", cfg.objects_per_scene);
    if (doc.contains("ranges")) {
      const auto& r = doc.at("ranges");
      reject_unknown(r, {"x", "y", "z", "h", "w", "l", "theta", "allow_overlap", "max_attempts"}, "ranges");
      if (r.contains("x")) cfg.ranges.x = range_from_json(r.at("x"), "x");
      if (r.contains("y")) cfg.ranges.y = range_from_json(r.at("y"), "y");
      if (r.contains("z")) cfg.ranges.z = range_from_json(r.at("z"), "z");
      if (r.contains("h")) cfg.ranges.h = range_from_json(r.at("h"), "h");
      if (r.contains("w")) cfg.ranges.w = range_from_json(r.at("w"), "w");
      if (r.contains("l")) cfg.ranges.l = range_from_json(r.at("l"), "l");
      if (r.contains("theta")) cfg.ranges.theta = range_from_json(r.at("theta"), "theta");
      cfg.ranges.allow_overlap = r.value("allow_overlap", cfg.ranges.allow_overlap);
      cfg.ranges.max_attempts = r.value("max_attempts", cfg.ranges.max_attempts);
    }
    if (doc.contains("camera")) {
      const auto& c = doc.at("camera");
      reject_unknown(c, {"fx", "fy", "cx", "cy", "width", "height"}, "camera");
      cfg.camera.fx = c.value("fx", cfg.camera.fx);
      cfg.camera.fy = c.value("fy", cfg.camera.fy);
      cfg.camera.cx = c.value("cx", cfg.camera.cx);
      cfg.camera.cy = c.value("cy", cfg.camera.cy);
      cfg.camera.width = c.value("width", cfg.camera.width);
      cfg.camera.height = c.value("height", cfg.camera.height);
    }
    cfg.stride = doc.value("stride", cfg.stride);
    if (doc.contains("noise")) {
      const auto& n = doc.at("noise");
      reject_unknown(n, {"sigma_depth", "sigma_dbr", "sigma_corner", "seed"}, "noise");
      cfg.noise.sigma_depth = n.value("sigma_depth", cfg.noise.sigma_depth);
      cfg.noise.sigma_dbr = n.value("sigma_dbr", cfg.noise.sigma_dbr);
      cfg.noise.sigma_corner = n.value("sigma_corner", cfg.noise.sigma_corner);
      cfg.noise.seed = n.value("seed", cfg.noise.seed);
    }
    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      reject_unknown(s, {"alpha", "beta", "gamma", "prior", "min_weight_det", "mass"}, "solver");
      cfg.solver.alpha = s.value("alpha", cfg.solver.alpha);
      cfg.solver.beta = s.value("beta", cfg.solver.beta);
      cfg.solver.gamma = s.value("gamma", cfg.solver.gamma);
      cfg.solver.min_weight_det = s.value("min_weight_det", cfg.solver.min_weight_det);
      if (s.contains("prior")) {
        const auto& p = s.at("prior");
        reject_unknown(p, {"h", "w", "l"}, "solver.prior");
        cfg.solver.prior.h = p.value("h", cfg.solver.prior.h);
        cfg.solver.prior.w = p.value("w", cfg.solver.prior.w);
        cfg.solver.prior.l = p.value("l", cfg.solver.prior.l);
      }
      if (s.contains("mass")) {
        const auto m = s.at("mass").get<std::string>();
        if (m == "total")
          cfg.solver.mass = UncertaintyMass::total;
        else if (m == "per_axis")
          cfg.solver.mass = UncertaintyMass::per_axis;
        else
          throw ConfigError("solver.mass must be 'total' or 'per_axis'");
      }
    }
    cfg.k = doc.value("k", cfg.k);
    cfg.u_occluded = doc.value("u_occluded", cfg.u_occluded);
    cfg.heading_noise = doc.value("heading_noise", cfg.heading_noise);
    cfg.iou_threshold = doc.value("iou_threshold", cfg.iou_threshold);
    cfg.workers = doc.value("workers", cfg.workers);
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    cfg.seed = doc.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json files = json::array();
  for (const auto& f : cfg.scene_files) files.push_back(f.string());
  const auto& r = cfg.ranges;
  const auto& s = cfg.solver;
  return json{
      {"scene_files", files},
      {"scene_count", cfg.scene_count},
      {"objects_per_scene", cfg.objects_per_scene},
      {"ranges",
       {{"x", range_to_json(r.x)},
        {"y", range_to_json(r.y)},
        {"z", range_to_json(r.z)},
        {"h", range_to_json(r.h)},
        {"w", range_to_json(r.w)},
        {"l", range_to_json(r.l)},
        {"theta", range_to_json(r.theta)},
        {"allow_overlap", r.allow_overlap},
        {"max_attempts", r.max_attempts}}},
      {"camera",
       {{"fx", cfg.camera.fx},
        {"fy", cfg.camera.fy},
        {"cx", cfg.camera.cx},
        {"cy", cfg.camera.cy},
        {"width", cfg.camera.width},
        {"height", cfg.camera.height}}},
      {"stride", cfg.stride},
      {"noise",
       {{"sigma_depth", cfg.noise.sigma_depth},
        {"sigma_dbr", cfg.noise.sigma_dbr},
        {"sigma_corner", cfg.noise.sigma_corner},
        {"seed", cfg.noise.seed}}},
      {"solver",
       {{"alpha", s.alpha},
        {"beta", s.beta},
        {"gamma", s.gamma},
        {"prior", {{"h", s.prior.h}, {"w", s.prior.w}, {"l", s.prior.l}}},
        {"min_weight_det", s.min_weight_det},
        {"mass", s.mass == UncertaintyMass::total ? "total" : "per_axis"}}},
      {"k", cfg.k},
      {"u_occluded", cfg.u_occluded},
      {"heading_noise", cfg.heading_noise},
      {"iou_threshold", cfg.iou_threshold},
      {"workers", cfg.workers},
      {"output_dir", cfg.output_dir.string()},
      {"seed", cfg.seed}};
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(doc);
}

Scene pipeline_scene(const RunConfig& cfg, int scene_id) {
  if (!cfg.scene_files.empty()) return load_scene(cfg.scene_files.at(static_cast<std::size_t>(scene_id)));
  return sample_scene(rng::hash(cfg.seed, kSceneStream, static_cast<std::uint64_t>(scene_id)), cfg.objects_per_scene,
                      cfg.ranges, cfg.camera, cfg.stride);
}

SceneRecord process_scene(const RunConfig& cfg, int scene_id, const Scene& scene) {
  SceneRecord rec;
  rec.scene_id = scene_id;
  rec.scene = scene;

  NoiseSpec noise = cfg.noise;
  noise.seed = rng::hash(cfg.noise.seed, kNoiseStream, static_cast<std::uint64_t>(scene_id));
  const RenderResult fields = add_noise(render(scene, {cfg.u_occluded}), noise);

  for (const auto& obj : fields.objects) {
    ObjectRecord o;
    o.scene_id = scene_id;
    o.object_id = obj.id;
    o.gt = obj.box;
    o.valid_pixels = static_cast<int>(obj.patch.valid_count());
    for (bool v : obj.edge_visible) o.n_visible_edges += v ? 1 : 0;
    if (o.valid_pixels == 0) {
      o.status = ObjectStatus::unobserved;
      rec.objects.push_back(std::move(o));
      continue;
    }
    o.theta_used = obj.box.theta;
    if (cfg.heading_noise > 0.0)
      o.theta_used += rng::laplace(
          rng::hash(cfg.seed, kHeadingStream, static_cast<std::uint64_t>(scene_id), static_cast<std::uint64_t>(obj.id)),
          cfg.heading_noise);

    // Context-stream stand-in for the consistency terms: the ground-truth box.
    const Box3d& cs = obj.box;
    if (!obj.bev.pixels.empty()) {
      const auto rho = aggregate_corners_x(obj.bev);
      o.edges = edge_hypotheses(rho, cs.l, cs.w, o.theta_used, scene.camera, obj.edge_visible, cfg.k);
      o.has_edges = true;
      const auto bpc = l_bpc_detailed(o.edges, cs.center.z());
      o.l_bpc = bpc.value;
      o.degenerate_edges = bpc.degenerate_edges;
    }
    try {
      o.recovered = recover_box(obj.patch, o.theta_used, scene.camera, cfg.solver);
      o.l_cg = l_cg(o.recovered->box, cs);
      o.iou3d = iou_3d(o.recovered->box, obj.box);
      double wsum = 0.0;
      for (const auto& px : obj.patch.pixels) {
        if (!px.valid) continue;
        for (double u : px.dbr.uncertainties) wsum += std::max(0.0, 1.0 - u);
      }
      o.score = wsum / (6.0 * o.valid_pixels);
    } catch (const Error& e) {
      o.status = ObjectStatus::failed;
      o.error = e.what();
      o.recovered.reset();
    }
    rec.objects.push_back(std::move(o));
  }
  return rec;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const int n = cfg.scene_files.empty() ? cfg.scene_count : static_cast<int>(cfg.scene_files.size());
  std::vector<std::optional<SceneRecord>> slots(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        slots[i] = process_scene(cfg, i, pipeline_scene(cfg, i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min(cfg.workers, std::max(1, n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  PipelineResult result;
  std::vector<FrameEval> frames;
  for (auto& slot : slots) {
    FrameEval frame;
    for (const auto& o : slot->objects) {
      if (o.status == ObjectStatus::unobserved) {
        ++result.unobserved;
        continue;
      }
      frame.gts.push_back(o.gt);
      if (o.status == ObjectStatus::failed) {
        ++result.failures;
        continue;
      }
      frame.detections.push_back({o.recovered->box, o.score, "Car"});
    }
    frames.push_back(std::move(frame));
    result.scenes.push_back(std::move(*slot));
  }
  result.eval = evaluate(frames, cfg.iou_threshold);
  return result;
}

std::string report_csv(const PipelineResult& result) {
  std::string out = "scene_id,object_id,err_H,err_W,err_L,err_center,l_cg,l_bpc,n_visible_edges,iou3d\n";
  for (const auto& s : result.scenes) {
    for (const auto& o : s.objects) {
      out += std::to_string(o.scene_id) + ',' + std::to_string(o.object_id) + ',';
      if (o.recovered) {
        const Box3d& b = o.recovered->box;
        out += fmt_double(std::abs(b.h - o.gt.h)) + ',' + fmt_double(std::abs(b.w - o.gt.w)) + ',' +
               fmt_double(std::abs(b.l - o.gt.l)) + ',' + fmt_double((b.center - o.gt.center).norm()) + ',' +
               fmt_double(o.l_cg) + ',';
      } else {
        out += "nan,nan,nan,nan,nan,";
      }
      out += (o.has_edges ? fmt_double(o.l_bpc) : std::string("nan")) + ',' + std::to_string(o.n_visible_edges) +
             ',' + (o.recovered ? fmt_double(o.iou3d) : std::string("nan")) + '\n';
    }
  }
  return out;
}

json eval_report_to_json(const EvalReport& rep) {
  json matches = json::array();
  for (const auto& m : rep.matches)
    matches.push_back({{"frame", m.frame}, {"detection", m.detection}, {"gt", m.gt}, {"iou", m.iou}, {"score", m.score}});
  return json{{"mode", iou_mode_name(rep.mode)},
              {"iou_threshold", rep.iou_threshold},
              {"ap", rep.ap},
              {"num_gt", rep.num_gt},
              {"num_detections", rep.num_detections},
              {"recall_points", rep.recall_points},
              {"precision", rep.precision},
              {"matches", matches}};
}

json report_json(const PipelineResult& result, const RunConfig& cfg) {
  json objects = json::array();
  for (const auto& s : result.scenes) {
    for (const auto& o : s.objects) {
      json j{{"scene_id", o.scene_id},
             {"object_id", o.object_id},
             {"status", status_name(o.status)},
             {"gt", box_json(o.gt)},
             {"valid_pixels", o.valid_pixels},
             {"n_visible_edges", o.n_visible_edges}};
      if (!o.error.empty()) j["error"] = o.error;
      if (o.status == ObjectStatus::unobserved) {
        objects.push_back(std::move(j));
        continue;
      }
      j["theta_used"] = o.theta_used;
      if (o.recovered) {
        j["recovered"] = box_json(o.recovered->box);
        j["condition"] = {{"length", o.recovered->condition[0]},
                          {"width", o.recovered->condition[1]},
                          {"height", o.recovered->condition[2]}};
        j["objective"] = o.recovered->objective;
        j["score"] = o.score;
        j["l_cg"] = o.l_cg;
        j["iou3d"] = o.iou3d;
      }
      if (o.has_edges) {
        json edges = json::array();
        for (const auto& e : o.edges) {
          edges.push_back({{"corners", {e.corner_a, e.corner_b}},
                           {"rho", {e.rho_a, e.rho_b}},
                           {"visible", e.visible},
                           {"omega", e.weight},
                           {"z_c", e.z_c ? json(*e.z_c) : json(nullptr)}});
        }
        j["edges"] = std::move(edges);
        j["l_bpc"] = o.l_bpc;
        j["degenerate_edges"] = o.degenerate_edges;
      }
      objects.push_back(std::move(j));
    }
  }
  return json{{"config", run_config_to_json(cfg)},
              {"scenes", result.scenes.size()},
              {"failures", result.failures},
              {"unobserved", result.unobserved},
              {"ap_3d", eval_report_to_json(result.eval.ap_3d)},
              {"ap_bev", eval_report_to_json(result.eval.ap_bev)},
              {"objects", std::move(objects)}};
}

void write_pipeline_outputs(const PipelineResult& result, const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir / "labels");
  {
    std::ofstream out(cfg.output_dir / "report.json");
    out << report_json(result, cfg).dump(2) << '\n';
  }
  {
    std::ofstream out(cfg.output_dir / "report.csv");
    out << report_csv(result);
  }
  for (const auto& s : result.scenes) {
    std::vector<kitti::LabelRow> rows;
    for (const auto& o : s.objects)
      if (o.recovered) rows.push_back(kitti::from_box(o.recovered->box, s.scene.camera, "Car", o.score));
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.txt", s.scene_id);
    std::ofstream out(cfg.output_dir / "labels" / name);
    out << kitti::serialize_labels(rows);
  }
}

}  // namespace geostream
