// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geostream/bev_projection.hpp"
#include "geostream/box_recovery.hpp"
#include "geostream/metrics.hpp"
#include "geostream/scene.hpp"
#include "geostream/simulator.hpp"

namespace geostream {

struct RunConfig {
  // Scene files take precedence; otherwise `scene_count` scenes are sampled.
  std::vector<std::filesystem::path> scene_files;
  int scene_count = 20;
  int objects_per_scene = 4;
  SamplingRanges ranges;
  Camerad camera;
  int stride = 4;

  NoiseSpec noise;
  SolverConfigd solver;
  double k = 0.05;
  double u_occluded = 0.9;
  double heading_noise = 0.0;  // Laplacian scale (radians) added to the true heading
  double iou_threshold = 0.7;
  int workers = 1;
  std::filesystem::path output_dir = "geostream_out";
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

enum class ObjectStatus { ok, failed, unobserved };

inline const char* status_name(ObjectStatus s) {
  switch (s) {
    case ObjectStatus::ok: return "ok";
    case ObjectStatus::failed: return "failed";
    case ObjectStatus::unobserved: return "unobserved";
  }
  return "?";
}

struct ObjectRecord {
  int scene_id = 0;
  int object_id = 0;
  ObjectStatus status = ObjectStatus::ok;
  std::string error;
  Box3d gt;
  double theta_used = 0.0;
  std::optional<RecoveredBoxd> recovered;
  int valid_pixels = 0;
  double score = 0.0;
  double l_cg = 0.0;
  double l_bpc = 0.0;
  int degenerate_edges = 0;
  int n_visible_edges = 0;
  bool has_edges = false;
  std::array<EdgeHypothesis, 4> edges{};
  double iou3d = 0.0;
};

struct SceneRecord {
  int scene_id = 0;
  Scene scene;
  std::vector<ObjectRecord> objects;
};

struct PipelineResult {
  std::vector<SceneRecord> scenes;
  EvalSummary eval;
  int failures = 0;
  int unobserved = 0;
};

// Scene i is either scene_files[i] or sampled from hash(seed, i).
Scene pipeline_scene(const RunConfig& cfg, int scene_id);

// Render, corrupt, recover and score one scene.
SceneRecord process_scene(const RunConfig& cfg, int scene_id, const Scene& scene);

// Pure function of the config; nothing is written.
PipelineResult run_pipeline(const RunConfig& cfg);

std::string report_csv(const PipelineResult& result);
nlohmann::json report_json(const PipelineResult& result, const RunConfig& cfg);

// report.json, report.csv and labels/<scene>.txt under cfg.output_dir.
void write_pipeline_outputs(const PipelineResult& result, const RunConfig& cfg);

nlohmann::json eval_report_to_json(const EvalReport& rep);

}  // namespace geostream
