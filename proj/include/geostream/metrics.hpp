// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "geostream/geometry.hpp"

namespace geostream {

// BEV footprint in the (x, z) plane, counter-clockwise.
std::vector<Vec2d> bev_footprint(const Box3d& box);

double polygon_area(std::span<const Vec2d> poly);

// Sutherland-Hodgman: subject clipped by a convex counter-clockwise clip polygon.
std::vector<Vec2d> clip_convex(std::span<const Vec2d> subject, std::span<const Vec2d> clip);

double bev_intersection_area(const Box3d& a, const Box3d& b);
double vertical_overlap(const Box3d& a, const Box3d& b);

double iou_bev(const Box3d& a, const Box3d& b);
double iou_3d(const Box3d& a, const Box3d& b);

enum class IouMode { box3d, bev };

inline const char* iou_mode_name(IouMode m) { return m == IouMode::box3d ? "3d" : "bev"; }

struct Detection {
  Box3d box;
  double score = 1.0;
  std::string label = "Car";
};

// One image worth of detections and ground truth; matching never crosses frames.
struct FrameEval {
  std::vector<Detection> detections;
  std::vector<Box3d> gts;
};

struct MatchRecord {
  int frame = 0;
  int detection = 0;
  int gt = -1;  // -1 for a false positive
  double iou = 0.0;
  double score = 0.0;
};

inline constexpr int kRecallPoints = 40;

struct EvalReport {
  IouMode mode = IouMode::box3d;
  double iou_threshold = 0.7;
  double ap = 0.0;
  int num_gt = 0;
  int num_detections = 0;
  std::array<double, kRecallPoints> recall_points{};  // i / 40, i = 1..40
  std::array<double, kRecallPoints> precision{};      // interpolated
  std::vector<double> ranked_precision;               // after each ranked detection
  std::vector<double> ranked_recall;
  std::vector<MatchRecord> matches;                   // in ranked order
};

// Detections are ranked by descending score (ties keep input order, frame
// first), each greedily matched to the unmatched GT of its frame with highest
// IoU >= threshold. Precision at recall r is the maximum precision at any rank
// reaching recall >= r; AP is the mean over r = 1/40 .. 40/40.
EvalReport ap_r40(std::span<const FrameEval> frames, double iou_threshold, IouMode mode);
EvalReport ap_r40(std::span<const Detection> detections, std::span<const Box3d> gts, double iou_threshold,
                  IouMode mode);

struct EvalSummary {
  EvalReport ap_3d;
  EvalReport ap_bev;
};

EvalSummary evaluate(std::span<const FrameEval> frames, double iou_threshold);

}  // namespace geostream
