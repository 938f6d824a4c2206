// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include "geostream/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace geostream {

namespace {

double cross(const Vec2d& a, const Vec2d& b) { return a.x() * b.y() - a.y() * b.x(); }

// Signed distance-like value: > 0 when p is left of the directed edge a->b.
double side(const Vec2d& a, const Vec2d& b, const Vec2d& p) { return cross(b - a, p - a); }

Vec2d edge_intersection(const Vec2d& p, const Vec2d& q, const Vec2d& a, const Vec2d& b) {
  const double sp = side(a, b, p);
  const double sq = side(a, b, q);
  const double t = sp / (sp - sq);
  return p + t * (q - p);
}

double box_iou(const Box3d& a, const Box3d& b, IouMode mode) {
  return mode == IouMode::box3d ? iou_3d(a, b) : iou_bev(a, b);
}

}  // namespace

std::vector<Vec2d> bev_footprint(const Box3d& box) {
  const auto corners = bev_corners(box);
  std::vector<Vec2d> poly;
  poly.reserve(4);
  for (const auto& c : corners) poly.emplace_back(c.x(), c.z());
  if (polygon_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

double polygon_area(std::span<const Vec2d> poly) {
  if (poly.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) acc += cross(poly[i], poly[(i + 1) % poly.size()]);
  return acc / 2.0;
}

std::vector<Vec2d> clip_convex(std::span<const Vec2d> subject, std::span<const Vec2d> clip) {
  std::vector<Vec2d> out(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Vec2d& a = clip[e];
    const Vec2d& b = clip[(e + 1) % clip.size()];
    std::vector<Vec2d> in;
    in.swap(out);
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2d& p = in[i];
      const Vec2d& q = in[(i + 1) % in.size()];
      const bool p_in = side(a, b, p) >= 0.0;
      const bool q_in = side(a, b, q) >= 0.0;
      if (p_in) out.push_back(p);
      if (p_in != q_in) out.push_back(edge_intersection(p, q, a, b));
    }
  }
  return out;
}

double bev_intersection_area(const Box3d& a, const Box3d& b) {
  const auto pa = bev_footprint(a);
  const auto pb = bev_footprint(b);
  const auto inter = clip_convex(pa, pb);
  return std::max(0.0, polygon_area(inter));
}

double vertical_overlap(const Box3d& a, const Box3d& b) {
  const double lo = std::max(a.center.y() - a.h / 2.0, b.center.y() - b.h / 2.0);
  const double hi = std::min(a.center.y() + a.h / 2.0, b.center.y() + b.h / 2.0);
  return std::max(0.0, hi - lo);
}

double iou_bev(const Box3d& a, const Box3d& b) {
  const double inter = bev_intersection_area(a, b);
  const double uni = a.l * a.w + b.l * b.w - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double iou_3d(const Box3d& a, const Box3d& b) {
  const double inter = bev_intersection_area(a, b) * vertical_overlap(a, b);
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

EvalReport ap_r40(std::span<const FrameEval> frames, double iou_threshold, IouMode mode) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw InvalidArgument("IoU threshold must lie in (0, 1]");

  EvalReport rep;
  rep.mode = mode;
  rep.iou_threshold = iou_threshold;
  for (int i = 0; i < kRecallPoints; ++i) rep.recall_points[i] = double(i + 1) / kRecallPoints;

  struct Ranked {
    int frame;
    int det;
    double score;
  };
  std::vector<Ranked> ranked;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    rep.num_gt += static_cast<int>(frames[f].gts.size());
    for (std::size_t d = 0; d < frames[f].detections.size(); ++d)
      ranked.push_back({int(f), int(d), frames[f].detections[d].score});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
  rep.num_detections = static_cast<int>(ranked.size());

  std::vector<std::vector<bool>> taken(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) taken[f].assign(frames[f].gts.size(), false);

  int tp = 0;
  std::vector<int> tp_at_rank;
  tp_at_rank.reserve(ranked.size());
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto& item = ranked[r];
    const auto& frame = frames[item.frame];
    const Box3d& det = frame.detections[item.det].box;
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < frame.gts.size(); ++g) {
      if (taken[item.frame][g]) continue;
      const double iou = box_iou(det, frame.gts[g], mode);
      if (iou > best_iou) {
        best_iou = iou;
        best = int(g);
      }
    }
    MatchRecord m{item.frame, item.det, -1, std::max(0.0, best_iou), item.score};
    if (best >= 0 && best_iou >= iou_threshold) {
      taken[item.frame][best] = true;
      m.gt = best;
      ++tp;
    }
    rep.matches.push_back(m);
    tp_at_rank.push_back(tp);
    rep.ranked_precision.push_back(double(tp) / double(r + 1));
    rep.ranked_recall.push_back(rep.num_gt > 0 ? double(tp) / double(rep.num_gt) : 0.0);
  }

  double sum = 0.0;
  for (int i = 0; i < kRecallPoints; ++i) {
    double best = 0.0;
    if (rep.num_gt > 0) {
      // recall >= (i+1)/40, compared exactly in integers.
      for (std::size_t r = 0; r < ranked.size(); ++r)
        if (std::int64_t(tp_at_rank[r]) * kRecallPoints >= std::int64_t(i + 1) * rep.num_gt)
          best = std::max(best, rep.ranked_precision[r]);
    }
    rep.precision[i] = best;
    sum += best;
  }
  rep.ap = sum / kRecallPoints;
  return rep;
}

EvalReport ap_r40(std::span<const Detection> detections, std::span<const Box3d> gts, double iou_threshold,
                  IouMode mode) {
  FrameEval frame{{detections.begin(), detections.end()}, {gts.begin(), gts.end()}};
  return ap_r40(std::span<const FrameEval>(&frame, 1), iou_threshold, mode);
}

EvalSummary evaluate(std::span<const FrameEval> frames, double iou_threshold) {
  return {ap_r40(frames, iou_threshold, IouMode::box3d), ap_r40(frames, iou_threshold, IouMode::bev)};
}

}  // namespace geostream
