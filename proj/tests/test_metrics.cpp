// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "geostream/metrics.hpp"
#include "oracles.hpp"

namespace geostream {
namespace {

Box3d unit_box() {
  Box3d b;
  b.center = {0, 0, 10};
  b.h = 1.5;
  b.w = 2;
  b.l = 4;
  return b;
}

TEST(Polygon, AreaAndClipping) {
  const std::vector<Vec2d> sq = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_DOUBLE_EQ(polygon_area(sq), 4.0);
  const std::vector<Vec2d> shifted = {{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  EXPECT_NEAR(polygon_area(clip_convex(sq, shifted)), 1.0, 1e-12);
  const std::vector<Vec2d> far = {{5, 5}, {6, 5}, {6, 6}, {5, 6}};
  EXPECT_EQ(polygon_area(clip_convex(sq, far)), 0.0);
}

TEST(Footprint, CounterClockwiseWithBoxArea) {
  std::mt19937_64 gen(51);
  for (int i = 0; i < 20; ++i) {
    const Box3d b = testing::random_box(gen);
    const auto fp = bev_footprint(b);
    ASSERT_EQ(fp.size(), 4u);
    double signed_area = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& p = fp[k];
      const auto& q = fp[(k + 1) % 4];
      signed_area += p.x() * q.y() - q.x() * p.y();
    }
    EXPECT_GT(signed_area, 0.0);
    EXPECT_NEAR(signed_area / 2, b.l * b.w, 1e-9);
  }
}

TEST(IouBev, Examples) {
  const Box3d a = unit_box();
  EXPECT_NEAR(iou_bev(a, a), 1.0, 1e-12);
  Box3d far = a;
  far.center.x() += 10;
  EXPECT_EQ(iou_bev(a, far), 0.0);
  Box3d half = a;
  half.center.x() += a.w / 2;
  EXPECT_NEAR(iou_bev(a, half), 1.0 / 3.0, 1e-12);
}

TEST(Iou3d, Examples) {
  const Box3d a = unit_box();
  EXPECT_NEAR(iou_3d(a, a), 1.0, 1e-12);
  Box3d up = a;
  up.center.y() += a.h / 2;
  EXPECT_NEAR(iou_3d(a, up), 1.0 / 3.0, 1e-12);
  Box3d stacked = a;
  stacked.center.y() += a.h;
  EXPECT_EQ(iou_3d(a, stacked), 0.0);
}

TEST(Iou3d, SymmetricAndBounded) {
  std::mt19937_64 gen(52);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const Box3d a = testing::random_box(gen);
    Box3d b = testing::random_box(gen);
    b.center = a.center + Vec3d(d(gen), 0.3 * d(gen), d(gen));
    const double ab = iou_3d(a, b), ba = iou_3d(b, a);
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-12);
    EXPECT_LE(ab, iou_bev(a, b) + 1e-12);
  }
}

TEST(Iou3d, MatchesMonteCarlo) {
  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    const Box3d a = testing::random_box(gen);
    Box3d b = testing::random_box(gen);
    b.center = a.center + Vec3d(d(gen), 0.3 * d(gen), d(gen));
    EXPECT_NEAR(iou_3d(a, b), oracle::monte_carlo_iou(a, b, 1000000, 1000 + i), 2e-3);
  }
}

Detection det(const Box3d& b, double score) {
  Detection d;
  d.box = b;
  d.score = score;
  return d;
}

TEST(ApR40, Examples) {
  const Box3d g = unit_box();
  Box3d close = g;
  close.center.z() += 0.05;
  ASSERT_GT(iou_3d(close, g), 0.9);
  const std::vector<Box3d> gts = {g};
  std::vector<Detection> dets = {det(close, 0.8)};
  EXPECT_EQ(ap_r40(dets, gts, 0.7, IouMode::box3d).ap, 1.0);
  EXPECT_EQ(ap_r40(std::vector<Detection>{}, gts, 0.7, IouMode::box3d).ap, 0.0);

  // Shift s along the length gives IoU (L - s) / (L + s) = 0.8.
  Box3d tp = g;
  tp.center.z() = g.center.z() + 4 * (1 - 0.8) / (1 + 0.8);
  ASSERT_NEAR(iou_3d(tp, g), 0.8, 1e-12);
  Box3d fp = g;
  fp.center.x() += 10;
  dets = {det(fp, 0.95), det(tp, 0.9)};
  EXPECT_EQ(ap_r40(dets, gts, 0.7, IouMode::box3d).ap, 0.5);
}

TEST(ApR40, ReportShapes) {
  const Box3d g = unit_box();
  std::vector<Detection> dets = {det(g, 0.3), det(g, 0.9)};
  const std::vector<Box3d> gts = {g};
  const auto rep = ap_r40(dets, gts, 0.7, IouMode::bev);
  EXPECT_EQ(rep.num_gt, 1);
  EXPECT_EQ(rep.num_detections, 2);
  ASSERT_EQ(rep.matches.size(), 2u);
  EXPECT_EQ(rep.matches[0].detection, 1);  // ranked by score
  EXPECT_EQ(rep.matches[0].gt, 0);
  EXPECT_EQ(rep.matches[1].gt, -1);  // duplicate
  EXPECT_DOUBLE_EQ(rep.recall_points[0], 1.0 / 40);
  EXPECT_DOUBLE_EQ(rep.recall_points[39], 1.0);
  EXPECT_EQ(rep.ap, 1.0);
}

TEST(ApR40, FramesDoNotCrossMatch) {
  const Box3d g = unit_box();
  std::vector<FrameEval> frames(2);
  frames[0].gts = {g};
  frames[1].detections = {det(g, 0.9)};
  EXPECT_EQ(ap_r40(frames, 0.7, IouMode::box3d).ap, 0.0);
  frames[1].gts = {g};
  // One of two GTs found at precision 1.
  EXPECT_EQ(ap_r40(frames, 0.7, IouMode::box3d).ap, 0.5);
}

TEST(ApR40, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 gen(54);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const int n_gt = int(u(gen) * 5);
    const int n_det = int(u(gen) * 11);
    std::vector<Box3d> gts;
    for (int g = 0; g < n_gt; ++g) {
      Box3d b = unit_box();
      b.center.x() = 6.0 * g;
      gts.push_back(b);
    }
    std::vector<Detection> dets;
    for (int d = 0; d < n_det; ++d) {
      Box3d b = unit_box();
      b.center.x() = 6.0 * int(u(gen) * (n_gt + 1)) + 0.6 * (u(gen) - 0.5);
      b.center.z() += 1.2 * (u(gen) - 0.5);
      dets.push_back(det(b, std::round(u(gen) * 4) / 4));  // frequent ties
    }
    for (auto mode : {IouMode::box3d, IouMode::bev})
      EXPECT_EQ(ap_r40(dets, gts, 0.7, mode).ap, oracle::brute_force_ap(dets, gts, 0.7, mode)) << trial;
  }
}

TEST(Evaluate, ReportsBothModes) {
  const Box3d g = unit_box();
  std::vector<FrameEval> frames(1);
  frames[0].gts = {g};
  Box3d lifted = g;
  lifted.center.y() += 0.5;
  frames[0].detections = {det(lifted, 1.0)};
  const auto s = evaluate(frames, 0.7);
  EXPECT_EQ(s.ap_bev.ap, 1.0);
  EXPECT_EQ(s.ap_3d.ap, 0.0);
}

}  // namespace
}  // namespace geostream
