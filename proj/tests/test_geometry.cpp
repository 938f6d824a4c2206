// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "geostream/geometry.hpp"
#include "geostream/raycast.hpp"
#include "oracles.hpp"

namespace geostream {
namespace {

using testing::small_camera;

TEST(Projection, PrincipalPointAndOffset) {
  const Camerad cam = small_camera();
  EXPECT_TRUE(project(cam, Vec3d(0, 0, 10)).isApprox(Vec2d(600, 180)));
  EXPECT_TRUE(project(cam, Vec3d(1, 0, 10)).isApprox(Vec2d(670, 180)));
  EXPECT_THROW(project(cam, Vec3d(0, 0, -1)), NonPositiveDepth);
  EXPECT_THROW(project(cam, Vec3d(0, 0, 0)), NonPositiveDepth);
}

TEST(Projection, BackProjection) {
  const Camerad cam = small_camera();
  EXPECT_TRUE(backproject(cam, Vec2d(600, 180), 5.0).isApprox(Vec3d(0, 0, 5)));
  EXPECT_TRUE(backproject(cam, Vec2d(670, 180), 10.0).isApprox(Vec3d(1, 0, 10)));
  EXPECT_THROW(backproject(cam, Vec2d(600, 180), 0.0), NonPositiveDepth);
}

TEST(Projection, RoundTrip) {
  const Camerad cam;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-5, 5), z(0.5, 80);
  for (int i = 0; i < 1000; ++i) {
    const Vec3d p(u(gen), u(gen), z(gen));
    const Vec3d q = backproject(cam, project(cam, p), p.z());
    EXPECT_LT((p - q).norm(), 1e-12 * p.norm());
  }
}

TEST(BoxAxes, ConventionAnchors) {
  const double pi = std::numbers::pi;
  auto a = box_axes(0.0);
  EXPECT_TRUE(a.n1.isApprox(Vec3d(0, 0, 1)));
  EXPECT_TRUE(a.n2.isApprox(Vec3d(1, 0, 0)));
  a = box_axes(pi / 2);
  EXPECT_LT((a.n1 - Vec3d(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((a.n2 - Vec3d(0, 0, -1)).norm(), 1e-15);
  a = box_axes(pi);
  EXPECT_LT((a.n1 - Vec3d(0, 0, -1)).norm(), 1e-15);
  EXPECT_LT((a.n2 - Vec3d(-1, 0, 0)).norm(), 1e-15);
}

TEST(BoxAxes, OrthonormalForAnyHeading) {
  for (double t = -4; t < 4; t += 0.37) {
    const auto a = box_axes(t);
    EXPECT_NEAR(a.n1.norm(), 1.0, 1e-15);
    EXPECT_NEAR(a.n2.norm(), 1.0, 1e-15);
    EXPECT_NEAR(a.n1.dot(a.n2), 0.0, 1e-15);
    EXPECT_NEAR(a.n1.y(), 0.0, 0.0);
  }
}

TEST(BevCorners, AxisAligned) {
  Box3d b;
  b.center = {0, 0, 10};
  b.l = 4;
  b.w = 2;
  const auto c = bev_corners(b);
  EXPECT_TRUE(c[0].isApprox(Vec3d(1, 0, 12)));
  EXPECT_TRUE(c[1].isApprox(Vec3d(1, 0, 8)));
  EXPECT_TRUE(c[2].isApprox(Vec3d(-1, 0, 8)));
  EXPECT_TRUE(c[3].isApprox(Vec3d(-1, 0, 12)));
}

TEST(BevCorners, QuarterTurn) {
  Box3d b;
  b.center = {0, 0, 10};
  b.l = 4;
  b.w = 2;
  b.theta = std::numbers::pi / 2;
  const auto c = bev_corners(b);
  const Vec3d want[4] = {{2, 0, 9}, {-2, 0, 9}, {-2, 0, 11}, {2, 0, 11}};
  for (int i = 0; i < 4; ++i) EXPECT_LT((c[i] - want[i]).norm(), 1e-14) << i;
}

TEST(Box, ValidationRejectsDegenerateSizes) {
  Box3d b;
  b.w = 0;
  EXPECT_FALSE(b.is_valid());
  EXPECT_THROW(b.validate(), InvalidArgument);
  b.w = 1;
  b.center.x() = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(b.validate(), InvalidArgument);
}

TEST(Faces, SpecsDescribeBoxSurface) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 50; ++i) {
    const Box3d b = testing::random_box(gen);
    const auto verts = box_vertices(b);
    for (const auto& f : face_specs(b)) {
      // Exactly four vertices on each face plane, the rest strictly inside.
      int on = 0;
      for (const auto& v : verts) {
        const double s = f.normal.dot(v - b.center) - f.half_extent;
        EXPECT_LE(s, 1e-12);
        on += std::abs(s) < 1e-12;
      }
      EXPECT_EQ(on, 4) << face_name(f.face);
      EXPECT_EQ(positive_face(face_axis(f.face)) == f.face, face_is_positive(f.face));
    }
  }
}

TEST(Faces, BoxFrameCoordinates) {
  std::mt19937_64 gen(5);
  const Box3d b = testing::random_box(gen);
  const auto ax = box_axes(b.theta);
  const Vec3d p = b.center + 0.3 * ax.n1 - 0.2 * ax.n2 + Vec3d(0, 0.1, 0);
  EXPECT_LT((to_box_frame(b, p) - Vec3d(0.3, -0.2, 0.1)).norm(), 1e-12);
}

TEST(RayCast, MatchesMarchingOracle) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> px(0, 1280), py(0, 380);
  const Camerad cam;
  int hits = 0;
  for (int i = 0; i < 40; ++i) {
    const Box3d b = testing::random_box(gen, 6, 25);
    Scene s = testing::single_box_scene(b);
    // Aim a few rays at the box, a few anywhere.
    for (int k = 0; k < 10; ++k) {
      Vec3d dir = k < 6 ? Vec3d(b.center + 0.4 * Vec3d(b.w, b.h, b.l).cwiseProduct(
                                                   Vec3d::Random()))
                        : pixel_ray(cam, Vec2d(px(gen), py(gen)));
      dir /= dir.z();
      const auto hit = intersect_ray_box(b, Vec3d(Vec3d::Zero()), dir);
      const double t = oracle::march_ray(s, dir);
      if (!std::isfinite(t)) {
        EXPECT_FALSE(hit && hit->t_exit - hit->t_enter > 1e-2);
        continue;
      }
      ASSERT_TRUE(hit.has_value());
      EXPECT_NEAR(hit->t_enter, t, 1e-4);
      // The entry point lies on the reported face.
      const auto spec = face_specs(b)[static_cast<int>(hit->entry_face)];
      EXPECT_NEAR(spec.normal.dot(hit->t_enter * dir - b.center), spec.half_extent, 1e-9);
      ++hits;
    }
  }
  EXPECT_GT(hits, 200);
}

TEST(RayCast, MissesBoxBehindOrigin) {
  Box3d b;
  b.center = {0, 0, -10};
  EXPECT_FALSE(intersect_ray_box(b, Vec3d(Vec3d::Zero()), Vec3d(0, 0, 1)).has_value());
}

}  // namespace
}  // namespace geostream
