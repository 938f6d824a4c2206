// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "geostream/box_recovery.hpp"
#include "oracles.hpp"

namespace geostream {
namespace {

using testing::lone_patch;
using testing::random_box;
using testing::rel_err;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Noisy residuals and random confidences on a rendered patch.
RoiPatchd noisy_patch(std::mt19937_64& gen, Box3d& box, int stride = 8) {
  box = random_box(gen, 8, 25);
  RoiPatchd patch = lone_patch(box, 0.0, stride);
  std::uniform_real_distribution<double> u(0.0, 1.0), n(-0.2, 0.2);
  for (auto& px : patch.pixels)
    for (int j = 0; j < 6; ++j) {
      px.dbr.residuals[j] += n(gen);
      px.dbr.uncertainties[j] = u(gen);
    }
  return patch;
}

Vec6 params_of(const Box3d& b) {
  const auto ax = box_axes(b.theta);
  Vec6 p;
  p << ax.n1.dot(b.center), ax.n2.dot(b.center), b.center.y(), b.l, b.w, b.h;
  return p;
}

TEST(Recovery, NoiselessRoundTrip) {
  std::mt19937_64 gen(21);
  const Camerad cam;
  const SolverConfigd cfg;
  for (int i = 0; i < 25; ++i) {
    const Box3d gt = random_box(gen);
    const auto rec = recover_box(lone_patch(gt), gt.theta, cam, cfg);
    EXPECT_LT(rel_err(rec.box.h, gt.h), 1e-6);
    EXPECT_LT(rel_err(rec.box.w, gt.w), 1e-6);
    EXPECT_LT(rel_err(rec.box.l, gt.l), 1e-6);
    for (int k = 0; k < 3; ++k) EXPECT_LT(rel_err(rec.box.center[k], gt.center[k]), 1e-6);
    EXPECT_EQ(rec.box.theta, gt.theta);
    EXPECT_NEAR(rec.objective, 0.0, 1e-12);
  }
}

TEST(Recovery, FloatInstantiation) {
  std::mt19937_64 gen(4);
  const Box3d gt = random_box(gen, 8, 15);
  const RoiPatchd pd = lone_patch(gt);
  RoiPatch<float> pf;
  for (const auto& px : pd.pixels) {
    PatchPixel<float> q;
    q.pixel = px.pixel.cast<float>();
    q.depth = float(px.depth);
    q.valid = px.valid;
    for (int j = 0; j < 6; ++j) {
      q.dbr.residuals[j] = float(px.dbr.residuals[j]);
      q.dbr.uncertainties[j] = float(px.dbr.uncertainties[j]);
    }
    pf.pixels.push_back(q);
  }
  SolverConfig<float> cfg;
  cfg.min_weight_det = 1e-6f;
  const auto rec = recover_box(pf, float(gt.theta), Camera<float>{}, cfg);
  EXPECT_NEAR(rec.box.l, gt.l, 1e-3);
  EXPECT_NEAR(rec.box.center.z(), gt.center.z(), 1e-2);
}

TEST(Recovery, BothFacesOfAxisUncertainThrows) {
  std::mt19937_64 gen(8);
  const Box3d gt = random_box(gen);
  RoiPatchd patch = lone_patch(gt);
  for (auto& px : patch.pixels) px.dbr.u(Face::front) = px.dbr.u(Face::back) = 1.0;
  const SolverConfigd cfg;
  try {
    recover_box(patch, gt.theta, Camerad{}, cfg);
    FAIL() << "expected InsufficientConstraints";
  } catch (const InsufficientConstraints& e) {
    EXPECT_EQ(e.axis, Axis::length);
    EXPECT_NEAR(e.dimension, cfg.prior.l, 1e-9);
  }
  EXPECT_THROW(recover_box_gradient(patch, gt.theta, Camerad{}, cfg), InsufficientConstraints);
}

TEST(Recovery, OneFaceUncertainFollowsPrior) {
  std::mt19937_64 gen(9);
  const Camerad cam;
  for (int i = 0; i < 6; ++i) {
    SolverConfigd cfg;
    cfg.mass = i % 2 ? UncertaintyMass::total : UncertaintyMass::per_axis;
    const Box3d gt = random_box(gen);
    RoiPatchd patch = lone_patch(gt);
    for (auto& px : patch.pixels) px.dbr.u(Face::back) = 1.0;
    const auto rec = recover_box(patch, gt.theta, cam, cfg);
    EXPECT_NEAR(rec.box.l, cfg.prior.l, 1e-9);

    // Mean front-face coordinate, written out from the foot points.
    const Vec3d n1 = box_axes(gt.theta).n1;
    double sum = 0;
    int n = 0;
    for (const auto& px : patch.pixels) {
      if (!px.valid) continue;
      sum += n1.dot(backproject(cam, px.pixel, px.depth)) + px.dbr.r(Face::front);
      ++n;
    }
    EXPECT_NEAR(n1.dot(rec.box.center), sum / n - cfg.prior.l / 2, 1e-9);

    // With per-axis mass the other axes carry no prior term and stay exact;
    // with total mass the uncertain face also pulls them toward the prior.
    if (cfg.mass == UncertaintyMass::per_axis) {
      EXPECT_LT(rel_err(rec.box.w, gt.w), 1e-6);
      EXPECT_LT(rel_err(rec.box.h, gt.h), 1e-6);
    } else {
      EXPECT_GT(rel_err(rec.box.w, gt.w), 0.0);
    }
  }
}

TEST(Recovery, MatchesGenericMinimizer) {
  std::mt19937_64 gen(10);
  const Camerad cam;
  for (auto mass : {UncertaintyMass::total, UncertaintyMass::per_axis}) {
    SolverConfigd cfg;
    cfg.mass = mass;
    cfg.alpha = 0.05;
    for (int i = 0; i < 5; ++i) {
      Box3d gt;
      const RoiPatchd patch = noisy_patch(gen, gt);
      const auto rec = recover_box(patch, gt.theta, cam, cfg);
      const auto f = [&](const Vec6& x) { return oracle::direct_objective(patch, gt.theta, cam, cfg, x); };
      const Vec6 x = oracle::minimize_numeric<6>(f, params_of(gt));
      const Vec6 got = params_of(rec.box);
      for (int k = 0; k < 6; ++k) EXPECT_NEAR(got(k), x(k), 1e-6 * std::max(1.0, std::abs(x(k)))) << k;
      EXPECT_NEAR(rec.objective, f(got), 1e-9 * std::max(1.0, f(got)));
    }
  }
}

TEST(Recovery, ObjectiveMatchesDirectForm) {
  std::mt19937_64 gen(12);
  const Camerad cam;
  const SolverConfigd cfg;
  std::uniform_real_distribution<double> d(-1, 1);
  for (int i = 0; i < 10; ++i) {
    Box3d gt;
    const RoiPatchd patch = noisy_patch(gen, gt);
    Box3d probe = gt;
    probe.center += Vec3d(d(gen), d(gen), d(gen));
    probe.l += 0.3 * d(gen);
    const double want = oracle::direct_objective(patch, gt.theta, cam, cfg, params_of(probe));
    EXPECT_NEAR(recovery_objective(patch, gt.theta, cam, cfg, probe), want, 1e-9 * want);
  }
}

TEST(Recovery, RecoveredBoxIsAMinimum) {
  std::mt19937_64 gen(13);
  const Camerad cam;
  const SolverConfigd cfg;
  Box3d gt;
  const RoiPatchd patch = noisy_patch(gen, gt);
  const auto rec = recover_box(patch, gt.theta, cam, cfg);
  const Vec6 x0 = params_of(rec.box);
  const double f0 = oracle::direct_objective(patch, gt.theta, cam, cfg, x0);
  for (int k = 0; k < 6; ++k)
    for (double s : {-1e-3, 1e-3}) {
      Vec6 x = x0;
      x(k) += s;
      EXPECT_GT(oracle::direct_objective(patch, gt.theta, cam, cfg, x), f0);
    }
}

TEST(Recovery, DiagnosticsAreReported) {
  std::mt19937_64 gen(14);
  const Box3d gt = random_box(gen);
  const auto rec = recover_box(lone_patch(gt), gt.theta, Camerad{}, SolverConfigd{});
  for (int k = 0; k < 3; ++k) {
    EXPECT_GT(rec.determinant[k], 0.0);
    EXPECT_GE(rec.condition[k], 1.0);
    EXPECT_TRUE(std::isfinite(rec.condition[k]));
  }
}

TEST(Recovery, RejectsEmptyPatchAndBadConfig) {
  RoiPatchd empty;
  empty.pixels.resize(3);
  EXPECT_THROW(recover_box(empty, 0.0, Camerad{}, SolverConfigd{}), EmptyPatch);
  std::mt19937_64 gen(15);
  const Box3d gt = random_box(gen);
  SolverConfigd bad;
  bad.alpha = -1;
  EXPECT_THROW(recover_box(lone_patch(gt), gt.theta, Camerad{}, bad), InvalidArgument);
}

TEST(Recovery, DeterminantFormula) {
  std::mt19937_64 gen(16);
  Box3d gt;
  const RoiPatchd patch = noisy_patch(gen, gt);
  const SolverConfigd cfg;
  const auto sys = build_axis_systems(patch, gt.theta, Camerad{}, cfg);
  for (const auto& s : sys) {
    const double want = s.weight_pos * s.weight_neg + s.lambda * (s.weight_pos + s.weight_neg);
    EXPECT_NEAR(s.determinant(), want, 1e-9 * want);
  }
}

// Entries are compared relative to the largest entry of their column, so
// structural zeros are held to the column's scale rather than to zero.
TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(17);
  const Camerad cam;
  const SolverConfigd cfg;
  constexpr double h = 1e-5;
  for (int i = 0; i < 5; ++i) {
    Box3d gt;
    const RoiPatchd patch = noisy_patch(gen, gt, 16);
    const auto jac = recover_box_gradient(patch, gt.theta, cam, cfg);
    auto outputs = [&](const RoiPatchd& p) {
      const Box3d b = recover_box(p, gt.theta, cam, cfg).box;
      Vec6 o;
      o << b.h, b.w, b.l, b.center.x(), b.center.y(), b.center.z();
      return o;
    };
    for (std::size_t px = 0; px < patch.pixels.size(); ++px) {
      if (!patch.pixels[px].valid) {
        EXPECT_EQ(jac.matrix.col(jac.depth_column(px)).norm(), 0.0);
        continue;
      }
      RoiPatchd hi = patch, lo = patch;
      hi.pixels[px].depth += h;
      lo.pixels[px].depth -= h;
      const Vec6 fd = (outputs(hi) - outputs(lo)) / (2 * h);
      const Vec6 an = jac.matrix.col(jac.depth_column(px));
      for (int r = 0; r < 6; ++r) EXPECT_NEAR(an(r), fd(r), 1e-4 * std::max(std::abs(fd(r)), an.cwiseAbs().maxCoeff()));
      for (Face f : kFaces) {
        RoiPatchd rh = patch, rl = patch;
        rh.pixels[px].dbr.r(f) += h;
        rl.pixels[px].dbr.r(f) -= h;
        const Vec6 fdr = (outputs(rh) - outputs(rl)) / (2 * h);
        const Vec6 anr = jac.matrix.col(jac.residual_column(px, f));
        for (int r = 0; r < 6; ++r)
          EXPECT_NEAR(anr(r), fdr(r), 1e-4 * std::max(std::abs(fdr(r)), anr.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST(Gradient, InputSubsetsShareColumns) {
  std::mt19937_64 gen(18);
  Box3d gt;
  const RoiPatchd patch = noisy_patch(gen, gt, 16);
  const auto both = recover_box_gradient(patch, gt.theta, Camerad{}, SolverConfigd{});
  const auto dep = recover_box_gradient(patch, gt.theta, Camerad{}, SolverConfigd{}, GradientInputs::depth);
  const auto res = recover_box_gradient(patch, gt.theta, Camerad{}, SolverConfigd{}, GradientInputs::residuals);
  const auto n = Eigen::Index(patch.pixels.size());
  ASSERT_EQ(dep.matrix.cols(), n);
  ASSERT_EQ(res.matrix.cols(), 6 * n);
  EXPECT_EQ((both.matrix.leftCols(n) - dep.matrix).norm(), 0.0);
  EXPECT_EQ((both.matrix.rightCols(6 * n) - res.matrix).norm(), 0.0);
  EXPECT_EQ(res.residual_column(2, Face::top), 12 + static_cast<int>(Face::top));
}

}  // namespace
}  // namespace geostream
