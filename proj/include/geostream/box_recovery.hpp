// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

#include "geostream/dbr.hpp"
#include "geostream/geometry.hpp"

// Closed-form box recovery from back-projected points and DBR.
//
// With heading fixed, each face j contributes the observable a = n_j . B^j where
// B^j = P + R^j n_j. For an axis with unit direction e, unknown center
// coordinate u = e . C and dimension D, the positive face satisfies a = u + D/2
// and the negative face a = -u + D/2. The weighted plane-fitting energy plus the
// prior-size penalty is a 2-unknown quadratic per axis:
//
//   f_k = sum_+ w (a - u - D/2)^2 + sum_- w (a + u - D/2)^2 + lambda (D - D_prior)^2
//
// whose half-Hessian is [[S, Delta/2], [Delta/2, S/4 + lambda]] with
// S = W+ + W-, Delta = W+ - W-, and right-hand side
// [A+ - A-, (A+ + A-)/2 + lambda D_prior].
namespace geostream {

enum class UncertaintyMass {
  total,     // lambda_k scales with sum of U over all pixels and all six faces
  per_axis,  // only the two faces of axis k
};

template <typename Scalar>
struct SolverConfig {
  Scalar alpha = Scalar(1e-3);  // width
  Scalar beta = Scalar(1e-3);   // length
  Scalar gamma = Scalar(1e-3);  // height
  SizePrior<Scalar> prior;
  Scalar min_weight_det = Scalar(1e-9);
  UncertaintyMass mass = UncertaintyMass::total;

  void validate() const {
    if (!(alpha >= Scalar(0) && beta >= Scalar(0) && gamma >= Scalar(0)))
      throw InvalidArgument("solver: alpha, beta, gamma must be non-negative");
    if (!(min_weight_det > Scalar(0))) throw InvalidArgument("solver: min_weight_det must be positive");
    if (!prior.is_valid()) throw InvalidArgument("solver: prior size must be positive");
  }

  Scalar prior_weight(Axis a) const {
    switch (a) {
      case Axis::length: return beta;
      case Axis::width: return alpha;
      default: return gamma;
    }
  }

  Scalar prior_dimension(Axis a) const {
    switch (a) {
      case Axis::length: return prior.l;
      case Axis::width: return prior.w;
      default: return prior.h;
    }
  }
};

template <typename Scalar>
struct AxisSystem {
  Eigen::Matrix<Scalar, 2, 2> normal = Eigen::Matrix<Scalar, 2, 2>::Zero();
  Vec2<Scalar> rhs = Vec2<Scalar>::Zero();
  Scalar lambda = Scalar(0);
  Scalar prior_dim = Scalar(0);
  Scalar weight_pos = Scalar(0);
  Scalar weight_neg = Scalar(0);

  Scalar determinant() const { return normal.determinant(); }

  Scalar condition_number() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> es(normal, Eigen::EigenvaluesOnly);
    const Scalar lo = es.eigenvalues()(0);
    const Scalar hi = es.eigenvalues()(1);
    if (!(lo > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
    return hi / lo;
  }
};

template <typename Scalar>
struct RecoveredBox {
  Box3<Scalar> box;
  std::array<Scalar, 3> condition{};    // indexed by Axis
  std::array<Scalar, 3> determinant{};  // indexed by Axis
  Scalar objective = Scalar(0);
};

using SolverConfigd = SolverConfig<double>;
using RecoveredBoxd = RecoveredBox<double>;

namespace detail {

template <typename Scalar>
Scalar clamped_weight(Scalar u) {
  return std::max(Scalar(0), Scalar(1) - u);
}

// Visits every (valid pixel, face) pair with its face coordinate a and weight.
template <typename Scalar, typename Fn>
void for_each_observation(const RoiPatch<Scalar>& patch, Scalar theta, const Camera<Scalar>& cam,
                          Fn&& fn) {
  Box3<Scalar> frame;
  frame.theta = theta;
  const auto faces = face_specs(frame);
  for (std::size_t i = 0; i < patch.pixels.size(); ++i) {
    const auto& px = patch.pixels[i];
    if (!px.valid) continue;
    const Vec3<Scalar> p = backproject(cam, px.pixel, px.depth);
    for (std::size_t j = 0; j < 6; ++j) {
      const Scalar a = faces[j].normal.dot(p) + px.dbr.residuals[j];
      fn(i, j, a, clamped_weight(px.dbr.uncertainties[j]));
    }
  }
}

// With no data weight on an axis the dimension row reduces to
// lambda D = lambda D_prior; NaN when lambda is zero too.
template <typename Scalar>
Scalar prior_row_dimension(const AxisSystem<Scalar>& sys) {
  const Scalar diag = sys.normal(1, 1);
  if (!(sys.lambda > Scalar(0)) || !(diag > Scalar(0))) return std::numeric_limits<Scalar>::quiet_NaN();
  return sys.rhs(1) / diag;
}

}  // namespace detail

// Accumulates the three per-axis normal systems. Throws EmptyPatch.
template <typename Scalar>
std::array<AxisSystem<Scalar>, 3> build_axis_systems(const RoiPatch<Scalar>& patch, Scalar theta,
                                                     const Camera<Scalar>& cam,
                                                     const SolverConfig<Scalar>& cfg) {
  cfg.validate();
  if (patch.valid_count() == 0) throw EmptyPatch();

  std::array<Scalar, 3> wp{}, wn{}, ap{}, an{}, mass{};
  Scalar total_mass = Scalar(0);
  for (const auto& px : patch.pixels) {
    if (!px.valid) continue;
    for (std::size_t j = 0; j < 6; ++j) {
      const Scalar u = std::max(Scalar(0), px.dbr.uncertainties[j]);
      mass[static_cast<int>(face_axis(kFaces[j]))] += u;
      total_mass += u;
    }
  }
  detail::for_each_observation(patch, theta, cam, [&](std::size_t, std::size_t j, Scalar a, Scalar w) {
    const Face f = kFaces[j];
    const int k = static_cast<int>(face_axis(f));
    if (face_is_positive(f)) {
      wp[k] += w;
      ap[k] += w * a;
    } else {
      wn[k] += w;
      an[k] += w * a;
    }
  });

  std::array<AxisSystem<Scalar>, 3> out;
  for (int k = 0; k < 3; ++k) {
    const Axis axis = static_cast<Axis>(k);
    auto& sys = out[k];
    const Scalar s = wp[k] + wn[k];
    const Scalar delta = wp[k] - wn[k];
    const Scalar m = cfg.mass == UncertaintyMass::total ? total_mass : mass[k];
    sys.lambda = cfg.prior_weight(axis) * m;
    sys.prior_dim = cfg.prior_dimension(axis);
    sys.weight_pos = wp[k];
    sys.weight_neg = wn[k];
    sys.normal << s, delta / Scalar(2), delta / Scalar(2), s / Scalar(4) + sys.lambda;
    sys.rhs << ap[k] - an[k], (ap[k] + an[k]) / Scalar(2) + sys.lambda * sys.prior_dim;
  }
  return out;
}

// f = f_s + f_t evaluated at an arbitrary box (its heading is ignored; theta
// selects the face normals).
template <typename Scalar>
Scalar recovery_objective(const RoiPatch<Scalar>& patch, Scalar theta, const Camera<Scalar>& cam,
                          const SolverConfig<Scalar>& cfg, const Box3<Scalar>& box) {
  const auto systems = build_axis_systems(patch, theta, cam, cfg);
  std::array<Scalar, 3> u, d;
  for (int k = 0; k < 3; ++k) {
    const Axis axis = static_cast<Axis>(k);
    u[k] = axis_direction(axis, theta).dot(box.center);
    d[k] = box_dimension(box, axis);
  }
  Scalar f = Scalar(0);
  detail::for_each_observation(patch, theta, cam, [&](std::size_t, std::size_t j, Scalar a, Scalar w) {
    const Face face = kFaces[j];
    const int k = static_cast<int>(face_axis(face));
    const Scalar r = face_is_positive(face) ? a - u[k] - d[k] / Scalar(2) : a + u[k] - d[k] / Scalar(2);
    f += w * r * r;
  });
  for (int k = 0; k < 3; ++k) {
    const Scalar e = d[k] - systems[k].prior_dim;
    f += systems[k].lambda * e * e;
  }
  return f;
}

template <typename Scalar>
RecoveredBox<Scalar> recover_box(const RoiPatch<Scalar>& patch, Scalar theta, const Camera<Scalar>& cam,
                                 const SolverConfig<Scalar>& cfg) {
  const auto systems = build_axis_systems(patch, theta, cam, cfg);
  RecoveredBox<Scalar> out;
  out.box.theta = theta;
  out.box.center = Vec3<Scalar>::Zero();
  for (int k = 0; k < 3; ++k) {
    const Axis axis = static_cast<Axis>(k);
    const auto& sys = systems[k];
    const Scalar det = sys.determinant();
    out.determinant[k] = det;
    out.condition[k] = sys.condition_number();
    if (!(det >= cfg.min_weight_det)) {
      throw InsufficientConstraints(axis, static_cast<double>(det), static_cast<double>(detail::prior_row_dimension(sys)));
    }
    const Vec2<Scalar> x = sys.normal.inverse() * sys.rhs;
    out.box.center += x(0) * axis_direction(axis, theta);
    switch (axis) {
      case Axis::length: out.box.l = x(1); break;
      case Axis::width: out.box.w = x(1); break;
      case Axis::height: out.box.h = x(1); break;
    }
  }
  out.objective = recovery_objective(patch, theta, cam, cfg, out.box);
  return out;
}

enum class GradientInputs { depth, residuals, both };

// Rows: H, W, L, Cx, Cy, Cz. Columns cover every patch pixel (invalid pixels
// give zero columns): depth block first (one column per pixel), then residuals
// (six per pixel, face-major within the pixel).
template <typename Scalar>
struct RecoveryJacobian {
  Eigen::Matrix<Scalar, 6, Eigen::Dynamic> matrix;
  GradientInputs inputs = GradientInputs::both;
  std::size_t pixel_count = 0;

  Eigen::Index depth_column(std::size_t pixel) const { return static_cast<Eigen::Index>(pixel); }
  Eigen::Index residual_column(std::size_t pixel, Face f) const {
    const Eigen::Index offset = inputs == GradientInputs::both ? static_cast<Eigen::Index>(pixel_count) : 0;
    return offset + static_cast<Eigen::Index>(6 * pixel) + static_cast<int>(f);
  }
};

enum OutputRow : int { kRowH = 0, kRowW, kRowL, kRowCx, kRowCy, kRowCz };

template <typename Scalar>
RecoveryJacobian<Scalar> recover_box_gradient(const RoiPatch<Scalar>& patch, Scalar theta,
                                              const Camera<Scalar>& cam, const SolverConfig<Scalar>& cfg,
                                              GradientInputs wrt = GradientInputs::both) {
  // Fails exactly where recover_box fails.
  const auto systems = build_axis_systems(patch, theta, cam, cfg);
  std::array<Eigen::Matrix<Scalar, 2, 2>, 3> inv;
  for (int k = 0; k < 3; ++k) {
    const Scalar det = systems[k].determinant();
    if (!(det >= cfg.min_weight_det)) {
      throw InsufficientConstraints(static_cast<Axis>(k), static_cast<double>(det),
                                    static_cast<double>(detail::prior_row_dimension(systems[k])));
    }
    inv[k] = systems[k].normal.inverse();
  }

  const std::size_t n = patch.pixels.size();
  RecoveryJacobian<Scalar> jac;
  jac.inputs = wrt;
  jac.pixel_count = n;
  const bool with_depth = wrt != GradientInputs::residuals;
  const bool with_res = wrt != GradientInputs::depth;
  const Eigen::Index cols = (with_depth ? Eigen::Index(n) : 0) + (with_res ? Eigen::Index(6 * n) : 0);
  jac.matrix.setZero(6, cols);

  Box3<Scalar> frame;
  frame.theta = theta;
  const auto faces = face_specs(frame);
  constexpr int kDimRow[3] = {kRowL, kRowW, kRowH};

  for (std::size_t i = 0; i < n; ++i) {
    const auto& px = patch.pixels[i];
    if (!px.valid) continue;
    const Vec3<Scalar> ray = pixel_ray(cam, px.pixel);
    for (std::size_t j = 0; j < 6; ++j) {
      const Scalar w = detail::clamped_weight(px.dbr.uncertainties[j]);
      if (w == Scalar(0)) continue;
      const Face f = kFaces[j];
      const int k = static_cast<int>(face_axis(f));
      // d(u_k, D_k) / d(a)
      const Vec2<Scalar> db(face_is_positive(f) ? w : -w, w / Scalar(2));
      const Vec2<Scalar> dx = inv[k] * db;
      Eigen::Matrix<Scalar, 6, 1> dout = Eigen::Matrix<Scalar, 6, 1>::Zero();
      dout(kDimRow[k]) = dx(1);
      dout.template segment<3>(kRowCx) = dx(0) * axis_direction(static_cast<Axis>(k), theta);
      if (with_res) jac.matrix.col(jac.residual_column(i, f)) += dout;
      if (with_depth) jac.matrix.col(jac.depth_column(i)) += faces[j].normal.dot(ray) * dout;
    }
  }
  return jac;
}

}  // namespace geostream
