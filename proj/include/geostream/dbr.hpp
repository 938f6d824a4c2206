// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "geostream/geometry.hpp"

namespace geostream {

// Depth-bounding-box residuals of one surface point, indexed by Face.
template <typename Scalar>
struct DbrSample {
  std::array<Scalar, 6> residuals{};
  std::array<Scalar, 6> uncertainties{};

  Scalar& r(Face f) { return residuals[static_cast<int>(f)]; }
  Scalar r(Face f) const { return residuals[static_cast<int>(f)]; }
  Scalar& u(Face f) { return uncertainties[static_cast<int>(f)]; }
  Scalar u(Face f) const { return uncertainties[static_cast<int>(f)]; }
};

template <typename Scalar>
struct PatchPixel {
  Vec2<Scalar> pixel = Vec2<Scalar>::Zero();
  Scalar depth = Scalar(0);
  DbrSample<Scalar> dbr;
  bool valid = false;
};

// Pixels of one object's 2D region. Invalid pixels are carried but ignored by
// the solver.
template <typename Scalar>
struct RoiPatch {
  std::vector<PatchPixel<Scalar>> pixels;

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (const auto& p : pixels) n += p.valid ? 1 : 0;
    return n;
  }
};

using DbrSampled = DbrSample<double>;
using PatchPixeld = PatchPixel<double>;
using RoiPatchd = RoiPatch<double>;

// Signed displacement along each outward normal from p to the face plane:
// p + R^j n_j lies on face j.
template <typename Scalar>
std::array<Scalar, 6> gt_dbr(const Vec3<Scalar>& p, const Box3<Scalar>& box) {
  std::array<Scalar, 6> r;
  const auto faces = face_specs(box);
  const Vec3<Scalar> rel = p - box.center;
  for (std::size_t j = 0; j < 6; ++j) r[j] = faces[j].half_extent - faces[j].normal.dot(rel);
  return r;
}

// Two-level visibility model: faces whose outward normal points toward the
// camera at p are certain (0), the rest get u_occluded.
template <typename Scalar>
std::array<Scalar, 6> visibility_uncertainty(const Vec3<Scalar>& p, const Box3<Scalar>& box,
                                             const Camera<Scalar>& /*cam*/,
                                             Scalar u_occluded = Scalar(0.9)) {
  if (!(u_occluded >= Scalar(0) && u_occluded <= Scalar(1)))
    throw InvalidArgument("u_occluded must lie in [0, 1]");
  std::array<Scalar, 6> u;
  const auto faces = face_specs(box);
  // Camera center is the frame origin.
  for (std::size_t j = 0; j < 6; ++j)
    u[j] = faces[j].normal.dot(p) < Scalar(0) ? Scalar(0) : u_occluded;
  return u;
}

}  // namespace geostream
