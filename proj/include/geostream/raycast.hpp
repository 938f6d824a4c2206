// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <optional>

#include "geostream/geometry.hpp"

namespace geostream {

template <typename Scalar>
struct RayHit {
  Scalar t_enter;
  Scalar t_exit;
  Face entry_face;  // meaningful only when the origin is outside the box
};

// Slab test in the box frame. Returns the parametric interval [t_enter, t_exit]
// of origin + t * dir inside the box, or nullopt when the line misses it or the
// box lies entirely behind the origin.
template <typename Scalar>
std::optional<RayHit<Scalar>> intersect_ray_box(const Box3<Scalar>& box,
                                                const Vec3<Scalar>& origin,
                                                const Vec3<Scalar>& dir) {
  const auto ax = box_axes(box.theta);
  const Vec3<Scalar> rel = origin - box.center;
  const Scalar o[3] = {ax.n1.dot(rel), ax.n2.dot(rel), rel.y()};
  const Scalar d[3] = {ax.n1.dot(dir), ax.n2.dot(dir), dir.y()};
  const Scalar half[3] = {box.l / Scalar(2), box.w / Scalar(2), box.h / Scalar(2)};
  constexpr Axis kAxes[3] = {Axis::length, Axis::width, Axis::height};

  Scalar t_near = -std::numeric_limits<Scalar>::infinity();
  Scalar t_far = std::numeric_limits<Scalar>::infinity();
  Face near_face = Face::back;
  for (int k = 0; k < 3; ++k) {
    if (d[k] == Scalar(0)) {
      if (o[k] < -half[k] || o[k] > half[k]) return std::nullopt;
      continue;
    }
    Scalar t0 = (-half[k] - o[k]) / d[k];
    Scalar t1 = (half[k] - o[k]) / d[k];
    // Entering through the negative face when moving in +axis.
    Face entry = d[k] > Scalar(0) ? negative_face(kAxes[k]) : positive_face(kAxes[k]);
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      near_face = entry;
    }
    if (t1 < t_far) t_far = t1;
    if (t_near > t_far) return std::nullopt;
  }
  if (t_far < Scalar(0)) return std::nullopt;
  return RayHit<Scalar>{t_near, t_far, near_face};
}

}  // namespace geostream
