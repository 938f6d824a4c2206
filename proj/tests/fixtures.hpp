// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "geostream/geometry.hpp"
#include "geostream/scene.hpp"
#include "geostream/simulator.hpp"

namespace geostream::testing {

inline Camerad small_camera() {
  Camerad cam;
  cam.fx = cam.fy = 700.0;
  cam.cx = 600.0;
  cam.cy = 180.0;
  return cam;
}

// A box fully in front of the default camera and inside its field of view.
inline Box3d random_box(std::mt19937_64& gen, double z_lo = 8.0, double z_hi = 40.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Box3d b;
  const double z = z_lo + (z_hi - z_lo) * u(gen);
  b.center = {(-0.3 + 0.6 * u(gen)) * z, 0.6 + 0.6 * u(gen), z};
  b.h = 1.4 + 0.35 * u(gen);
  b.w = 1.5 + 0.4 * u(gen);
  b.l = 3.4 + 1.4 * u(gen);
  b.theta = -std::numbers::pi + 2 * std::numbers::pi * u(gen);
  return b;
}

inline Scene single_box_scene(const Box3d& box, int stride = 4) {
  Scene s;
  s.stride = stride;
  s.objects.push_back({0, box});
  return s;
}

// Noiseless patch of a lone box with every uncertainty set to `u`.
inline RoiPatchd lone_patch(const Box3d& box, double u = 0.0, int stride = 4) {
  RoiPatchd patch = render(single_box_scene(box, stride)).objects.at(0).patch;
  for (auto& px : patch.pixels) px.dbr.uncertainties.fill(u);
  return patch;
}

inline double rel_err(double got, double want) {
  const double d = std::abs(got - want);
  return want == 0.0 ? d : d / std::abs(want);
}

}  // namespace geostream::testing
