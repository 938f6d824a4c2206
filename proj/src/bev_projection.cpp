// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include "geostream/bev_projection.hpp"

#include "geostream/raycast.hpp"

namespace geostream {

namespace {

// Relative slack on the ray parameter: the corner itself sits at t = 1.
constexpr double kVisibilityEps = 1e-9;

bool segment_blocked(const Box3d& box, const Vec3d& target) {
  const auto hit = intersect_ray_box(box, Vec3d(Vec3d::Zero()), target);
  if (!hit) return false;
  return hit->t_enter < 1.0 - kVisibilityEps && hit->t_exit > kVisibilityEps;
}

}  // namespace

std::array<EdgeHypothesis, 4> edge_hypotheses(const std::array<double, 4>& rho, double l, double w,
                                              double theta, const Camerad& cam,
                                              const std::array<bool, 4>& visible, double k) {
  std::array<EdgeHypothesis, 4> out;
  for (std::size_t e = 0; e < 4; ++e) {
    const int ia = kBevEdges[e][0];
    const int ib = kBevEdges[e][1];
    auto& h = out[e];
    h.corner_a = ia;
    h.corner_b = ib;
    h.rho_a = rho[ia];
    h.rho_b = rho[ib];
    h.visible = visible[e];
    try {
      h.z_c = depth_from_edge(h.rho_a, h.rho_b, kBevCornerSigns[ia], kBevCornerSigns[ib], l, w, theta, cam);
      h.weight = edge_weight(h.visible, h.rho_a, h.rho_b, k);
    } catch (const DegenerateEdge&) {
      h.z_c.reset();
      h.weight = 0.0;
    }
  }
  return out;
}

bool corner_visible(const Vec3d& corner, const Box3d& owner, const Scene& scene) {
  if (!(corner.z() > 0.0)) return false;
  if (segment_blocked(owner, corner)) return false;
  for (const auto& obj : scene.objects)
    if (segment_blocked(obj.box, corner)) return false;
  return true;
}

std::array<bool, 4> edge_visibility(const Box3d& box, const Camerad& /*cam*/, const Scene& scene) {
  const auto corners = bev_corners(box);
  std::array<bool, 4> corner_vis;
  for (std::size_t i = 0; i < 4; ++i) corner_vis[i] = corner_visible(corners[i], box, scene);
  std::array<bool, 4> out;
  for (std::size_t e = 0; e < 4; ++e) out[e] = corner_vis[kBevEdges[e][0]] && corner_vis[kBevEdges[e][1]];
  return out;
}

}  // namespace geostream
