// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <vector>

#include "geostream/geometry.hpp"
#include "geostream/scene.hpp"

namespace geostream {

// Per-pixel x-displacements toward the four projected BEV corners and their
// log-weights.
template <typename Scalar>
struct BevCornerPixel {
  Scalar x = Scalar(0);  // pixel x coordinate
  std::array<Scalar, 4> displacement{};
  std::array<Scalar, 4> score{};
};

template <typename Scalar>
struct BevCornerField {
  std::vector<BevCornerPixel<Scalar>> pixels;
};

using BevCornerFieldd = BevCornerField<double>;

// Softmax-weighted mean of the votes x + d over the field. Shifted by the
// maximum score so large scores do not overflow.
template <typename Scalar>
Scalar aggregate_corner_x(const BevCornerField<Scalar>& field, int corner) {
  if (field.pixels.empty()) throw EmptyRoi();
  if (corner < 0 || corner > 3) throw InvalidArgument("corner index must be in [0, 3]");
  Scalar top = -std::numeric_limits<Scalar>::infinity();
  for (const auto& p : field.pixels) top = std::max(top, p.score[corner]);
  Scalar num = Scalar(0);
  Scalar den = Scalar(0);
  for (const auto& p : field.pixels) {
    const Scalar w = std::exp(p.score[corner] - top);
    num += (p.x + p.displacement[corner]) * w;
    den += w;
  }
  return num / den;
}

template <typename Scalar>
std::array<Scalar, 4> aggregate_corners_x(const BevCornerField<Scalar>& field) {
  std::array<Scalar, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = aggregate_corner_x(field, i);
  return out;
}

inline constexpr double kDegenerateEdgeDet = 1e-9;

// Object-center depth from the x-projections of two adjacent BEV corners.
// Each corner gives fx * P_x + (cx - rho) * P_z = 0 with
// P = C + a (L/2) n1 + b (W/2) n2, linear in (C_x, C_z).
template <typename Scalar>
Scalar depth_from_edge(Scalar rho_a, Scalar rho_b, CornerSigns sa, CornerSigns sb, Scalar l, Scalar w,
                       Scalar theta, const Camera<Scalar>& cam) {
  const int differing = (sa.a != sb.a ? 1 : 0) + (sa.b != sb.b ? 1 : 0);
  if (differing != 1) throw InvalidArgument("corners do not form a BEV edge");
  const auto ax = box_axes(theta);
  const auto offset = [&](CornerSigns s) -> Vec3<Scalar> {
    return (Scalar(s.a) * l / Scalar(2)) * ax.n1 + (Scalar(s.b) * w / Scalar(2)) * ax.n2;
  };
  const Vec3<Scalar> oa = offset(sa);
  const Vec3<Scalar> ob = offset(sb);
  Eigen::Matrix<Scalar, 2, 2> m;
  m << cam.fx, cam.cx - rho_a, cam.fx, cam.cx - rho_b;
  const Scalar det = m.determinant();
  if (!(std::abs(det) >= Scalar(kDegenerateEdgeDet))) throw DegenerateEdge(static_cast<double>(det));
  const Vec2<Scalar> rhs(-cam.fx * oa.x() - (cam.cx - rho_a) * oa.z(),
                         -cam.fx * ob.x() - (cam.cx - rho_b) * ob.z());
  // Cramer's rule for C_z.
  return (m(0, 0) * rhs(1) - m(1, 0) * rhs(0)) / det;
}

// Closed form for the edge whose corners sit at C + (W/2) n2' +- (L/2) n1 with
// n2' = -n2, i.e. corners (+,-) and (-,-) in this library's enumeration.
// rho_1 belongs to the +L/2 corner. Kept as an independent cross-check.
template <typename Scalar>
Scalar depth_from_edge_closed_form(Scalar rho_1, Scalar rho_2, Scalar l, Scalar w, Scalar theta,
                                   const Camera<Scalar>& cam) {
  const auto ax = box_axes(theta);
  const Scalar nx = ax.n1.x();
  const Scalar nz = ax.n1.z();
  const Scalar diff = rho_1 - rho_2;
  if (diff == Scalar(0)) throw DegenerateEdge(0.0);
  return (cam.fx * nx + cam.cx * nz) / diff * l - nz * (rho_1 + rho_2) / (Scalar(2) * diff) * l -
         nx / Scalar(2) * w;
}

template <typename Scalar>
Scalar edge_weight(bool visible, Scalar rho_a, Scalar rho_b, Scalar k) {
  if (!(k > Scalar(0))) throw InvalidArgument("edge weight rate k must be positive");
  if (!visible) return Scalar(0);
  return Scalar(1) - std::exp(-k * std::abs(rho_a - rho_b));
}

// BEV edges as corner-index pairs: right length edge, back width edge, left
// length edge, front width edge.
inline constexpr std::array<std::array<int, 2>, 4> kBevEdges = {
    std::array<int, 2>{0, 1}, std::array<int, 2>{1, 2}, std::array<int, 2>{2, 3}, std::array<int, 2>{3, 0}};

struct EdgeHypothesis {
  int corner_a = 0;
  int corner_b = 0;
  double rho_a = 0.0;
  double rho_b = 0.0;
  bool visible = false;
  double weight = 0.0;
  std::optional<double> z_c;  // empty when the edge is degenerate
};

// One hypothesis per BEV edge. `visible` is indexed like kBevEdges.
std::array<EdgeHypothesis, 4> edge_hypotheses(const std::array<double, 4>& rho, double l, double w,
                                              double theta, const Camerad& cam,
                                              const std::array<bool, 4>& visible, double k);

// A corner is visible when the segment from the camera to it crosses no box
// interior, the owner's included.
bool corner_visible(const Vec3d& corner, const Box3d& owner, const Scene& scene);

// Visibility of each BEV edge, indexed like kBevEdges.
std::array<bool, 4> edge_visibility(const Box3d& box, const Camerad& cam, const Scene& scene);

}  // namespace geostream
