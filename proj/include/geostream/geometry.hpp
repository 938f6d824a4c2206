// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

#include "geostream/errors.hpp"

// Camera frame: x right, y down, z forward. Heading theta rotates about the
// vertical (y) axis; theta = 0 points the box along +z.
namespace geostream {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
struct Camera {
  Scalar fx = Scalar(721.5377);
  Scalar fy = Scalar(721.5377);
  Scalar cx = Scalar(640);
  Scalar cy = Scalar(190);
  int width = 1280;
  int height = 380;

  bool is_valid() const {
    return fx > Scalar(0) && fy > Scalar(0) && width > 0 && height > 0;
  }

  void validate() const {
    if (!is_valid()) throw InvalidArgument("camera: fx, fy, width, height must be positive");
  }
};

template <typename Scalar>
struct Box3 {
  Vec3<Scalar> center = Vec3<Scalar>::Zero();
  Scalar h = Scalar(1);
  Scalar w = Scalar(1);
  Scalar l = Scalar(1);
  Scalar theta = Scalar(0);

  bool is_valid() const {
    return h > Scalar(0) && w > Scalar(0) && l > Scalar(0) && center.allFinite() &&
           std::isfinite(theta);
  }

  void validate() const {
    if (!is_valid()) throw InvalidArgument("box: H, W, L must be positive and finite");
  }

  Scalar volume() const { return h * w * l; }
};

template <typename Scalar>
struct SizePrior {
  Scalar h = Scalar(1.52563191462);
  Scalar w = Scalar(1.62856739989);
  Scalar l = Scalar(3.88311640418);

  bool is_valid() const { return h > Scalar(0) && w > Scalar(0) && l > Scalar(0); }
};

using Camerad = Camera<double>;
using Box3d = Box3<double>;
using SizePriord = SizePrior<double>;
using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;

enum class Face { front = 0, back, left, right, top, bottom };

inline constexpr std::array<Face, 6> kFaces = {Face::front, Face::back,  Face::left,
                                               Face::right, Face::top,   Face::bottom};

inline const char* face_name(Face f) {
  switch (f) {
    case Face::front: return "front";
    case Face::back: return "back";
    case Face::left: return "left";
    case Face::right: return "right";
    case Face::top: return "top";
    case Face::bottom: return "bottom";
  }
  return "?";
}

inline Axis face_axis(Face f) {
  switch (f) {
    case Face::front:
    case Face::back: return Axis::length;
    case Face::left:
    case Face::right: return Axis::width;
    default: return Axis::height;
  }
}

// front, right and bottom point along +n1, +n2 and +y respectively.
inline bool face_is_positive(Face f) {
  return f == Face::front || f == Face::right || f == Face::bottom;
}

inline Face positive_face(Axis a) {
  switch (a) {
    case Axis::length: return Face::front;
    case Axis::width: return Face::right;
    default: return Face::bottom;
  }
}

inline Face negative_face(Axis a) {
  switch (a) {
    case Axis::length: return Face::back;
    case Axis::width: return Face::left;
    default: return Face::top;
  }
}

template <typename Scalar>
struct BoxAxes {
  Vec3<Scalar> n1;  // heading
  Vec3<Scalar> n2;  // lateral
};

template <typename Scalar>
BoxAxes<Scalar> box_axes(Scalar theta) {
  using std::cos;
  using std::sin;
  const Scalar s = sin(theta);
  const Scalar c = cos(theta);
  return {Vec3<Scalar>(s, Scalar(0), c), Vec3<Scalar>(c, Scalar(0), -s)};
}

// Unit direction of an axis in the camera frame.
template <typename Scalar>
Vec3<Scalar> axis_direction(Axis a, Scalar theta) {
  const auto ax = box_axes(theta);
  switch (a) {
    case Axis::length: return ax.n1;
    case Axis::width: return ax.n2;
    default: return Vec3<Scalar>(Scalar(0), Scalar(1), Scalar(0));
  }
}

template <typename Scalar>
Scalar box_dimension(const Box3<Scalar>& box, Axis a) {
  switch (a) {
    case Axis::length: return box.l;
    case Axis::width: return box.w;
    default: return box.h;
  }
}

template <typename Scalar>
struct FaceSpec {
  Face face;
  Vec3<Scalar> normal;   // outward unit normal
  Scalar half_extent;    // plane: normal . (X - C) = half_extent
};

template <typename Scalar>
std::array<FaceSpec<Scalar>, 6> face_specs(const Box3<Scalar>& box) {
  std::array<FaceSpec<Scalar>, 6> out;
  for (std::size_t j = 0; j < 6; ++j) {
    const Face f = kFaces[j];
    const Axis a = face_axis(f);
    const Vec3<Scalar> dir = axis_direction(a, box.theta);
    out[j] = {f, face_is_positive(f) ? dir : Vec3<Scalar>(-dir),
              box_dimension(box, a) / Scalar(2)};
  }
  return out;
}

// Sign pair (a, b): corner = C + a (L/2) n1 + b (W/2) n2.
struct CornerSigns {
  int a;
  int b;
};

inline constexpr std::array<CornerSigns, 4> kBevCornerSigns = {
    CornerSigns{+1, +1}, CornerSigns{-1, +1}, CornerSigns{-1, -1}, CornerSigns{+1, -1}};

template <typename Scalar>
Vec3<Scalar> bev_corner(const Box3<Scalar>& box, CornerSigns s) {
  const auto ax = box_axes(box.theta);
  return box.center + (Scalar(s.a) * box.l / Scalar(2)) * ax.n1 +
         (Scalar(s.b) * box.w / Scalar(2)) * ax.n2;
}

// Four corners at mid-height, ordered (+,+), (-,+), (-,-), (+,-).
template <typename Scalar>
std::array<Vec3<Scalar>, 4> bev_corners(const Box3<Scalar>& box) {
  std::array<Vec3<Scalar>, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = bev_corner(box, kBevCornerSigns[i]);
  return out;
}

// All eight box vertices; bit 0 of the index selects +L/2, bit 1 +W/2, bit 2 +H/2.
template <typename Scalar>
std::array<Vec3<Scalar>, 8> box_vertices(const Box3<Scalar>& box) {
  const auto ax = box_axes(box.theta);
  const Vec3<Scalar> ey(Scalar(0), Scalar(1), Scalar(0));
  std::array<Vec3<Scalar>, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Scalar a = (i & 1) ? Scalar(1) : Scalar(-1);
    const Scalar b = (i & 2) ? Scalar(1) : Scalar(-1);
    const Scalar c = (i & 4) ? Scalar(1) : Scalar(-1);
    out[i] = box.center + (a * box.l / Scalar(2)) * ax.n1 + (b * box.w / Scalar(2)) * ax.n2 +
             (c * box.h / Scalar(2)) * ey;
  }
  return out;
}

// Point expressed in the box frame: (n1, n2, y) coordinates relative to C.
template <typename Scalar>
Vec3<Scalar> to_box_frame(const Box3<Scalar>& box, const Vec3<Scalar>& p) {
  const auto ax = box_axes(box.theta);
  const Vec3<Scalar> d = p - box.center;
  return {ax.n1.dot(d), ax.n2.dot(d), d.y()};
}

template <typename Scalar>
Vec2<Scalar> project(const Camera<Scalar>& cam, const Vec3<Scalar>& p) {
  if (!(p.z() > Scalar(0))) throw NonPositiveDepth(static_cast<double>(p.z()));
  return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

template <typename Scalar>
Vec3<Scalar> backproject(const Camera<Scalar>& cam, const Vec2<Scalar>& pixel, Scalar z) {
  if (!(z > Scalar(0))) throw NonPositiveDepth(static_cast<double>(z));
  return {(pixel.x() - cam.cx) * z / cam.fx, (pixel.y() - cam.cy) * z / cam.fy, z};
}

// Ray direction through a pixel, scaled so that its z component is 1.
template <typename Scalar>
Vec3<Scalar> pixel_ray(const Camera<Scalar>& cam, const Vec2<Scalar>& pixel) {
  return {(pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy, Scalar(1)};
}

}  // namespace geostream
