// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <vector>

#include "geostream/bev_projection.hpp"
#include "geostream/dbr.hpp"
#include "geostream/geometry.hpp"
#include "geostream/scene.hpp"

namespace geostream {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct SamplingRanges {
  Range x{-12.0, 12.0};
  Range y{0.6, 1.2};
  Range z{6.0, 45.0};
  Range h{1.4, 1.75};
  Range w{1.5, 1.9};
  Range l{3.4, 4.8};
  Range theta{-std::numbers::pi, std::numbers::pi};
  bool allow_overlap = false;
  int max_attempts = 1000;  // per box
};

inline constexpr double kNearPlane = 0.5;

// Deterministic in (seed, n_boxes, ranges). Boxes whose center or any vertex
// is at z <= kNearPlane, or which overlap an accepted box (unless allowed),
// are resampled. Instance ids are 0..n_boxes-1.
Scene sample_scene(std::uint64_t seed, int n_boxes, const SamplingRanges& ranges = {},
                   const Camerad& camera = {}, int stride = 4);

struct DepthMap {
  int rows = 0;
  int cols = 0;
  int stride = 4;
  std::vector<double> depth;
  std::vector<int> instance;  // -1 where invalid
  std::vector<std::uint8_t> valid;

  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
  // Pixel coordinates of the center of cell (r, c).
  Vec2d cell_center(int r, int c) const {
    const double half = (stride - 1) / 2.0;
    return {c * stride + half, r * stride + half};
  }
};

struct ObjectFields {
  int id = 0;
  Box3d box;
  RoiPatchd patch;
  std::vector<std::size_t> cells;   // depth-map cell index of each patch pixel
  BevCornerFieldd bev;              // built over the valid patch pixels
  std::array<double, 4> rho_gt{};   // projected corner x; meaningless if !rho_valid
  bool rho_valid = false;
  std::array<bool, 4> edge_visible{};
  std::array<bool, 6> face_occluded{};  // hidden behind another object somewhere in the ROI
};

struct RenderResult {
  DepthMap depth;
  std::vector<ObjectFields> objects;  // same order as scene.objects
};

struct RenderOptions {
  double u_occluded = 0.9;
};

RenderResult render(const Scene& scene, const RenderOptions& options = {});

struct NoiseSpec {
  double sigma_depth = 0.0;
  double sigma_dbr = 0.0;
  double sigma_corner = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma_depth >= 0.0 && sigma_dbr >= 0.0 && sigma_corner >= 0.0))
      throw InvalidArgument("noise scales must be non-negative");
  }
};

// Independent Laplacian perturbation of every depth, residual and corner
// displacement. Each value's draw depends only on (seed, field, object id,
// value index), so the result does not depend on evaluation order.
RenderResult add_noise(const RenderResult& fields, const NoiseSpec& noise);

// Counter-based random numbers shared by the simulator and the pipeline.
namespace rng {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);
// Uniform on the open interval (0, 1).
double uniform_open(std::uint64_t bits);
// Laplace(0, scale) by inverse CDF.
double laplace(std::uint64_t bits, double scale);

// Sequential generator over splitmix64.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform(double lo, double hi);

 private:
  std::uint64_t state_;
};

}  // namespace rng

}  // namespace geostream
