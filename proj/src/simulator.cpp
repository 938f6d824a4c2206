// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include "geostream/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geostream/metrics.hpp"
#include "geostream/raycast.hpp"

namespace geostream {

namespace rng {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

double uniform_open(std::uint64_t bits) {
  return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

double laplace(std::uint64_t bits, double scale) {
  const double v = uniform_open(bits) - 0.5;
  const double mag = -scale * std::log1p(-2.0 * std::abs(v));
  return v < 0.0 ? -mag : mag;
}

std::uint64_t Stream::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Stream::uniform(double lo, double hi) {
  const double u = double(next() >> 11) * 0x1.0p-53;  // [0, 1)
  return lo + (hi - lo) * u;
}

}  // namespace rng

namespace {

void check_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
    throw InvalidArgument(std::string("sampling range '") + name + "' is empty");
}

bool in_front(const Box3d& box) {
  if (!(box.center.z() > kNearPlane)) return false;
  for (const auto& v : box_vertices(box))
    if (!(v.z() > kNearPlane)) return false;
  return true;
}

enum FieldTag : std::uint64_t { kTagDepth = 1, kTagDbr = 2, kTagCorner = 3 };

}  // namespace

Scene sample_scene(std::uint64_t seed, int n_boxes, const SamplingRanges& ranges, const Camerad& camera,
                   int stride) {
  if (n_boxes < 0) throw InvalidArgument("n_boxes must be non-negative");
  check_range(ranges.x, "x");
  check_range(ranges.y, "y");
  check_range(ranges.z, "z");
  check_range(ranges.h, "h");
  check_range(ranges.w, "w");
  check_range(ranges.l, "l");
  check_range(ranges.theta, "theta");
  if (!(ranges.h.lo > 0.0 && ranges.w.lo > 0.0 && ranges.l.lo > 0.0))
    throw InvalidArgument("size ranges must be strictly positive");

  Scene scene;
  scene.camera = camera;
  scene.stride = stride;
  rng::Stream stream(rng::splitmix64(seed));
  for (int i = 0; i < n_boxes; ++i) {
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt >= ranges.max_attempts) throw ExhaustedSampling(attempt);
      Box3d box;
      box.center = Vec3d(stream.uniform(ranges.x.lo, ranges.x.hi), stream.uniform(ranges.y.lo, ranges.y.hi),
                         stream.uniform(ranges.z.lo, ranges.z.hi));
      box.h = stream.uniform(ranges.h.lo, ranges.h.hi);
      box.w = stream.uniform(ranges.w.lo, ranges.w.hi);
      box.l = stream.uniform(ranges.l.lo, ranges.l.hi);
      box.theta = stream.uniform(ranges.theta.lo, ranges.theta.hi);
      if (!in_front(box)) continue;
      if (!ranges.allow_overlap) {
        const bool overlaps = std::any_of(scene.objects.begin(), scene.objects.end(), [&](const SceneObject& o) {
          return bev_intersection_area(o.box, box) * vertical_overlap(o.box, box) > 0.0;
        });
        if (overlaps) continue;
      }
      scene.objects.push_back({i, box});
      break;
    }
  }
  return scene;
}

namespace {

struct CellHit {
  double t = std::numeric_limits<double>::infinity();
  int object = -1;  // index into scene.objects
};

CellHit nearest_hit(const Scene& scene, const Vec3d& dir) {
  CellHit best;
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const auto hit = intersect_ray_box(scene.objects[k].box, Vec3d(Vec3d::Zero()), dir);
    if (!hit || hit->t_enter <= 0.0) continue;
    if (hit->t_enter < best.t) {
      best.t = hit->t_enter;
      best.object = int(k);
    }
  }
  return best;
}

// Inclusive cell-index bounds of the projected box, clipped to the grid.
// Returns false if the box does not reach the image.
bool roi_bounds(const Box3d& box, const Camerad& cam, const DepthMap& dm, int& r0, int& r1, int& c0, int& c1) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& v : box_vertices(box)) {
    const Vec2d p = project(cam, v);
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const double half = (dm.stride - 1) / 2.0;
  c0 = std::max(0, int(std::ceil((xmin - half) / dm.stride)));
  c1 = std::min(dm.cols - 1, int(std::floor((xmax - half) / dm.stride)));
  r0 = std::max(0, int(std::ceil((ymin - half) / dm.stride)));
  r1 = std::min(dm.rows - 1, int(std::floor((ymax - half) / dm.stride)));
  return c0 <= c1 && r0 <= r1;
}

}  // namespace

RenderResult render(const Scene& scene, const RenderOptions& options) {
  scene.validate();
  const Camerad& cam = scene.camera;
  RenderResult out;
  DepthMap& dm = out.depth;
  dm.stride = scene.stride;
  dm.rows = cam.height / scene.stride;
  dm.cols = cam.width / scene.stride;
  const std::size_t n_cells = std::size_t(dm.rows) * dm.cols;
  dm.depth.assign(n_cells, 0.0);
  dm.instance.assign(n_cells, -1);
  dm.valid.assign(n_cells, 0);

  std::vector<int> owner(n_cells, -1);  // index into scene.objects
  for (int r = 0; r < dm.rows; ++r) {
    for (int c = 0; c < dm.cols; ++c) {
      const CellHit hit = nearest_hit(scene, pixel_ray(cam, dm.cell_center(r, c)));
      if (hit.object < 0) continue;
      const std::size_t idx = dm.index(r, c);
      dm.depth[idx] = hit.t;
      dm.instance[idx] = scene.objects[hit.object].id;
      dm.valid[idx] = 1;
      owner[idx] = hit.object;
    }
  }

  out.objects.reserve(scene.objects.size());
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const auto& obj = scene.objects[k];
    ObjectFields f;
    f.id = obj.id;
    f.box = obj.box;
    f.edge_visible = edge_visibility(obj.box, cam, scene);

    const auto corners = bev_corners(obj.box);
    f.rho_valid = std::all_of(corners.begin(), corners.end(), [](const Vec3d& p) { return p.z() > 0.0; });
    if (f.rho_valid)
      for (int i = 0; i < 4; ++i) f.rho_gt[i] = project(cam, corners[i]).x();

    int r0, r1, c0, c1;
    if (in_front(obj.box) && roi_bounds(obj.box, cam, dm, r0, r1, c0, c1)) {
      // Faces partly hidden by other objects.
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          const std::size_t idx = dm.index(r, c);
          if (owner[idx] == int(k) || owner[idx] < 0) continue;
          const auto own = intersect_ray_box(obj.box, Vec3d(Vec3d::Zero()), pixel_ray(cam, dm.cell_center(r, c)));
          if (own && own->t_enter > 0.0 && dm.depth[idx] < own->t_enter)
            f.face_occluded[static_cast<int>(own->entry_face)] = true;
        }
      }
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          const std::size_t idx = dm.index(r, c);
          PatchPixeld px;
          px.pixel = dm.cell_center(r, c);
          px.valid = owner[idx] == int(k);
          if (px.valid) {
            px.depth = dm.depth[idx];
            const Vec3d p = backproject(cam, px.pixel, px.depth);
            px.dbr.residuals = gt_dbr(p, obj.box);
            px.dbr.uncertainties = visibility_uncertainty(p, obj.box, cam, options.u_occluded);
            for (int j = 0; j < 6; ++j)
              if (f.face_occluded[j]) px.dbr.uncertainties[j] = options.u_occluded;
            if (f.rho_valid) {
              BevCornerPixel<double> bp;
              bp.x = px.pixel.x();
              for (int i = 0; i < 4; ++i) bp.displacement[i] = f.rho_gt[i] - bp.x;
              f.bev.pixels.push_back(bp);
            }
          }
          f.patch.pixels.push_back(px);
          f.cells.push_back(idx);
        }
      }
    }
    out.objects.push_back(std::move(f));
  }
  return out;
}

RenderResult add_noise(const RenderResult& fields, const NoiseSpec& noise) {
  noise.validate();
  RenderResult out = fields;
  if (noise.sigma_depth > 0.0) {
    for (std::size_t i = 0; i < out.depth.depth.size(); ++i) {
      if (!out.depth.valid[i]) continue;
      const double e = rng::laplace(rng::hash(noise.seed, kTagDepth, 0, i), noise.sigma_depth);
      out.depth.depth[i] = std::max(1e-3, out.depth.depth[i] + e);
    }
  }
  for (auto& obj : out.objects) {
    const auto oid = static_cast<std::uint64_t>(static_cast<std::int64_t>(obj.id));
    std::size_t bev_index = 0;
    for (std::size_t p = 0; p < obj.patch.pixels.size(); ++p) {
      auto& px = obj.patch.pixels[p];
      if (!px.valid) continue;
      if (noise.sigma_depth > 0.0) px.depth = out.depth.depth[obj.cells[p]];
      if (noise.sigma_dbr > 0.0)
        for (std::size_t j = 0; j < 6; ++j)
          px.dbr.residuals[j] += rng::laplace(rng::hash(noise.seed, kTagDbr, oid, 6 * p + j), noise.sigma_dbr);
      if (noise.sigma_corner > 0.0 && bev_index < obj.bev.pixels.size()) {
        auto& bp = obj.bev.pixels[bev_index];
        for (std::size_t i = 0; i < 4; ++i)
          bp.displacement[i] += rng::laplace(rng::hash(noise.seed, kTagCorner, oid, 4 * p + i), noise.sigma_corner);
      }
      ++bev_index;
    }
  }
  return out;
}

}  // namespace geostream
