// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "geostream/bev_projection.hpp"
#include "geostream/geometry.hpp"

namespace geostream {

// Laplacian aleatoric uncertainty loss: sqrt(2) |pred - gt| / u + ln u.
template <typename Scalar>
Scalar lau(Scalar pred, Scalar gt, Scalar u) {
  if (!(u > Scalar(0))) throw NonPositiveUncertainty(static_cast<double>(u));
  using std::abs;
  using std::log;
  return Scalar(std::numbers::sqrt2) * abs(pred - gt) / u + log(u);
}

// Two-stream consistency: |dH| + |dW| + |dL| + ||dC||.
template <typename Scalar>
Scalar l_cg(const Box3<Scalar>& gs, const Box3<Scalar>& cs) {
  using std::abs;
  return abs(gs.h - cs.h) + abs(gs.w - cs.w) + abs(gs.l - cs.l) + (gs.center - cs.center).norm();
}

struct BpcResult {
  double value = 0.0;
  int degenerate_edges = 0;
};

// Weighted depth consistency over edge hypotheses; degenerate edges add nothing.
inline BpcResult l_bpc_detailed(std::span<const EdgeHypothesis> hypotheses, double cs_center_z) {
  BpcResult r;
  for (const auto& h : hypotheses) {
    if (!h.z_c) {
      ++r.degenerate_edges;
      continue;
    }
    if (h.weight == 0.0) continue;
    r.value += h.weight * std::abs(*h.z_c - cs_center_z);
  }
  return r;
}

inline double l_bpc(std::span<const EdgeHypothesis> hypotheses, double cs_center_z) {
  return l_bpc_detailed(hypotheses, cs_center_z).value;
}

struct LossTerm {
  std::string name;
  double value = 0.0;
};

struct LossReport {
  double lau_total = 0.0;
  double l_cg = 0.0;
  double l_bpc = 0.0;
  int degenerate_edges = 0;
  std::vector<LossTerm> terms;
};

struct LauInput {
  std::string name;
  double pred = 0.0;
  double gt = 0.0;
  double uncertainty = 1.0;
};

LossReport make_loss_report(const Box3d& gs, const Box3d& cs, std::span<const EdgeHypothesis> hypotheses,
                            std::span<const LauInput> lau_inputs = {});

}  // namespace geostream
