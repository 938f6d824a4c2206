// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include "geostream/losses.hpp"

namespace geostream {

LossReport make_loss_report(const Box3d& gs, const Box3d& cs, std::span<const EdgeHypothesis> hypotheses,
                            std::span<const LauInput> lau_inputs) {
  LossReport r;
  for (const auto& in : lau_inputs) {
    const double v = lau(in.pred, in.gt, in.uncertainty);
    r.lau_total += v;
    r.terms.push_back({"lau:" + in.name, v});
  }
  r.l_cg = l_cg(gs, cs);
  r.terms.push_back({"l_cg", r.l_cg});
  const auto bpc = l_bpc_detailed(hypotheses, cs.center.z());
  r.l_bpc = bpc.value;
  r.degenerate_edges = bpc.degenerate_edges;
  for (std::size_t e = 0; e < hypotheses.size(); ++e) {
    const auto& h = hypotheses[e];
    const double v = h.z_c ? h.weight * std::abs(*h.z_c - cs.center.z()) : 0.0;
    r.terms.push_back({"l_bpc:edge" + std::to_string(e), v});
  }
  return r;
}

}  // namespace geostream
