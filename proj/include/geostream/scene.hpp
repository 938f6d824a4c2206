// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <vector>

#include "geostream/geometry.hpp"

namespace geostream {

struct SceneObject {
  int id = 0;
  Box3d box;
};

struct Scene {
  Camerad camera;
  std::vector<SceneObject> objects;
  int stride = 4;

  void validate() const {
    camera.validate();
    if (stride <= 0) throw InvalidArgument("scene: stride must be positive");
    std::set<int> ids;
    for (const auto& o : objects) {
      o.box.validate();
      if (!(o.box.center.z() > 0.0)) throw InvalidArgument("scene: box center must have z > 0");
      if (!ids.insert(o.id).second) throw InvalidArgument("scene: duplicate instance id " + std::to_string(o.id));
    }
  }

  const SceneObject* find(int id) const {
    for (const auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
};

}  // namespace geostream
