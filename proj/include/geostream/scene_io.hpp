// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "geostream/scene.hpp"

namespace geostream {

// {camera:{fx,fy,cx,cy,width,height}, boxes:[{id,center:[x,y,z],h,w,l,theta}], stride}
nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& doc);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

nlohmann::json box_to_json(const Box3d& box);
Box3d box_from_json(const nlohmann::json& j);

}  // namespace geostream
