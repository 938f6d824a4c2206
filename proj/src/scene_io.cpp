// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include "geostream/scene_io.hpp"

#include <fstream>
#include <sstream>

namespace geostream {

using nlohmann::json;

json box_to_json(const Box3d& box) {
  return json{{"center", {box.center.x(), box.center.y(), box.center.z()}},
              {"h", box.h},
              {"w", box.w},
              {"l", box.l},
              {"theta", box.theta}};
}

Box3d box_from_json(const json& j) {
  Box3d box;
  const auto& c = j.at("center");
  if (!c.is_array() || c.size() != 3) throw InvalidArgument("box center must be a 3-element array");
  box.center = Vec3d(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
  box.h = j.at("h").get<double>();
  box.w = j.at("w").get<double>();
  box.l = j.at("l").get<double>();
  box.theta = j.at("theta").get<double>();
  return box;
}

json scene_to_json(const Scene& scene) {
  json boxes = json::array();
  for (const auto& o : scene.objects) {
    json b = box_to_json(o.box);
    b["id"] = o.id;
    boxes.push_back(std::move(b));
  }
  const auto& cam = scene.camera;
  return json{{"camera",
               {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx}, {"cy", cam.cy}, {"width", cam.width},
                {"height", cam.height}}},
              {"boxes", std::move(boxes)},
              {"stride", scene.stride}};
}

Scene scene_from_json(const json& doc) {
  Scene scene;
  try {
    const auto& c = doc.at("camera");
    scene.camera.fx = c.at("fx").get<double>();
    scene.camera.fy = c.at("fy").get<double>();
    scene.camera.cx = c.at("cx").get<double>();
    scene.camera.cy = c.at("cy").get<double>();
    scene.camera.width = c.at("width").get<int>();
    scene.camera.height = c.at("height").get<int>();
    scene.stride = doc.value("stride", 4);
    for (const auto& b : doc.at("boxes")) scene.objects.push_back({b.at("id").get<int>(), box_from_json(b)});
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("scene json: ") + e.what());
  }
  scene.validate();
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidArgument("scene file " + path.string() + ": " + e.what());
  }
  return scene_from_json(doc);
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << scene_to_json(scene).dump(2) << '\n';
}

}  // namespace geostream
