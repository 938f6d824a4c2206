// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geostream/geometry.hpp"

// KITTI object label interchange. KITTI locations are bottom-center with y
// down and rotation_y = 0 heading along +x; this is the only place those
// conventions are translated.
namespace geostream::kitti {

struct LabelRow {
  std::string type = "Car";
  double truncated = 0.0;
  int occluded = 0;
  double alpha = 0.0;
  std::array<double, 4> bbox{};  // left, top, right, bottom
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double rotation_y = 0.0;
  std::optional<double> score;

  bool operator==(const LabelRow&) const = default;
};

struct MalformedLine {
  int line = 0;  // 1-based
  std::string reason;
};

struct ParseResult {
  std::vector<LabelRow> rows;
  std::vector<MalformedLine> errors;
};

class LabelFileError : public Error {
 public:
  explicit LabelFileError(std::vector<MalformedLine> errs);
  std::vector<MalformedLine> errors;
};

// Blank lines are skipped. Malformed lines are collected; throws
// LabelFileError only when no line parses but some were malformed.
ParseResult parse_labels(std::string_view text);

// "%.2f" fields, devkit layout; score appended when present.
std::string serialize_row(const LabelRow& row);
std::string serialize_labels(const std::vector<LabelRow>& rows);

Box3d to_box(const LabelRow& row);

// alpha and the 2D box are derived from the camera.
LabelRow from_box(const Box3d& box, const Camerad& cam, std::string type = "Car",
                  std::optional<double> score = std::nullopt);

double heading_from_rotation_y(double rotation_y);
double rotation_y_from_heading(double theta);

}  // namespace geostream::kitti
