// Copyright 2026 The geostream Authors
// SPDX-License-Identifier: Apache-2.0

#include "geostream/kitti.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace geostream::kitti {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

std::string describe_errors(const std::vector<MalformedLine>& errs) {
  std::string msg = "no parsable label line";
  if (!errs.empty()) msg += " (line " + std::to_string(errs.front().line) + ": " + errs.front().reason + ")";
  return msg;
}

}  // namespace

LabelFileError::LabelFileError(std::vector<MalformedLine> errs)
    : Error(describe_errors(errs)), errors(std::move(errs)) {}

ParseResult parse_labels(std::string_view text) {
  ParseResult result;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto toks = split_ws(line);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (toks.size() != 15 && toks.size() != 16) {
      result.errors.push_back({line_no, "expected 15 or 16 fields, got " + std::to_string(toks.size())});
      continue;
    }
    LabelRow row;
    row.type = std::string(toks[0]);
    double* numeric[] = {&row.truncated, nullptr,    &row.alpha, &row.bbox[0], &row.bbox[1],
                         &row.bbox[2],   &row.bbox[3], &row.h,   &row.w,       &row.l,
                         &row.x,         &row.y,       &row.z,   &row.rotation_y};
    bool ok = true;
    std::string reason;
    for (std::size_t f = 1; f < 15 && ok; ++f) {
      if (f == 2) {
        ok = parse_number(toks[f], row.occluded);
      } else {
        ok = parse_number(toks[f], *numeric[f - 1]);
      }
      if (!ok) reason = "field " + std::to_string(f + 1) + " is not a number: '" + std::string(toks[f]) + "'";
    }
    if (ok && toks.size() == 16) {
      double s = 0.0;
      ok = parse_number(toks[15], s);
      if (ok)
        row.score = s;
      else
        reason = "score is not a number: '" + std::string(toks[15]) + "'";
    }
    if (!ok) {
      result.errors.push_back({line_no, reason});
      continue;
    }
    result.rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  if (result.rows.empty() && !result.errors.empty()) throw LabelFileError(result.errors);
  return result;
}

std::string serialize_row(const LabelRow& r) {
  char buf[512];
  int n = std::snprintf(buf, sizeof(buf),
                        "%s %.2f %d %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f", r.type.c_str(),
                        r.truncated, r.occluded, r.alpha, r.bbox[0], r.bbox[1], r.bbox[2], r.bbox[3], r.h, r.w, r.l,
                        r.x, r.y, r.z, r.rotation_y);
  std::string out(buf, static_cast<std::size_t>(std::max(0, n)));
  if (r.score) {
    n = std::snprintf(buf, sizeof(buf), " %.2f", *r.score);
    out.append(buf, static_cast<std::size_t>(std::max(0, n)));
  }
  return out;
}

std::string serialize_labels(const std::vector<LabelRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += serialize_row(r);
    out += '\n';
  }
  return out;
}

double heading_from_rotation_y(double rotation_y) { return wrap_angle(rotation_y + std::numbers::pi / 2.0); }

double rotation_y_from_heading(double theta) { return wrap_angle(theta - std::numbers::pi / 2.0); }

Box3d to_box(const LabelRow& row) {
  Box3d box;
  box.center = Vec3d(row.x, row.y - row.h / 2.0, row.z);
  box.h = row.h;
  box.w = row.w;
  box.l = row.l;
  box.theta = heading_from_rotation_y(row.rotation_y);
  return box;
}

LabelRow from_box(const Box3d& box, const Camerad& cam, std::string type, std::optional<double> score) {
  LabelRow row;
  row.type = std::move(type);
  row.h = box.h;
  row.w = box.w;
  row.l = box.l;
  row.x = box.center.x();
  row.y = box.center.y() + box.h / 2.0;
  row.z = box.center.z();
  row.rotation_y = rotation_y_from_heading(box.theta);
  row.alpha = wrap_angle(row.rotation_y - std::atan2(row.x, row.z));
  row.score = score;

  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  bool any = false;
  for (const auto& v : box_vertices(box)) {
    if (!(v.z() > 0.0)) continue;
    const Vec2d p = project(cam, v);
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
    any = true;
  }
  if (any) {
    const double wmax = cam.width - 1.0;
    const double hmax = cam.height - 1.0;
    row.bbox = {std::clamp(x0, 0.0, wmax), std::clamp(y0, 0.0, hmax), std::clamp(x1, 0.0, wmax),
                std::clamp(y1, 0.0, hmax)};
  }
  return row;
}

}  // namespace geostream::kitti
