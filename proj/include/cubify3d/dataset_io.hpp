// Copyright 2026 The cubify3d Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cubify3d/config.hpp"
#include "cubify3d/cubify.hpp"
#include "cubify3d/errors.hpp"
#include "cubify3d/geometry.hpp"

namespace cubify3d {

/// One line of a KITTI-format label file. Dimensions arrive as h, w, l and the
/// location is the bottom-face center in camera coordinates.
struct KittiLabel {
  std::string type;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Rect2D bbox;
  double height = 0.0, width = 0.0, length = 0.0;  // meters
  double x = 0.0, y = 0.0, z = 0.0;                // bottom-center, camera frame
  double rotation_y = 0.0;
  std::optional<double> score;

  bool dont_care() const { return type == "DontCare"; }
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_double(std::string_view tok, int line_no, const char* field) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw MalformedLineError(line_no, std::string("cannot parse ") + field + " from '" +
                                          std::string(tok) + "'");
  }
  if (!std::isfinite(v)) {
    throw MalformedLineError(line_no, std::string(field) + " is not finite");
  }
  return v;
}

}  // namespace detail

/// Strict KITTI label parser: 15 fields (ground truth) or 16 (with score) per
/// non-empty line, all numerics finite. Value-range checks are deliberately
/// deferred to the converters, since real files carry -1 / -1000 sentinels.
inline std::vector<KittiLabel> parse_labels(std::string_view text) {
  std::vector<KittiLabel> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto tok = detail::split_ws(line);
    if (tok.size() != 15 && tok.size() != 16) {
      throw MalformedLineError(line_no, "expected 15 or 16 fields, got " +
                                            std::to_string(tok.size()));
    }
    KittiLabel lab;
    lab.type = std::string(tok[0]);
    lab.truncation = detail::parse_double(tok[1], line_no, "truncation");
    const double occ = detail::parse_double(tok[2], line_no, "occlusion");
    if (occ != std::floor(occ)) {
      throw MalformedLineError(line_no, "occlusion must be integral");
    }
    lab.occlusion = static_cast<int>(occ);
    lab.alpha = detail::parse_double(tok[3], line_no, "alpha");
    lab.bbox.x_min = detail::parse_double(tok[4], line_no, "bbox left");
    lab.bbox.y_min = detail::parse_double(tok[5], line_no, "bbox top");
    lab.bbox.x_max = detail::parse_double(tok[6], line_no, "bbox right");
    lab.bbox.y_max = detail::parse_double(tok[7], line_no, "bbox bottom");
    lab.height = detail::parse_double(tok[8], line_no, "height");
    lab.width = detail::parse_double(tok[9], line_no, "width");
    lab.length = detail::parse_double(tok[10], line_no, "length");
    lab.x = detail::parse_double(tok[11], line_no, "x");
    lab.y = detail::parse_double(tok[12], line_no, "y");
    lab.z = detail::parse_double(tok[13], line_no, "z");
    lab.rotation_y = detail::parse_double(tok[14], line_no, "rotation_y");
    if (tok.size() == 16) lab.score = detail::parse_double(tok[15], line_no, "score");
    out.push_back(std::move(lab));
  }
  return out;
}

/// KITTI bottom-center location to box center: y_c = y - h/2 (y points down).
/// Rejects non-positive dimensions (DontCare records in particular).
inline Box3D to_box3d(const KittiLabel& lab, const ClassRegistry& classes) {
  if (!(lab.width > 0.0 && lab.height > 0.0 && lab.length > 0.0)) {
    throw std::invalid_argument("to_box3d: non-positive dimensions for type '" + lab.type + "'");
  }
  return make_box(lab.x, lab.y - lab.height / 2.0, lab.z, lab.width, lab.height, lab.length,
                  lab.rotation_y, classes.id_of(lab.type), lab.score.value_or(1.0));
}

inline KittiLabel from_box3d(const Box3D& box, const ClassRegistry& classes,
                             const CameraIntrinsics* cam = nullptr) {
  KittiLabel lab;
  lab.type = box.class_id >= 0 && box.class_id < classes.size() ? classes.name_of(box.class_id)
                                                                : "Misc";
  lab.truncation = -1.0;
  lab.occlusion = -1;
  lab.alpha = wrap_to_pi(box.yaw - std::atan2(box.x_c, box.z_c));
  lab.bbox = Rect2D{-1.0, -1.0, -1.0, -1.0};
  if (cam != nullptr) {
    try {
      lab.bbox = project_to_image(box, *cam);
    } catch (const BehindCameraError&) {
      // keep the sentinel bbox
    }
  }
  lab.height = box.height;
  lab.width = box.width;
  lab.length = box.length;
  lab.x = box.x_c;
  lab.y = box.y_c + box.height / 2.0;
  lab.z = box.z_c;
  lab.rotation_y = box.yaw;
  lab.score = box.confidence;
  return lab;
}

/// Canonical 2-decimal serialization, one line per label; 16 fields when a
/// score is present, 15 otherwise. Parsing the output reproduces it exactly.
inline std::string serialize_labels(std::span<const KittiLabel> labels) {
  std::string out;
  char buf[512];
  for (const KittiLabel& l : labels) {
    int n = std::snprintf(buf, sizeof(buf),
                          "%s %.2f %d %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f",
                          l.type.c_str(), l.truncation, l.occlusion, l.alpha, l.bbox.x_min,
                          l.bbox.y_min, l.bbox.x_max, l.bbox.y_max, l.height, l.width, l.length,
                          l.x, l.y, l.z, l.rotation_y);
    out.append(buf, static_cast<std::size_t>(n));
    if (l.score) {
      n = std::snprintf(buf, sizeof(buf), " %.2f", *l.score);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back('\n');
  }
  return out;
}

/// Per-dimension min/max over non-DontCare labels whose center lies in the ROI.
inline DimPriors compute_priors(std::span<const KittiLabel> labels, const RoiPriorConfig& roi) {
  DimPriors p{1e30, -1e30, 1e30, -1e30, 1e30, -1e30};
  int counted = 0;
  for (const KittiLabel& l : labels) {
    if (l.dont_care() || !(l.width > 0.0 && l.height > 0.0 && l.length > 0.0)) continue;
    const double y_c = l.y - l.height / 2.0;
    if (std::abs(l.x) > roi.x_max || std::abs(y_c) > roi.y_max || l.z <= 0.0 || l.z > roi.z_max) {
      continue;
    }
    p.w_min = std::min(p.w_min, l.width);
    p.w_max = std::max(p.w_max, l.width);
    p.h_min = std::min(p.h_min, l.height);
    p.h_max = std::max(p.h_max, l.height);
    p.l_min = std::min(p.l_min, l.length);
    p.l_max = std::max(p.l_max, l.length);
    ++counted;
  }
  if (counted == 0) {
    throw std::invalid_argument("compute_priors: no in-ROI objects");
  }
  return p;
}

/// Extracts fx, fy, cx, cy from the P2 row of a KITTI calibration file.
/// The translation column is ignored; this toolkit is monocular.
inline CameraIntrinsics parse_calib(std::string_view text, int image_width = 1242,
                                    int image_height = 375) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (!line.starts_with("P2:")) continue;
    const auto tok = detail::split_ws(line.substr(3));
    if (tok.size() != 12) {
      throw MissingP2Error("P2 row has " + std::to_string(tok.size()) + " values, expected 12");
    }
    std::array<double, 12> m{};
    for (std::size_t i = 0; i < 12; ++i) m[i] = detail::parse_double(tok[i], 0, "P2 entry");
    CameraIntrinsics cam{m[0], m[5], m[2], m[6], image_width, image_height};
    if (!intrinsics_valid(cam)) {
      throw MissingP2Error("P2 row yields invalid intrinsics");
    }
    return cam;
  }
  throw MissingP2Error("no P2 row in calibration text");
}

/// Train/val frame-id lists; ids are zero-padded to 6 digits.
struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
};

inline std::string canonical_frame_id(std::string_view raw) {
  std::string id(raw);
  if (id.size() < 6) id.insert(0, 6 - id.size(), '0');
  return id;
}

inline std::vector<std::string> parse_split(std::string_view text) {
  std::vector<std::string> ids;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    for (char c : line) {
      if (c < '0' || c > '9') {
        throw MalformedLineError(line_no, "frame id must be numeric, got '" + std::string(line) +
                                              "'");
      }
    }
    ids.push_back(canonical_frame_id(line));
  }
  return ids;
}

inline SplitSpec make_split(std::vector<std::string> train, std::vector<std::string> val) {
  SplitSpec s{std::move(train), std::move(val)};
  std::vector<std::string> a = s.train, b = s.val;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::string> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) {
    throw std::invalid_argument("make_split: train and val share frame " + common.front());
  }
  return s;
}

}  // namespace cubify3d
