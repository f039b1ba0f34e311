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
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cubify3d/errors.hpp"

namespace cubify3d {

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle into (-pi, pi].
inline double wrap_to_pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Ground-plane point, camera x (right) and z (forward).
struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};

/// Oriented 3D box in camera coordinates (x right, y down, z forward).
/// Width spans local x, height local y, length local z (the heading axis).
/// Yaw rotates about the camera y axis; positive yaw turns local +z toward +x.
struct Box3D {
  double x_c = 0.0, y_c = 0.0, z_c = 0.0;          // center, meters
  double width = 1.0, height = 1.0, length = 1.0;  // meters, strictly positive
  double yaw = 0.0;                                // radians, (-pi, pi]
  int class_id = -1;
  double confidence = 1.0;  // [0, 1]
};

inline bool box_valid(const Box3D& b) {
  const bool finite = std::isfinite(b.x_c) && std::isfinite(b.y_c) && std::isfinite(b.z_c) &&
                      std::isfinite(b.width) && std::isfinite(b.height) &&
                      std::isfinite(b.length) && std::isfinite(b.yaw) &&
                      std::isfinite(b.confidence);
  return finite && b.width > 0.0 && b.height > 0.0 && b.length > 0.0 && b.yaw > -kPi &&
         b.yaw <= kPi && b.confidence >= 0.0 && b.confidence <= 1.0;
}

/// Checked constructor: wraps yaw, rejects non-positive dims and bad confidence.
inline Box3D make_box(double x, double y, double z, double width, double height, double length,
                      double yaw, int class_id = -1, double confidence = 1.0) {
  Box3D b{x, y, z, width, height, length, wrap_to_pi(yaw), class_id, confidence};
  if (!box_valid(b)) {
    throw std::invalid_argument("make_box: invalid box (dims must be > 0, confidence in [0,1])");
  }
  return b;
}

/// Pinhole intrinsics; no skew, no distortion.
struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;  // pixels
  double cx = 0.0, cy = 0.0;  // pixels
  int image_width = 0, image_height = 0;
};

inline bool intrinsics_valid(const CameraIntrinsics& c) {
  return c.fx > 0.0 && c.fy > 0.0 && c.image_width > 0 && c.image_height > 0 && c.cx >= 0.0 &&
         c.cx <= c.image_width && c.cy >= 0.0 && c.cy <= c.image_height;
}

struct Rect2D {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;  // pixels

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

/// Ground-plane footprint, 4 vertices in counter-clockwise order (x right, z up).
struct BevPolygon {
  std::array<Vec2, 4> pts{};
};

namespace detail {

// Local corner sign patterns shared by corners() and bev_footprint(): the
// first four entries trace the footprint counter-clockwise in the (x, z) plane.
inline constexpr std::array<std::array<double, 2>, 4> kFootprintSigns = {{
    {+1.0, +1.0},
    {-1.0, +1.0},
    {-1.0, -1.0},
    {+1.0, -1.0},
}};

inline Vec2 rotate_bev(double lx, double lz, double cos_yaw, double sin_yaw) {
  // Rotation about -y viewed from above: local +z maps to (sin, cos).
  return Vec2{lx * cos_yaw + lz * sin_yaw, -lx * sin_yaw + lz * cos_yaw};
}

}  // namespace detail

/// The 8 box corners. Ordering: indices 0-3 are the bottom face (y_c + h/2,
/// y points down), 4-7 the top face, each ring counter-clockwise in BEV
/// starting at local (+w/2, +l/2).
inline std::array<Point3, 8> corners(const Box3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  std::array<Point3, 8> out;
  for (int face = 0; face < 2; ++face) {
    const double ly = (face == 0 ? +0.5 : -0.5) * box.height;
    for (int k = 0; k < 4; ++k) {
      const double lx = detail::kFootprintSigns[k][0] * 0.5 * box.width;
      const double lz = detail::kFootprintSigns[k][1] * 0.5 * box.length;
      const Vec2 g = detail::rotate_bev(lx, lz, c, s);
      out[face * 4 + k] = Point3{box.x_c + g.x, box.y_c + ly, box.z_c + g.z};
    }
  }
  return out;
}

inline BevPolygon bev_footprint(const Box3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  BevPolygon poly;
  for (int k = 0; k < 4; ++k) {
    const double lx = detail::kFootprintSigns[k][0] * 0.5 * box.width;
    const double lz = detail::kFootprintSigns[k][1] * 0.5 * box.length;
    const Vec2 g = detail::rotate_bev(lx, lz, c, s);
    poly.pts[k] = Vec2{box.x_c + g.x, box.z_c + g.z};
  }
  return poly;
}

inline double polygon_area(const BevPolygon& poly) {
  double twice = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& a = poly.pts[i];
    const Vec2& b = poly.pts[(i + 1) % 4];
    twice += a.x * b.z - b.x * a.z;
  }
  return 0.5 * twice;
}

/// Axis-aligned hull of the 8 projected corners, clipped to image bounds.
/// Rejects boxes that straddle the image plane rather than clipping them.
inline Rect2D project_to_image(const Box3D& box, const CameraIntrinsics& cam) {
  const auto pts = corners(box);
  double u_min = std::numeric_limits<double>::infinity();
  double u_max = -u_min, v_min = u_min, v_max = -u_min;
  for (const Point3& p : pts) {
    if (p.z <= 0.0) {
      throw BehindCameraError("project_to_image: corner at z = " + std::to_string(p.z));
    }
    const double u = cam.fx * p.x / p.z + cam.cx;
    const double v = cam.fy * p.y / p.z + cam.cy;
    u_min = std::min(u_min, u);
    u_max = std::max(u_max, u);
    v_min = std::min(v_min, v);
    v_max = std::max(v_max, v);
  }
  const double w = static_cast<double>(cam.image_width);
  const double h = static_cast<double>(cam.image_height);
  return Rect2D{std::clamp(u_min, 0.0, w), std::clamp(v_min, 0.0, h), std::clamp(u_max, 0.0, w),
                std::clamp(v_max, 0.0, h)};
}

/// Dataset-wide min/max of object dimensions, used to map w/h/l into [0,1].
struct DimPriors {
  double w_min = 0.0, w_max = 1.0;
  double h_min = 0.0, h_max = 1.0;
  double l_min = 0.0, l_max = 1.0;
};

inline bool priors_valid(const DimPriors& p) {
  return p.w_min < p.w_max && p.h_min < p.h_max && p.l_min < p.l_max;
}

// Linear map onto [0,1] with clamping at the prior bounds.
inline double normalize_dim(double v, double lo, double hi) {
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

inline double denormalize_dim(double n, double lo, double hi) { return lo + n * (hi - lo); }

/// Classifier input geometry: the 2D crop rectangle plus the prior-normalized
/// (w, h, l) triple. Resampling the crop is the consumer's job.
struct CropSpec {
  Rect2D rect;
  std::array<double, 3> whl_normalized{};
};

inline CropSpec crop_spec(const Box3D& box, const CameraIntrinsics& cam, const DimPriors& priors) {
  CropSpec spec;
  spec.rect = project_to_image(box, cam);
  spec.whl_normalized = {normalize_dim(box.width, priors.w_min, priors.w_max),
                         normalize_dim(box.height, priors.h_min, priors.h_max),
                         normalize_dim(box.length, priors.l_min, priors.l_max)};
  return spec;
}

}  // namespace cubify3d
