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
#include <random>

#include "cubify3d/geometry.hpp"
#include "cubify3d/grid.hpp"

namespace cubify3d {

/// Left-right mirror in label space: x negates, heading reflects to pi - yaw.
inline Box3D flip_lr(const Box3D& box) {
  Box3D out = box;
  out.x_c = -box.x_c;
  out.yaw = wrap_to_pi(kPi - box.yaw);
  return out;
}

// HSV triples use h in [0, 1), s and v in [0, 1].
inline std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
  const double v = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double delta = v - lo;
  double h = 0.0;
  if (delta > 0.0) {
    if (v == r) {
      h = (g - b) / delta;
      if (h < 0.0) h += 6.0;
    } else if (v == g) {
      h = (b - r) / delta + 2.0;
    } else {
      h = (r - g) / delta + 4.0;
    }
    h /= 6.0;
  }
  const double s = v > 0.0 ? delta / v : 0.0;
  return {h, s, v};
}

inline std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  if (s <= 0.0) return {v, v, v};
  const double h6 = h * 6.0;
  const int sector = std::min(5, static_cast<int>(h6));
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

/// Saturation/value jitter through HSV: S and V scale by the given factors
/// (clamped back into [0,1]); hue passes through untouched.
inline RgbImage hsv_jitter(const RgbImage& image, double s_factor, double v_factor) {
  RgbImage out(image.rows(), image.cols());
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c) {
      const auto hsv = rgb_to_hsv(image.at(r, c, 0), image.at(r, c, 1), image.at(r, c, 2));
      const double s = std::clamp(hsv[1] * s_factor, 0.0, 1.0);
      const double v = std::clamp(hsv[2] * v_factor, 0.0, 1.0);
      const auto rgb = hsv_to_rgb(hsv[0], s, v);
      out.at(r, c, 0) = rgb[0];
      out.at(r, c, 1) = rgb[1];
      out.at(r, c, 2) = rgb[2];
    }
  }
  return out;
}

inline constexpr double kCenterNoiseMeters = 0.2;

/// Adds independent uniform noise in [-0.2, 0.2] m to each center coordinate.
inline Box3D perturb_center(const Box3D& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> noise(-kCenterNoiseMeters, kCenterNoiseMeters);
  Box3D out = box;
  out.x_c += noise(rng);
  out.y_c += noise(rng);
  out.z_c += noise(rng);
  return out;
}

/// Draws the paper-range jitter factors for hsv_jitter.
inline std::array<double, 2> draw_hsv_factors(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f(0.5, 1.5);
  const double s = f(rng);
  const double v = f(rng);
  return {s, v};
}

}  // namespace cubify3d
