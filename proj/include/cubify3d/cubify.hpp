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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cubify3d/config.hpp"
#include "cubify3d/errors.hpp"
#include "cubify3d/geometry.hpp"

namespace cubify3d {

// Slot field layout: (confidence, x, y, z, w, h, l, orientation).
enum TensorField : int {
  kFieldConfidence = 0,
  kFieldX = 1,
  kFieldY = 2,
  kFieldZ = 3,
  kFieldW = 4,
  kFieldH = 5,
  kFieldL = 6,
  kFieldOrientation = 7,
};

inline constexpr int kNumQuadrants = 4;
inline constexpr int kNumFields = 8;

/// The normalized 4 x M x N x 8 label grid, row-major over
/// (quadrant, cuboid, slot, field), every entry in [0, 1].
class LabelTensor {
 public:
  LabelTensor() = default;
  LabelTensor(int cuboids, int slots)
      : cuboids_(cuboids),
        slots_(slots),
        values_(static_cast<std::size_t>(kNumQuadrants) * cuboids * slots * kNumFields, 0.0) {}

  int cuboids() const { return cuboids_; }
  int slots() const { return slots_; }

  std::size_t index(int q, int j, int k, int f) const {
    return ((static_cast<std::size_t>(q) * cuboids_ + j) * slots_ + k) * kNumFields + f;
  }
  double at(int q, int j, int k, int f) const { return values_[index(q, j, k, f)]; }
  double& at(int q, int j, int k, int f) { return values_[index(q, j, k, f)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  bool same_shape(const LabelTensor& o) const {
    return cuboids_ == o.cuboids_ && slots_ == o.slots_;
  }

 private:
  int cuboids_ = 0;
  int slots_ = 0;
  std::vector<double> values_;
};

/// The T_ijk indicator: which slots hold ground-truth objects.
class OccupancyMask {
 public:
  OccupancyMask() = default;
  OccupancyMask(int cuboids, int slots)
      : cuboids_(cuboids),
        slots_(slots),
        bits_(static_cast<std::size_t>(kNumQuadrants) * cuboids * slots, 0) {}

  int cuboids() const { return cuboids_; }
  int slots() const { return slots_; }

  std::size_t index(int q, int j, int k) const {
    return (static_cast<std::size_t>(q) * cuboids_ + j) * slots_ + k;
  }
  bool at(int q, int j, int k) const { return bits_[index(q, j, k)] != 0; }
  void set(int q, int j, int k, bool v) { bits_[index(q, j, k)] = v ? 1 : 0; }

  int count() const {
    int n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

 private:
  int cuboids_ = 0;
  int slots_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Quadrant layout over the image plane: 0 = (x<0, y<0), 1 = (x>=0, y<0),
// 2 = (x<0, y>=0), 3 = (x>=0, y>=0). Boundaries go to the non-negative side.
inline double quadrant_sign_x(int q) { return (q == 0 || q == 2) ? -1.0 : 1.0; }
inline double quadrant_sign_y(int q) { return (q == 0 || q == 1) ? -1.0 : 1.0; }

inline bool in_roi(const Box3D& box, const RoiPriorConfig& cfg) {
  return std::abs(box.x_c) <= cfg.x_max && std::abs(box.y_c) <= cfg.y_max && box.z_c > 0.0 &&
         box.z_c <= cfg.z_max;
}

inline int quadrant_index(const Box3D& box, const RoiPriorConfig& cfg) {
  if (!in_roi(box, cfg)) {
    throw OutOfRoiError("object center outside ROI");
  }
  const int right = box.x_c < 0.0 ? 0 : 1;
  const int bottom = box.y_c < 0.0 ? 0 : 1;
  return bottom * 2 + right;
}

inline int cuboid_index(double z, const RoiPriorConfig& cfg) {
  if (!(z > 0.0 && z <= cfg.z_max)) {
    throw OutOfRoiError("depth outside (0, z_max]");
  }
  const int j = static_cast<int>(std::floor(z / cfg.dz()));
  return std::min(j, cfg.cuboids - 1);  // z == z_max lands in the top cuboid
}

/// Normalizes one in-ROI object to its (confidence, x, y, z, w, h, l, o)
/// slot vector. x and y are magnitudes scaled by the ROI half-extents (signs
/// live in the quadrant index); z is local to the object's cuboid; dims are
/// clamped to the priors; orientation maps (-pi, pi] onto (0, 1].
inline std::array<double, 8> normalize_object(const Box3D& box, const RoiPriorConfig& cfg) {
  const int j = cuboid_index(box.z_c, cfg);  // throws if out of ROI in z
  if (std::abs(box.x_c) > cfg.x_max || std::abs(box.y_c) > cfg.y_max) {
    throw OutOfRoiError("object center outside ROI");
  }
  const DimPriors& p = cfg.dim_priors;
  std::array<double, 8> v;
  v[kFieldConfidence] = box.confidence;
  v[kFieldX] = std::abs(box.x_c) / cfg.x_max;
  v[kFieldY] = std::abs(box.y_c) / cfg.y_max;
  v[kFieldZ] = (box.z_c - j * cfg.dz()) / cfg.dz();
  v[kFieldW] = normalize_dim(box.width, p.w_min, p.w_max);
  v[kFieldH] = normalize_dim(box.height, p.h_min, p.h_max);
  v[kFieldL] = normalize_dim(box.length, p.l_min, p.l_max);
  v[kFieldOrientation] = (box.yaw + kPi) / (2.0 * kPi);
  return v;
}

/// Inverse of normalize_object for a slot at (quadrant, cuboid).
inline Box3D denormalize_object(std::span<const double> v, int quadrant, int cuboid,
                                const RoiPriorConfig& cfg) {
  const DimPriors& p = cfg.dim_priors;
  Box3D b;
  b.x_c = quadrant_sign_x(quadrant) * v[kFieldX] * cfg.x_max;
  b.y_c = quadrant_sign_y(quadrant) * v[kFieldY] * cfg.y_max;
  b.z_c = (cuboid + v[kFieldZ]) * cfg.dz();
  b.width = denormalize_dim(v[kFieldW], p.w_min, p.w_max);
  b.height = denormalize_dim(v[kFieldH], p.h_min, p.h_max);
  b.length = denormalize_dim(v[kFieldL], p.l_min, p.l_max);
  b.yaw = wrap_to_pi(v[kFieldOrientation] * 2.0 * kPi - kPi);
  b.confidence = v[kFieldConfidence];
  b.class_id = -1;  // the tensor carries no class channel
  return b;
}

struct EncodeResult {
  LabelTensor tensor;
  OccupancyMask mask;
  int overflow = 0;      // objects dropped from full cuboids
  int skipped = 0;       // objects outside the ROI
  int encoded = 0;
};

/// Buckets objects by (quadrant, cuboid), orders each bucket by increasing z,
/// and writes up to `slots` nearest objects per bucket. Out-of-ROI objects are
/// skipped and counted; overfull buckets keep the nearest and count the rest.
inline EncodeResult encode(std::span<const Box3D> objects, const RoiPriorConfig& cfg) {
  EncodeResult res{LabelTensor(cfg.cuboids, cfg.slots), OccupancyMask(cfg.cuboids, cfg.slots)};

  std::vector<std::vector<Box3D>> buckets(static_cast<std::size_t>(kNumQuadrants) * cfg.cuboids);
  for (const Box3D& box : objects) {
    if (!in_roi(box, cfg)) {
      ++res.skipped;
      continue;
    }
    const int q = quadrant_index(box, cfg);
    const int j = cuboid_index(box.z_c, cfg);
    buckets[static_cast<std::size_t>(q) * cfg.cuboids + j].push_back(box);
  }

  // Full-tuple tie-break keeps the encoding permutation-invariant.
  const auto key = [](const Box3D& b) {
    return std::tie(b.z_c, b.x_c, b.y_c, b.width, b.height, b.length, b.yaw, b.confidence,
                    b.class_id);
  };
  for (int q = 0; q < kNumQuadrants; ++q) {
    for (int j = 0; j < cfg.cuboids; ++j) {
      auto& bucket = buckets[static_cast<std::size_t>(q) * cfg.cuboids + j];
      std::sort(bucket.begin(), bucket.end(),
                [&key](const Box3D& a, const Box3D& b) { return key(a) < key(b); });
      const int kept = std::min<int>(static_cast<int>(bucket.size()), cfg.slots);
      res.overflow += static_cast<int>(bucket.size()) - kept;
      for (int k = 0; k < kept; ++k) {
        const auto v = normalize_object(bucket[static_cast<std::size_t>(k)], cfg);
        for (int f = 0; f < kNumFields; ++f) res.tensor.at(q, j, k, f) = v[static_cast<std::size_t>(f)];
        res.mask.set(q, j, k, true);
        ++res.encoded;
      }
    }
  }
  return res;
}

/// Decodes every slot whose confidence clears the threshold back to a metric
/// box. Decoded confidence is the slot confidence; class is unset.
inline std::vector<Box3D> decode(const LabelTensor& tensor, const RoiPriorConfig& cfg,
                                 double conf_threshold) {
  std::vector<Box3D> out;
  std::array<double, 8> v;
  for (int q = 0; q < kNumQuadrants; ++q) {
    for (int j = 0; j < tensor.cuboids(); ++j) {
      for (int k = 0; k < tensor.slots(); ++k) {
        if (tensor.at(q, j, k, kFieldConfidence) < conf_threshold) continue;
        for (int f = 0; f < kNumFields; ++f) v[static_cast<std::size_t>(f)] = tensor.at(q, j, k, f);
        out.push_back(denormalize_object(v, q, j, cfg));
      }
    }
  }
  return out;
}

/// Structural validity check: entries in [0,1], occupied slots form a prefix
/// ordered by nondecreasing local z, unoccupied slots all-zero.
/// Returns a description of the first violation, or nullopt if clean.
inline std::optional<std::string> check_tensor_invariants(const LabelTensor& t,
                                                          const OccupancyMask& mask) {
  const auto slot_name = [](int q, int j, int k) {
    return "(" + std::to_string(q) + "," + std::to_string(j) + "," + std::to_string(k) + ")";
  };
  for (int q = 0; q < kNumQuadrants; ++q) {
    for (int j = 0; j < t.cuboids(); ++j) {
      bool seen_empty = false;
      double prev_z = -1.0;
      for (int k = 0; k < t.slots(); ++k) {
        for (int f = 0; f < kNumFields; ++f) {
          const double v = t.at(q, j, k, f);
          if (!(v >= 0.0 && v <= 1.0)) {
            return "entry outside [0,1] at slot " + slot_name(q, j, k);
          }
        }
        if (mask.at(q, j, k)) {
          if (seen_empty) return "occupied slot after a gap at " + slot_name(q, j, k);
          const double z = t.at(q, j, k, kFieldZ);
          if (z < prev_z) return "slots not sorted by z at " + slot_name(q, j, k);
          prev_z = z;
        } else {
          seen_empty = true;
          for (int f = 0; f < kNumFields; ++f) {
            if (t.at(q, j, k, f) != 0.0) {
              return "nonzero entry in unoccupied slot " + slot_name(q, j, k);
            }
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace cubify3d
