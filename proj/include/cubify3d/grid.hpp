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
#include <cstddef>
#include <vector>

#include "cubify3d/errors.hpp"

namespace cubify3d {

/// Dense row-major scalar grid. x runs along columns, y along rows.
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }

  double at(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& at(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }

  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  bool same_shape(const Grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

/// Per-pixel depth with explicit normalization state. Raw values are meters
/// clamped to [0, max_depth]; normalized values live in [-0.5, 0.5].
struct DepthMap {
  enum class State { kRawMeters, kNormalized };

  Grid values;
  State state = State::kRawMeters;
  double max_depth = 100.0;

  static DepthMap raw(Grid g, double max_depth = 100.0) {
    DepthMap d{std::move(g), State::kRawMeters, max_depth};
    for (double& v : d.values.values()) v = std::clamp(v, 0.0, max_depth);
    return d;
  }

  /// Maps [0, max_depth] onto [-0.5, 0.5].
  DepthMap normalized() const {
    if (state == State::kNormalized) return *this;
    DepthMap out{values, State::kNormalized, max_depth};
    for (double& v : out.values.values()) v = v / max_depth - 0.5;
    return out;
  }

  DepthMap denormalized() const {
    if (state == State::kRawMeters) return *this;
    DepthMap out{values, State::kRawMeters, max_depth};
    for (double& v : out.values.values()) v = (v + 0.5) * max_depth;
    return out;
  }
};

/// Interleaved RGB image, channels in [0, 1].
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int rows, int cols)
      : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols * 3, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double at(int r, int c, int ch) const {
    return v_[(static_cast<std::size_t>(r) * cols_ + c) * 3 + ch];
  }
  double& at(int r, int c, int ch) {
    return v_[(static_cast<std::size_t>(r) * cols_ + c) * 3 + ch];
  }

  double intensity(int r, int c) const {
    return (at(r, c, 0) + at(r, c, 1) + at(r, c, 2)) / 3.0;
  }

  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

}  // namespace cubify3d
