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

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubify3d/config.hpp"
#include "cubify3d/cubify.hpp"
#include "cubify3d/errors.hpp"
#include "cubify3d/grid.hpp"
#include "cubify3d/iou.hpp"

namespace cubify3d {

// Floor under the IoU before the log; keeps the loss finite on disjoint pairs.
inline constexpr double kIouLogEps = 1e-7;

struct LossBreakdown {
  double xyz = 0.0;
  double whl = 0.0;
  double orientation = 0.0;
  double iou = 0.0;
  double conf = 0.0;
  double total = 0.0;
  // depth branch
  double mse = 0.0;
  double eas = 0.0;
  double depth_total = 0.0;
};

inline nlohmann::json to_json(const LossBreakdown& b) {
  return {{"xyz_loss", b.xyz},   {"whl_loss", b.whl},     {"orientation_loss", b.orientation},
          {"iou_loss", b.iou},   {"conf_loss", b.conf},   {"total_loss", b.total},
          {"mse_loss", b.mse},   {"eas_loss", b.eas},     {"depth_loss", b.depth_total}};
}

namespace detail {

inline void require_same_shape(const LabelTensor& pred, const LabelTensor& gt,
                               const OccupancyMask& mask, const char* who) {
  if (!pred.same_shape(gt) || pred.cuboids() != mask.cuboids() || pred.slots() != mask.slots()) {
    throw ShapeMismatchError(std::string(who) + ": tensor/mask shapes differ");
  }
}

inline void require_same_shape(const DepthMap& pred, const DepthMap& gt, const char* who) {
  if (!pred.values.same_shape(gt.values)) {
    throw ShapeMismatchError(std::string(who) + ": depth map shapes differ");
  }
}

}  // namespace detail

// --------------------------------------------------------------------------
// Depth branch

/// Mean squared depth error over normalized maps, scaled by lambda.
inline double mse_loss(const DepthMap& pred, const DepthMap& gt, double lambda_mse) {
  detail::require_same_shape(pred, gt, "mse_loss");
  if (pred.state != DepthMap::State::kNormalized || gt.state != DepthMap::State::kNormalized) {
    throw ShapeMismatchError("mse_loss: both maps must be normalized");
  }
  const auto& p = pred.values.values();
  const auto& g = gt.values.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = g[i] - p[i];
    sum += d * d;
  }
  return lambda_mse / static_cast<double>(p.size()) * sum;
}

inline std::vector<double> mse_loss_grad(const DepthMap& pred, const DepthMap& gt,
                                         double lambda_mse) {
  detail::require_same_shape(pred, gt, "mse_loss_grad");
  const auto& p = pred.values.values();
  const auto& g = gt.values.values();
  const double scale = 2.0 * lambda_mse / static_cast<double>(p.size());
  std::vector<double> grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) grad[i] = scale * (p[i] - g[i]);
  return grad;
}

/// Edge-aware smoothing: depth gradients are cheap where the image has edges,
/// expensive where it is flat. Forward differences, zero-padded at the last
/// row and column; image gradients taken on channel-mean intensity.
inline double eas_loss(const DepthMap& pred, const RgbImage& image, double lambda_eas) {
  const Grid& d = pred.values;
  if (d.rows() != image.rows() || d.cols() != image.cols()) {
    throw ShapeMismatchError("eas_loss: depth and image shapes differ");
  }
  double sum = 0.0;
  for (int r = 0; r < d.rows(); ++r) {
    for (int c = 0; c < d.cols(); ++c) {
      if (c + 1 < d.cols()) {
        const double dd = d.at(r, c + 1) - d.at(r, c);
        const double di = image.intensity(r, c + 1) - image.intensity(r, c);
        sum += std::fabs(dd) * std::exp(-std::fabs(di));
      }
      if (r + 1 < d.rows()) {
        const double dd = d.at(r + 1, c) - d.at(r, c);
        const double di = image.intensity(r + 1, c) - image.intensity(r, c);
        sum += std::fabs(dd) * std::exp(-std::fabs(di));
      }
    }
  }
  return lambda_eas / static_cast<double>(d.size()) * sum;
}

inline std::vector<double> eas_loss_grad(const DepthMap& pred, const RgbImage& image,
                                         double lambda_eas) {
  const Grid& d = pred.values;
  if (d.rows() != image.rows() || d.cols() != image.cols()) {
    throw ShapeMismatchError("eas_loss_grad: depth and image shapes differ");
  }
  const double scale = lambda_eas / static_cast<double>(d.size());
  std::vector<double> grad(d.size(), 0.0);
  const auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  const auto idx = [&d](int r, int c) { return static_cast<std::size_t>(r) * d.cols() + c; };
  for (int r = 0; r < d.rows(); ++r) {
    for (int c = 0; c < d.cols(); ++c) {
      if (c + 1 < d.cols()) {
        const double s = sign(d.at(r, c + 1) - d.at(r, c));
        const double w =
            std::exp(-std::fabs(image.intensity(r, c + 1) - image.intensity(r, c)));
        grad[idx(r, c + 1)] += scale * s * w;
        grad[idx(r, c)] -= scale * s * w;
      }
      if (r + 1 < d.rows()) {
        const double s = sign(d.at(r + 1, c) - d.at(r, c));
        const double w =
            std::exp(-std::fabs(image.intensity(r + 1, c) - image.intensity(r, c)));
        grad[idx(r + 1, c)] += scale * s * w;
        grad[idx(r, c)] -= scale * s * w;
      }
    }
  }
  return grad;
}

// --------------------------------------------------------------------------
// Detection branch. Ground-truth fields are unhatted, predictions hatted; the
// mask gates every term except the confidence loss, which sweeps all slots.

inline double xyz_loss(const LabelTensor& pred, const LabelTensor& gt, const OccupancyMask& mask,
                       double lambda_xyz) {
  detail::require_same_shape(pred, gt, mask, "xyz_loss");
  const int n_true = mask.count();
  if (n_true == 0) return 0.0;
  double sum = 0.0;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        if (!mask.at(q, j, k)) continue;
        for (int f = kFieldX; f <= kFieldZ; ++f) {
          const double d = gt.at(q, j, k, f) - pred.at(q, j, k, f);
          sum += d * d;
        }
      }
  return lambda_xyz / n_true * sum;
}

inline double whl_loss(const LabelTensor& pred, const LabelTensor& gt, const OccupancyMask& mask,
                       double lambda_whl) {
  detail::require_same_shape(pred, gt, mask, "whl_loss");
  const int n_true = mask.count();
  if (n_true == 0) return 0.0;
  double sum = 0.0;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        if (!mask.at(q, j, k)) continue;
        for (int f = kFieldW; f <= kFieldL; ++f) {
          const double w = gt.at(q, j, k, f);
          const double wh = pred.at(q, j, k, f);
          if (w < 0.0 || wh < 0.0) {
            throw NegativeDimensionError("whl_loss: negative masked dimension entry");
          }
          const double d = std::sqrt(w) - std::sqrt(wh);
          sum += d * d;
        }
      }
  return lambda_whl / n_true * sum;
}

inline double orientation_loss(const LabelTensor& pred, const LabelTensor& gt,
                               const OccupancyMask& mask, double lambda_orientation) {
  detail::require_same_shape(pred, gt, mask, "orientation_loss");
  const int n_true = mask.count();
  if (n_true == 0) return 0.0;
  double sum = 0.0;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        if (!mask.at(q, j, k)) continue;
        const double d =
            gt.at(q, j, k, kFieldOrientation) - pred.at(q, j, k, kFieldOrientation);
        sum += d * d;
      }
  return lambda_orientation / n_true * sum;
}

/// Negative log of the slot-aligned 3D IoU between decoded pred and gt boxes.
/// Slot identity is the pairing; the IoU is floored at kIouLogEps.
inline double iou_loss(const LabelTensor& pred, const LabelTensor& gt, const OccupancyMask& mask,
                       const RoiPriorConfig& cfg, double lambda_iou) {
  detail::require_same_shape(pred, gt, mask, "iou_loss");
  const int n_true = mask.count();
  if (n_true == 0) return 0.0;
  double sum = 0.0;
  std::array<double, 8> vp, vg;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        if (!mask.at(q, j, k)) continue;
        for (int f = 0; f < kNumFields; ++f) {
          vp[static_cast<std::size_t>(f)] = pred.at(q, j, k, f);
          vg[static_cast<std::size_t>(f)] = gt.at(q, j, k, f);
        }
        const Box3D bp = denormalize_object(vp, q, j, cfg);
        const Box3D bg = denormalize_object(vg, q, j, cfg);
        sum += -std::log(std::max(iou_3d(bp, bg), kIouLogEps));
      }
  return lambda_iou / n_true * sum;
}

/// Plain squared confidence error averaged over every slot: the occupied and
/// empty indicator terms collapse to one unweighted sum.
inline double conf_loss(const LabelTensor& pred, const LabelTensor& gt, const OccupancyMask& mask,
                        double lambda_conf) {
  detail::require_same_shape(pred, gt, mask, "conf_loss");
  const double slots = static_cast<double>(kNumQuadrants) * pred.cuboids() * pred.slots();
  double sum = 0.0;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        const double d = gt.at(q, j, k, kFieldConfidence) - pred.at(q, j, k, kFieldConfidence);
        sum += d * d;
      }
  return lambda_conf / slots * sum;
}

inline LossBreakdown total_detection_loss(const LabelTensor& pred, const LabelTensor& gt,
                                          const OccupancyMask& mask, const RoiPriorConfig& cfg,
                                          const LossWeights& w) {
  LossBreakdown b;
  b.xyz = xyz_loss(pred, gt, mask, w.xyz);
  b.whl = whl_loss(pred, gt, mask, w.whl);
  b.orientation = orientation_loss(pred, gt, mask, w.orientation);
  b.iou = iou_loss(pred, gt, mask, cfg, w.iou);
  b.conf = conf_loss(pred, gt, mask, w.conf);
  b.total = b.xyz + b.whl + b.orientation + b.iou + b.conf;
  return b;
}

inline LossBreakdown depth_loss(const DepthMap& pred, const DepthMap& gt, const RgbImage& image,
                                const LossWeights& w) {
  LossBreakdown b;
  b.mse = mse_loss(pred, gt, w.mse);
  b.eas = eas_loss(pred, image, w.eas);
  b.depth_total = b.mse + b.eas;
  return b;
}

// --------------------------------------------------------------------------
// Analytic gradients w.r.t. the flat prediction tensor (LabelTensor storage
// order). Entries the loss does not read have zero gradient.

inline std::vector<double> xyz_loss_grad(const LabelTensor& pred, const LabelTensor& gt,
                                         const OccupancyMask& mask, double lambda_xyz) {
  detail::require_same_shape(pred, gt, mask, "xyz_loss_grad");
  std::vector<double> grad(pred.size(), 0.0);
  const int n_true = mask.count();
  if (n_true == 0) return grad;
  const double scale = 2.0 * lambda_xyz / n_true;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        if (!mask.at(q, j, k)) continue;
        for (int f = kFieldX; f <= kFieldZ; ++f) {
          grad[pred.index(q, j, k, f)] = scale * (pred.at(q, j, k, f) - gt.at(q, j, k, f));
        }
      }
  return grad;
}

inline std::vector<double> whl_loss_grad(const LabelTensor& pred, const LabelTensor& gt,
                                         const OccupancyMask& mask, double lambda_whl) {
  detail::require_same_shape(pred, gt, mask, "whl_loss_grad");
  std::vector<double> grad(pred.size(), 0.0);
  const int n_true = mask.count();
  if (n_true == 0) return grad;
  const double scale = lambda_whl / n_true;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        if (!mask.at(q, j, k)) continue;
        for (int f = kFieldW; f <= kFieldL; ++f) {
          const double w = gt.at(q, j, k, f);
          const double wh = pred.at(q, j, k, f);
          if (w < 0.0 || wh < 0.0) {
            throw NegativeDimensionError("whl_loss_grad: negative masked dimension entry");
          }
          grad[pred.index(q, j, k, f)] =
              scale * -(std::sqrt(w) - std::sqrt(wh)) / std::sqrt(wh);
        }
      }
  return grad;
}

inline std::vector<double> orientation_loss_grad(const LabelTensor& pred, const LabelTensor& gt,
                                                 const OccupancyMask& mask,
                                                 double lambda_orientation) {
  detail::require_same_shape(pred, gt, mask, "orientation_loss_grad");
  std::vector<double> grad(pred.size(), 0.0);
  const int n_true = mask.count();
  if (n_true == 0) return grad;
  const double scale = 2.0 * lambda_orientation / n_true;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        if (!mask.at(q, j, k)) continue;
        grad[pred.index(q, j, k, kFieldOrientation)] =
            scale * (pred.at(q, j, k, kFieldOrientation) - gt.at(q, j, k, kFieldOrientation));
      }
  return grad;
}

inline std::vector<double> conf_loss_grad(const LabelTensor& pred, const LabelTensor& gt,
                                          const OccupancyMask& mask, double lambda_conf) {
  detail::require_same_shape(pred, gt, mask, "conf_loss_grad");
  std::vector<double> grad(pred.size(), 0.0);
  const double slots = static_cast<double>(kNumQuadrants) * pred.cuboids() * pred.slots();
  const double scale = 2.0 * lambda_conf / slots;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        grad[pred.index(q, j, k, kFieldConfidence)] =
            scale * (pred.at(q, j, k, kFieldConfidence) - gt.at(q, j, k, kFieldConfidence));
      }
  return grad;
}

/// Chain rule through denormalize_object: slot-field partials are the metric
/// IoU partials times the per-field linear decode coefficients. Slots whose
/// IoU sits at the log floor contribute zero gradient.
inline std::vector<double> iou_loss_grad(const LabelTensor& pred, const LabelTensor& gt,
                                         const OccupancyMask& mask, const RoiPriorConfig& cfg,
                                         double lambda_iou) {
  detail::require_same_shape(pred, gt, mask, "iou_loss_grad");
  std::vector<double> grad(pred.size(), 0.0);
  const int n_true = mask.count();
  if (n_true == 0) return grad;
  const double scale = lambda_iou / n_true;
  const DimPriors& p = cfg.dim_priors;
  std::array<double, 8> vp, vg;
  for (int q = 0; q < kNumQuadrants; ++q)
    for (int j = 0; j < pred.cuboids(); ++j)
      for (int k = 0; k < pred.slots(); ++k) {
        if (!mask.at(q, j, k)) continue;
        for (int f = 0; f < kNumFields; ++f) {
          vp[static_cast<std::size_t>(f)] = pred.at(q, j, k, f);
          vg[static_cast<std::size_t>(f)] = gt.at(q, j, k, f);
        }
        const Box3D bp = denormalize_object(vp, q, j, cfg);
        const Box3D bg = denormalize_object(vg, q, j, cfg);
        const IouWithGrad g = iou3d_with_grad(bp, bg);
        if (g.value <= kIouLogEps) continue;  // clamped: flat
        const double factor = scale * -1.0 / g.value;
        // metric-per-normalized decode slopes, indexed like g.d_first
        const double slopes[7] = {quadrant_sign_x(q) * cfg.x_max,
                                  quadrant_sign_y(q) * cfg.y_max,
                                  cfg.dz(),
                                  p.w_max - p.w_min,
                                  p.h_max - p.h_min,
                                  p.l_max - p.l_min,
                                  2.0 * kPi};
        const int fields[7] = {kFieldX, kFieldY, kFieldZ, kFieldW, kFieldH, kFieldL,
                               kFieldOrientation};
        for (int i = 0; i < 7; ++i) {
          grad[pred.index(q, j, k, fields[i])] = factor * g.d_first[static_cast<std::size_t>(i)] * slopes[i];
        }
      }
  return grad;
}

inline std::vector<double> total_detection_loss_grad(const LabelTensor& pred,
                                                     const LabelTensor& gt,
                                                     const OccupancyMask& mask,
                                                     const RoiPriorConfig& cfg,
                                                     const LossWeights& w) {
  std::vector<double> grad = xyz_loss_grad(pred, gt, mask, w.xyz);
  const auto add = [&grad](const std::vector<double>& g) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  };
  add(whl_loss_grad(pred, gt, mask, w.whl));
  add(orientation_loss_grad(pred, gt, mask, w.orientation));
  add(iou_loss_grad(pred, gt, mask, cfg, w.iou));
  add(conf_loss_grad(pred, gt, mask, w.conf));
  return grad;
}

// --------------------------------------------------------------------------
// Gradient verification harness

/// A scalar function of a flat parameter vector with a matching analytic
/// gradient. `on_boundary` (optional) reports whether some non-smooth feature
/// is active within +/- h of the point.
struct DifferentiableScalarFn {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::function<bool(std::span<const double>, double)> on_boundary;
};

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
inline double grad_check(const DifferentiableScalarFn& fn, std::span<const double> point,
                         double h) {
  if (fn.on_boundary && fn.on_boundary(point, h)) {
    throw BoundaryPointError("grad_check: point has an active clamp or sign switch");
  }
  const std::vector<double> analytic = fn.gradient(point);
  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double hi = fn.value(x);
    x[i] = saved - h;
    const double lo = fn.value(x);
    x[i] = saved;
    const double fd = (hi - lo) / (2.0 * h);
    const double err = std::fabs(analytic[i] - fd) / std::max(1.0, std::fabs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

// Adapters binding ground truth and weights; the parameter vector is the
// prediction tensor (or depth grid) in storage order.

namespace detail {

inline LabelTensor tensor_from_point(std::span<const double> x, int cuboids, int slots) {
  LabelTensor t(cuboids, slots);
  std::copy(x.begin(), x.end(), t.values().begin());
  return t;
}

inline DepthMap depth_from_point(std::span<const double> x, int rows, int cols,
                                 double max_depth) {
  Grid g(rows, cols);
  std::copy(x.begin(), x.end(), g.values().begin());
  return DepthMap{std::move(g), DepthMap::State::kNormalized, max_depth};
}

}  // namespace detail

inline DifferentiableScalarFn make_mse_fn(DepthMap gt, double lambda_mse) {
  const int rows = gt.values.rows(), cols = gt.values.cols();
  const double max_depth = gt.max_depth;
  auto gt_n = gt.normalized();
  return DifferentiableScalarFn{
      [=](std::span<const double> x) {
        return mse_loss(detail::depth_from_point(x, rows, cols, max_depth), gt_n, lambda_mse);
      },
      [=](std::span<const double> x) {
        return mse_loss_grad(detail::depth_from_point(x, rows, cols, max_depth), gt_n,
                             lambda_mse);
      },
      nullptr};
}

inline DifferentiableScalarFn make_eas_fn(RgbImage image, double lambda_eas,
                                          double max_depth = 100.0) {
  const int rows = image.rows(), cols = image.cols();
  return DifferentiableScalarFn{
      [=](std::span<const double> x) {
        return eas_loss(detail::depth_from_point(x, rows, cols, max_depth), image, lambda_eas);
      },
      [=](std::span<const double> x) {
        return eas_loss_grad(detail::depth_from_point(x, rows, cols, max_depth), image,
                             lambda_eas);
      },
      // |forward difference| must clear the step, else the sign can flip
      [=](std::span<const double> x, double h) {
        const auto d = detail::depth_from_point(x, rows, cols, max_depth);
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols &&
                std::fabs(d.values.at(r, c + 1) - d.values.at(r, c)) <= 2.0 * h)
              return true;
            if (r + 1 < rows &&
                std::fabs(d.values.at(r + 1, c) - d.values.at(r, c)) <= 2.0 * h)
              return true;
          }
        return false;
      }};
}

inline DifferentiableScalarFn make_xyz_fn(LabelTensor gt, OccupancyMask mask, double lambda) {
  const int m = gt.cuboids(), n = gt.slots();
  return DifferentiableScalarFn{
      [=](std::span<const double> x) {
        return xyz_loss(detail::tensor_from_point(x, m, n), gt, mask, lambda);
      },
      [=](std::span<const double> x) {
        return xyz_loss_grad(detail::tensor_from_point(x, m, n), gt, mask, lambda);
      },
      nullptr};
}

inline DifferentiableScalarFn make_whl_fn(LabelTensor gt, OccupancyMask mask, double lambda) {
  const int m = gt.cuboids(), n = gt.slots();
  return DifferentiableScalarFn{
      [=](std::span<const double> x) {
        return whl_loss(detail::tensor_from_point(x, m, n), gt, mask, lambda);
      },
      [=](std::span<const double> x) {
        return whl_loss_grad(detail::tensor_from_point(x, m, n), gt, mask, lambda);
      },
      // sqrt curvature blows up toward zero; requires entries well above h
      [=](std::span<const double> x, double h) {
        const auto t = detail::tensor_from_point(x, m, n);
        for (int q = 0; q < kNumQuadrants; ++q)
          for (int j = 0; j < m; ++j)
            for (int k = 0; k < n; ++k) {
              if (!mask.at(q, j, k)) continue;
              for (int f = kFieldW; f <= kFieldL; ++f) {
                if (t.at(q, j, k, f) <= h) return true;
              }
            }
        return false;
      }};
}

inline DifferentiableScalarFn make_orientation_fn(LabelTensor gt, OccupancyMask mask,
                                                  double lambda) {
  const int m = gt.cuboids(), n = gt.slots();
  return DifferentiableScalarFn{
      [=](std::span<const double> x) {
        return orientation_loss(detail::tensor_from_point(x, m, n), gt, mask, lambda);
      },
      [=](std::span<const double> x) {
        return orientation_loss_grad(detail::tensor_from_point(x, m, n), gt, mask, lambda);
      },
      nullptr};
}

inline DifferentiableScalarFn make_conf_fn(LabelTensor gt, OccupancyMask mask, double lambda) {
  const int m = gt.cuboids(), n = gt.slots();
  return DifferentiableScalarFn{
      [=](std::span<const double> x) {
        return conf_loss(detail::tensor_from_point(x, m, n), gt, mask, lambda);
      },
      [=](std::span<const double> x) {
        return conf_loss_grad(detail::tensor_from_point(x, m, n), gt, mask, lambda);
      },
      nullptr};
}

inline DifferentiableScalarFn make_iou_fn(LabelTensor gt, OccupancyMask mask, RoiPriorConfig cfg,
                                          double lambda) {
  const int m = gt.cuboids(), n = gt.slots();
  // Reject points whose clip topology could shift inside the FD stencil:
  // near-floor IoU, near-tangent vertical overlap, or orientation at the wrap.
  auto boundary = [=](std::span<const double> x, double h) {
    const auto t = detail::tensor_from_point(x, m, n);
    std::array<double, 8> vp, vg;
    for (int q = 0; q < kNumQuadrants; ++q)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < n; ++k) {
          if (!mask.at(q, j, k)) continue;
          for (int f = 0; f < kNumFields; ++f) {
            vp[static_cast<std::size_t>(f)] = t.at(q, j, k, f);
            vg[static_cast<std::size_t>(f)] = gt.at(q, j, k, f);
          }
          const double on = t.at(q, j, k, kFieldOrientation);
          if (on <= 16.0 * h || on >= 1.0 - 16.0 * h) return true;
          const Box3D bp = denormalize_object(vp, q, j, cfg);
          const Box3D bg = denormalize_object(vg, q, j, cfg);
          if (iou_3d(bp, bg) < 1e-3) return true;
          const double lo = std::max(bp.y_c - 0.5 * bp.height, bg.y_c - 0.5 * bg.height);
          const double hi = std::min(bp.y_c + 0.5 * bp.height, bg.y_c + 0.5 * bg.height);
          if (hi - lo < 64.0 * h * cfg.y_max) return true;
        }
    return false;
  };
  return DifferentiableScalarFn{
      [=](std::span<const double> x) {
        return iou_loss(detail::tensor_from_point(x, m, n), gt, mask, cfg, lambda);
      },
      [=](std::span<const double> x) {
        return iou_loss_grad(detail::tensor_from_point(x, m, n), gt, mask, cfg, lambda);
      },
      boundary};
}

inline DifferentiableScalarFn make_total_fn(LabelTensor gt, OccupancyMask mask,
                                            RoiPriorConfig cfg, LossWeights w) {
  const int m = gt.cuboids(), n = gt.slots();
  auto whl_boundary = make_whl_fn(gt, mask, w.whl).on_boundary;
  auto iou_boundary = make_iou_fn(gt, mask, cfg, w.iou).on_boundary;
  return DifferentiableScalarFn{
      [=](std::span<const double> x) {
        const auto t = detail::tensor_from_point(x, m, n);
        return total_detection_loss(t, gt, mask, cfg, w).total;
      },
      [=](std::span<const double> x) {
        return total_detection_loss_grad(detail::tensor_from_point(x, m, n), gt, mask, cfg, w);
      },
      [=](std::span<const double> x, double h) {
        return whl_boundary(x, h) || iou_boundary(x, h);
      }};
}

}  // namespace cubify3d
